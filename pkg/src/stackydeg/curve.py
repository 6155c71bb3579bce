"""Twisted nodal curves as decorated dual graphs.

Components carry a genus, nodes carry a cyclic stabilizer order, a
persistence flag (the node stays nodal over the whole base instead of
smoothing out) and optionally a record of the ambient surface
singularity, and markings carry a gerbe order. The arithmetic genus is
always recomputed from the graph, never stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .blowup import AnSing
from .errors import SchemaError

__all__ = [
    "Component",
    "Node",
    "Marking",
    "TwistedCurve",
    "MultiDegree",
    "GradingSpec",
    "Violation",
    "CurveError",
    "STABLE",
    "DESTABILIZING_P1",
    "VIOLATION",
    "TORSION_CRITERION_NOTE",
    "arithmetic_genus",
    "omega_degree_on_component",
    "quasi_stability_check",
    "is_torsion_on_component",
    "validate_twisted_map",
]


class CurveError(ValueError):
    """A curve description is structurally invalid."""


STABLE = "STABLE"
DESTABILIZING_P1 = "DESTABILIZING_P1"
VIOLATION = "VIOLATION"

#: The torsion test below is applied factor by factor; this note is
#: attached to every emitted validation report.
TORSION_CRITERION_NOTE = (
    "torsion criterion applied componentwise across torus factors: a "
    "component counts as torsion only if its degree vanishes in every factor"
)


@dataclass(frozen=True)
class Component:
    id: str
    genus: int

    @property
    def coarse_is_p1(self) -> bool:
        return self.genus == 0


@dataclass(frozen=True)
class Node:
    id: str
    ends: tuple
    stab_order: int = 1
    persistent: bool = False
    singularity: AnSing | None = None

    @property
    def is_self_node(self) -> bool:
        return self.ends[0] == self.ends[1]


@dataclass(frozen=True)
class Marking:
    id: str
    comp: str
    gerbe_order: int = 1


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str | None
    detail: str

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "detail": self.detail}


class TwistedCurve:
    """Immutable decorated dual graph. Safe to share between threads."""

    __slots__ = ("_components", "_nodes", "_markings", "_comp_ix", "_node_ix")

    def __init__(self, components, nodes=(), markings=()):
        self._components = tuple(components)
        self._nodes = tuple(nodes)
        self._markings = tuple(markings)
        if not self._components:
            raise CurveError("a curve needs at least one component")
        self._comp_ix = {}
        for c in self._components:
            if c.id in self._comp_ix:
                raise CurveError(f"duplicate component id {c.id!r}")
            if c.genus < 0:
                raise CurveError(f"component {c.id!r} has negative genus")
            self._comp_ix[c.id] = c
        self._node_ix = {}
        for n in self._nodes:
            if n.id in self._node_ix:
                raise CurveError(f"duplicate node id {n.id!r}")
            if n.stab_order < 1:
                raise CurveError(f"node {n.id!r} has stabilizer order < 1")
            for end in n.ends:
                if end not in self._comp_ix:
                    raise CurveError(f"node {n.id!r} ends on unknown component {end!r}")
            self._node_ix[n.id] = n
        seen_marks = set()
        for m in self._markings:
            if m.id in seen_marks:
                raise CurveError(f"duplicate marking id {m.id!r}")
            if m.gerbe_order < 1:
                raise CurveError(f"marking {m.id!r} has gerbe order < 1")
            if m.comp not in self._comp_ix:
                raise CurveError(f"marking {m.id!r} sits on unknown component {m.comp!r}")
            seen_marks.add(m.id)

    @property
    def components(self) -> tuple:
        return self._components

    @property
    def nodes(self) -> tuple:
        return self._nodes

    @property
    def markings(self) -> tuple:
        return self._markings

    def component(self, comp_id: str) -> Component:
        try:
            return self._comp_ix[comp_id]
        except KeyError:
            raise CurveError(f"no component {comp_id!r}") from None

    def node(self, node_id: str) -> Node:
        try:
            return self._node_ix[node_id]
        except KeyError:
            raise CurveError(f"no node {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_ix

    def nodes_on(self, comp_id: str) -> tuple:
        return tuple(n for n in self._nodes if comp_id in n.ends)

    def branch_count(self, comp_id: str) -> int:
        # a self-node contributes two branches
        return sum(n.ends.count(comp_id) for n in self._nodes)

    def markings_on(self, comp_id: str) -> tuple:
        return tuple(m for m in self._markings if m.comp == comp_id)

    def is_connected(self) -> bool:
        ids = set(self._comp_ix)
        reached = {self._components[0].id}
        frontier = [self._components[0].id]
        adjacency = {cid: set() for cid in ids}
        for n in self._nodes:
            adjacency[n.ends[0]].add(n.ends[1])
            adjacency[n.ends[1]].add(n.ends[0])
        while frontier:
            cur = frontier.pop()
            for nxt in adjacency[cur]:
                if nxt not in reached:
                    reached.add(nxt)
                    frontier.append(nxt)
        return reached == ids

    def first_betti(self) -> int:
        return len(self._nodes) - len(self._components) + 1

    def with_changes(self, components=None, nodes=None, markings=None) -> "TwistedCurve":
        return TwistedCurve(
            self._components if components is None else components,
            self._nodes if nodes is None else nodes,
            self._markings if markings is None else markings,
        )

    def replace_node(self, node_id: str, new_node: Node) -> "TwistedCurve":
        nodes = tuple(new_node if n.id == node_id else n for n in self._nodes)
        return self.with_changes(nodes=nodes)

    def __eq__(self, other):
        if not isinstance(other, TwistedCurve):
            return NotImplemented
        return (self._components == other._components
                and self._nodes == other._nodes
                and self._markings == other._markings)

    def __hash__(self):
        return hash((self._components, self._nodes, self._markings))

    def __repr__(self):
        return (f"TwistedCurve({len(self._components)} components, "
                f"{len(self._nodes)} nodes, {len(self._markings)} markings)")

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        nodes = []
        for n in self._nodes:
            rec = {
                "id": n.id,
                "ends": list(n.ends),
                "stab": n.stab_order,
                "persistent": n.persistent,
            }
            if n.singularity is not None:
                rec["sing"] = n.singularity.to_json_dict()
            nodes.append(rec)
        return {
            "components": [{"id": c.id, "genus": c.genus} for c in self._components],
            "nodes": nodes,
            "markings": [
                {"id": m.id, "comp": m.comp, "gerbe": m.gerbe_order}
                for m in self._markings
            ],
        }

    @classmethod
    def from_json_dict(cls, obj, pointer: str = "") -> "TwistedCurve":
        if not isinstance(obj, dict):
            raise SchemaError(pointer, "expected a curve object")
        comps_raw = _expect_list(obj, "components", pointer)
        components = []
        for i, c in enumerate(comps_raw):
            p = f"{pointer}/components/{i}"
            if not isinstance(c, dict):
                raise SchemaError(p, "expected a component object")
            cid = _expect_id(c, "id", p)
            genus = c.get("genus")
            if not isinstance(genus, int) or genus < 0:
                raise SchemaError(f"{p}/genus", "expected a non-negative integer")
            components.append(Component(cid, genus))
        nodes = []
        for i, n in enumerate(obj.get("nodes", []) or []):
            p = f"{pointer}/nodes/{i}"
            if not isinstance(n, dict):
                raise SchemaError(p, "expected a node object")
            nid = _expect_id(n, "id", p)
            ends = n.get("ends")
            if (not isinstance(ends, list) or len(ends) != 2
                    or not all(isinstance(e, (str, int)) for e in ends)):
                raise SchemaError(f"{p}/ends", "expected a pair of component ids")
            stab = n.get("stab", 1)
            if not isinstance(stab, int) or stab < 1:
                raise SchemaError(f"{p}/stab", "expected a positive integer")
            persistent = n.get("persistent", False)
            if not isinstance(persistent, bool):
                raise SchemaError(f"{p}/persistent", "expected a boolean")
            sing = None
            if "sing" in n and n["sing"] is not None:
                s = n["sing"]
                if (not isinstance(s, dict) or not isinstance(s.get("a"), int)
                        or not isinstance(s.get("mu"), int)):
                    raise SchemaError(f"{p}/sing", "expected {'a': int, 'mu': int}")
                try:
                    sing = AnSing(s["a"], s["mu"])
                except ValueError as exc:
                    raise SchemaError(f"{p}/sing", str(exc))
            nodes.append(Node(nid, (str(ends[0]), str(ends[1])), stab, persistent, sing))
        markings = []
        for i, m in enumerate(obj.get("markings", []) or []):
            p = f"{pointer}/markings/{i}"
            if not isinstance(m, dict):
                raise SchemaError(p, "expected a marking object")
            mid = _expect_id(m, "id", p)
            comp = m.get("comp")
            if not isinstance(comp, (str, int)):
                raise SchemaError(f"{p}/comp", "expected a component id")
            gerbe = m.get("gerbe", 1)
            if not isinstance(gerbe, int) or gerbe < 1:
                raise SchemaError(f"{p}/gerbe", "expected a positive integer")
            markings.append(Marking(mid, str(comp), gerbe))
        try:
            return cls(components, nodes, markings)
        except CurveError as exc:
            raise SchemaError(pointer, str(exc))

    def to_dot(self, multidegree: "MultiDegree | None" = None) -> str:
        lines = ["graph curve {"]
        for c in self._components:
            label = f"g={c.genus}"
            if multidegree is not None:
                degs = ",".join(
                    str(multidegree.degree(k, c.id))
                    for k in range(multidegree.n_factors)
                )
                label += f"\\ndeg=({degs})"
            lines.append(f'  "{c.id}" [shape=ellipse, label="{label}"];')
        for n in self._nodes:
            style = "" if n.persistent else ", style=dashed"
            lines.append(
                f'  "{n.ends[0]}" -- "{n.ends[1]}" [label="μ_{n.stab_order}"{style}];'
            )
        for m in self._markings:
            lines.append(f'  "mark:{m.id}" [shape=point];')
            lines.append(
                f'  "{m.comp}" -- "mark:{m.id}" [label="σ_{m.gerbe_order}", style=dotted];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


def _expect_list(obj: dict, key: str, pointer: str) -> list:
    value = obj.get(key)
    if not isinstance(value, list):
        raise SchemaError(f"{pointer}/{key}", "expected a list")
    return value


def _expect_id(obj: dict, key: str, pointer: str) -> str:
    value = obj.get(key)
    if not isinstance(value, (str, int)):
        raise SchemaError(f"{pointer}/{key}", "expected an id")
    return str(value)


# ---------------------------------------------------------------------------
# Multidegrees and gradings.


class MultiDegree:
    """Per torus factor, an exact degree for each component.

    Missing entries read as zero; only nonzero entries are stored, so
    equality is equality of the underlying degree data.
    """

    __slots__ = ("n_factors", "_deg")

    def __init__(self, n_factors: int, deg=None):
        if n_factors < 1:
            raise CurveError("a multidegree needs at least one factor")
        self.n_factors = n_factors
        self._deg = {}
        for (k, comp), value in (deg or {}).items():
            if not 0 <= k < n_factors:
                raise CurveError(f"factor index {k} out of range")
            value = Fraction(value)
            if value:
                self._deg[(k, str(comp))] = value

    def degree(self, k: int, comp: str) -> Fraction:
        return self._deg.get((k, comp), Fraction(0))

    def adjusted(self, k: int, comp: str, delta) -> "MultiDegree":
        new = dict(self._deg)
        value = self.degree(k, comp) + Fraction(delta)
        if value:
            new[(k, comp)] = value
        else:
            new.pop((k, comp), None)
        return MultiDegree(self.n_factors, new)

    def with_entry(self, k: int, comp: str, value) -> "MultiDegree":
        new = dict(self._deg)
        new.pop((k, comp), None)
        value = Fraction(value)
        if value:
            new[(k, comp)] = value
        return MultiDegree(self.n_factors, new)

    def without_component(self, comp: str) -> "MultiDegree":
        new = {key: v for key, v in self._deg.items() if key[1] != comp}
        return MultiDegree(self.n_factors, new)

    def totals(self, curve: TwistedCurve) -> list:
        return [
            sum((self.degree(k, c.id) for c in curve.components), Fraction(0))
            for k in range(self.n_factors)
        ]

    def denominator_violations(self, curve: TwistedCurve) -> list:
        """Check that every degree clears the local stacky orders."""
        out = []
        for c in curve.components:
            orders = [1]
            orders += [n.stab_order for n in curve.nodes_on(c.id)]
            orders += [m.gerbe_order for m in curve.markings_on(c.id)]
            bound = lcm(*orders)
            for k in range(self.n_factors):
                if (self.degree(k, c.id) * bound).denominator != 1:
                    out.append(Violation(
                        "degree-denominator", c.id,
                        f"factor {k}: degree {self.degree(k, c.id)} does not "
                        f"clear the local order bound {bound}",
                    ))
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiDegree):
            return NotImplemented
        return self.n_factors == other.n_factors and self._deg == other._deg

    def __hash__(self):
        return hash((self.n_factors, frozenset(self._deg.items())))

    def __repr__(self):
        return f"MultiDegree(factors={self.n_factors}, nonzero={len(self._deg)})"

    def to_json_dict(self, curve: TwistedCurve) -> dict:
        return {
            "factors": self.n_factors,
            "deg": [
                {c.id: str(self.degree(k, c.id)) for c in curve.components}
                for k in range(self.n_factors)
            ],
        }

    @classmethod
    def from_json_dict(cls, obj, pointer: str = "") -> "MultiDegree":
        if not isinstance(obj, dict):
            raise SchemaError(pointer, "expected a multidegree object")
        factors = obj.get("factors")
        if not isinstance(factors, int) or factors < 1:
            raise SchemaError(f"{pointer}/factors", "expected a positive integer")
        rows = obj.get("deg")
        if not isinstance(rows, list) or len(rows) != factors:
            raise SchemaError(f"{pointer}/deg",
                              f"expected one component map per factor ({factors})")
        deg = {}
        for k, row in enumerate(rows):
            if not isinstance(row, dict):
                raise SchemaError(f"{pointer}/deg/{k}", "expected an object")
            for comp, value in row.items():
                try:
                    deg[(k, str(comp))] = Fraction(value)
                except (ValueError, ZeroDivisionError, TypeError):
                    raise SchemaError(f"{pointer}/deg/{k}/{comp}",
                                      "expected an exact rational like '1/4'")
        return cls(factors, deg)


class GradingSpec:
    """Per-factor generation bound d_k, optionally derived from weights."""

    __slots__ = ("d", "weights")

    def __init__(self, d=None, weights=None):
        if weights is not None:
            weights = tuple(None if w is None else tuple(w) for w in weights)
        if d is None:
            if weights is None or any(w is None for w in weights):
                raise CurveError("grading needs d or a full set of weight lists")
            d = tuple(max(abs(x) for x in w) for w in weights)
        else:
            d = tuple(int(x) for x in d)
        if any(x < 1 for x in d):
            raise CurveError("grading bounds must be positive")
        if weights is not None:
            if len(weights) != len(d):
                raise CurveError("weights and d must have the same length")
            for k, w in enumerate(weights):
                if w is None:
                    continue
                if not w:
                    raise CurveError(f"factor {k}: empty weight list")
                if max(abs(x) for x in w) != d[k]:
                    raise CurveError(
                        f"factor {k}: d={d[k]} is not the maximal absolute weight"
                    )
        self.d = d
        self.weights = weights

    @property
    def n_factors(self) -> int:
        return len(self.d)

    def d_sources(self) -> tuple:
        if self.weights is None:
            return ("given",) * len(self.d)
        return tuple(
            "weights" if w is not None else "given" for w in self.weights
        )

    def __eq__(self, other):
        if not isinstance(other, GradingSpec):
            return NotImplemented
        return self.d == other.d and self.weights == other.weights

    def __repr__(self):
        return f"GradingSpec(d={self.d})"

    def to_json_dict(self) -> dict:
        out = {"d": list(self.d)}
        if self.weights is not None:
            out["weights"] = [None if w is None else list(w) for w in self.weights]
        return out

    @classmethod
    def from_json_dict(cls, obj, pointer: str = "") -> "GradingSpec":
        if not isinstance(obj, dict):
            raise SchemaError(pointer, "expected a grading object")
        d = obj.get("d")
        if d is not None:
            if (not isinstance(d, list) or not d
                    or not all(isinstance(x, int) and x >= 1 for x in d)):
                raise SchemaError(f"{pointer}/d", "expected a list of positive integers")
        weights = obj.get("weights")
        if weights is not None:
            if not isinstance(weights, list):
                raise SchemaError(f"{pointer}/weights", "expected a list")
            for k, w in enumerate(weights):
                if w is None:
                    continue
                if not isinstance(w, list) or not all(isinstance(x, int) for x in w):
                    raise SchemaError(f"{pointer}/weights/{k}",
                                      "expected a list of integers or null")
        try:
            return cls(tuple(d) if d is not None else None, weights)
        except CurveError as exc:
            raise SchemaError(pointer, str(exc))


# ---------------------------------------------------------------------------
# Genus, stability and validation.


def arithmetic_genus(curve: TwistedCurve) -> int:
    """Sum of component genera plus the first Betti number of the graph."""
    if not curve.is_connected():
        raise CurveError("arithmetic genus of a disconnected curve")
    return sum(c.genus for c in curve.components) + curve.first_betti()


def omega_degree_on_component(curve: TwistedCurve, comp_id: str,
                              extra_markings: bool = True) -> int:
    """Coarse degree of the (marked) dualizing sheaf on one component."""
    c = curve.component(comp_id)
    deg = 2 * c.genus - 2 + curve.branch_count(comp_id)
    if extra_markings:
        deg += len(curve.markings_on(comp_id))
    return deg


def quasi_stability_check(curve: TwistedCurve, pullback_ample_deg=None) -> dict:
    """Classify each component as STABLE, DESTABILIZING_P1 or VIOLATION.

    ``pullback_ample_deg`` maps component ids to the (non-negative)
    degree of the pulled-back polarization; missing entries read as zero.
    """
    ample = pullback_ample_deg or {}
    out = {}
    for c in curve.components:
        a = Fraction(ample.get(c.id, 0))
        if a < 0:
            raise ValueError(f"negative polarization degree on {c.id!r}")
        total = a + omega_degree_on_component(curve, c.id, extra_markings=True)
        if total > 0:
            out[c.id] = STABLE
        elif total == 0 and c.genus == 0:
            out[c.id] = DESTABILIZING_P1
        else:
            out[c.id] = VIOLATION
    return out


def is_torsion_on_component(md: MultiDegree, comp_id: str) -> bool:
    """True when the degree vanishes in every torus factor.

    Meant for genus-0 components, where vanishing total degree means the
    restricted map has finite cyclic image.
    """
    return all(md.degree(k, comp_id) == 0 for k in range(md.n_factors))


def validate_twisted_map(curve: TwistedCurve, md: MultiDegree,
                         pullback_ample_deg=None) -> list:
    """All obstructions to the pair (curve, degrees) being a twisted map.

    Checks connectivity, quasi-stability of every component, and that no
    destabilizing component is torsion. Stacky data living only on nodes
    and markings is guaranteed by the types themselves, so there is
    nothing to re-check for it here.
    """
    violations = []
    if not curve.is_connected():
        violations.append(Violation(
            "cond1-disconnected", None, "the dual graph is not connected"))
    classes = quasi_stability_check(curve, pullback_ample_deg)
    for c in curve.components:
        label = classes[c.id]
        if label == VIOLATION:
            violations.append(Violation(
                "cond2-unstable", c.id,
                "component is neither positive for the polarized dualizing "
                "sheaf nor a destabilizing rational curve"))
        elif label == DESTABILIZING_P1 and is_torsion_on_component(md, c.id):
            violations.append(Violation(
                "cond4-torsion-destabilizing", c.id,
                "destabilizing component with zero degree in every factor"))
    return violations
