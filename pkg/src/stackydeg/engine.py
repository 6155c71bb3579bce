"""The degeneration pipeline for twisted curves with torus gluing data.

Given the combinatorial generic fiber (a twisted curve with its
multidegree), a generation bound per torus factor, and an invertible
gluing matrix over Q(t) at every persistent node, :func:`degenerate`
produces the limit curve in four passes:

1. normalize the gluing exponents on destabilizing components, using the
   shifts available from automorphisms of a two-noded rational curve;
2. at each persistent node, read the insertion parameters m_1 <= ... <=
   m_n off the Smith normal form of the gluing matrix and insert one
   exceptional rational component per factor with m_k > 0, with its
   exact degree and stacky node orders;
3. contract every torsion rational component the insertions left behind,
   merging its two nodes into a single recorded surface singularity;
4. check that the result is a twisted map and that genus and per-factor
   total degree match the input exactly.

Every pass appends tagged records to an ordered step log; the pipeline
is a pure function of its input, so independent runs can execute
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .blowup import AnSing, ContractionError, contract_singularity
from .curve import (
    TORSION_CRITERION_NOTE,
    Component,
    GradingSpec,
    MultiDegree,
    Node,
    TwistedCurve,
    arithmetic_genus,
    is_torsion_on_component,
    validate_twisted_map,
)
from .dvrlinalg import (
    Mat,
    SingularMatrixError,
    smith_normal_form,
    valuation_of_det,
)
from .errors import SchemaError
from .field import INFINITE, t_power

__all__ = [
    "DegenerationInput",
    "DegenerationOutput",
    "EngineError",
    "TorsionContractionError",
    "DegenerationValidationError",
    "compute_blowup_parameters",
    "normalize_destabilizing_gluing",
    "insert_exceptional_chain",
    "contract_torsion_components",
    "degenerate",
    "degeneration_input_from_json",
]


class EngineError(Exception):
    """The pipeline cannot proceed on this input."""


class TorsionContractionError(EngineError):
    """A torsion component cannot be contracted (unequal node orders)."""


class DegenerationValidationError(EngineError):
    """The pipeline finished but its output is not a twisted map."""

    def __init__(self, violations, log):
        self.violations = list(violations)
        self.log = list(log)
        detail = "; ".join(v.detail for v in self.violations)
        super().__init__(f"limit fails validation: {detail}")


@dataclass
class DegenerationInput:
    curve: TwistedCurve
    multidegree: MultiDegree
    grading: GradingSpec
    gluing: dict = field(default_factory=dict)
    extra_mu: dict = field(default_factory=dict)

    def validate(self) -> None:
        n = self.multidegree.n_factors
        if self.grading.n_factors != n:
            raise EngineError(
                f"grading has {self.grading.n_factors} factors, "
                f"multidegree has {n}")
        persistent = {nd.id for nd in self.curve.nodes if nd.persistent}
        missing = sorted(persistent - set(self.gluing))
        if missing:
            raise EngineError(f"persistent nodes without gluing data: {missing}")
        for nid in sorted(self.gluing):
            if not self.curve.has_node(nid):
                raise EngineError(f"gluing refers to unknown node {nid!r}")
            if not self.curve.node(nid).persistent:
                raise EngineError(f"gluing given for non-persistent node {nid!r}")
            g = self.gluing[nid]
            if g.rows != n or g.cols != n:
                raise EngineError(
                    f"gluing at {nid!r} is {g.rows}x{g.cols}, expected {n}x{n}")
            if valuation_of_det(g) == INFINITE:
                raise SingularMatrixError(f"gluing at node {nid!r} is singular")
        for nid, k in self.extra_mu.items():
            if not self.curve.has_node(nid):
                raise EngineError(f"extra_mu refers to unknown node {nid!r}")
            if not isinstance(k, int) or k < 1:
                raise EngineError(f"extra_mu at {nid!r} must be a positive integer")

    def to_json_dict(self) -> dict:
        out = self.curve.to_json_dict()
        out["multidegree"] = self.multidegree.to_json_dict(self.curve)
        out["grading"] = self.grading.to_json_dict()
        out["gluing"] = {
            nid: self.gluing[nid].to_json_dict() for nid in sorted(self.gluing)
        }
        if self.extra_mu:
            out["extra_mu"] = {nid: self.extra_mu[nid]
                               for nid in sorted(self.extra_mu)}
        return out


@dataclass
class DegenerationOutput:
    limit_curve: TwistedCurve
    limit_multidegree: MultiDegree
    log: list
    validation: list

    def to_json_dict(self) -> dict:
        return {
            "limit_curve": self.limit_curve.to_json_dict(),
            "limit_multidegree": self.limit_multidegree.to_json_dict(self.limit_curve),
            "log": self.log,
            "validation": {
                "violations": [v.to_json_dict() for v in self.validation],
                "torsion_criterion": TORSION_CRITERION_NOTE,
            },
        }


def degeneration_input_from_json(obj, max_degree: int | None = None) -> DegenerationInput:
    """Parse the flat input document (curve fields plus gluing data).

    ``max_degree`` caps the polynomial degree of gluing entries; the cap
    is meant for untrusted boundaries, library callers leave it off.
    """
    curve = TwistedCurve.from_json_dict(obj)
    if "multidegree" not in obj:
        raise SchemaError("/multidegree", "missing field")
    md = MultiDegree.from_json_dict(obj["multidegree"], "/multidegree")
    comp_ids = {c.id for c in curve.components}
    for k in range(md.n_factors):
        for comp in obj["multidegree"]["deg"][k]:
            if str(comp) not in comp_ids:
                raise SchemaError(f"/multidegree/deg/{k}/{comp}",
                                  "unknown component id")
    if "grading" not in obj:
        raise SchemaError("/grading", "missing field")
    grading = GradingSpec.from_json_dict(obj["grading"], "/grading")
    if grading.n_factors != md.n_factors:
        raise SchemaError("/grading/d",
                          f"expected {md.n_factors} factors to match the multidegree")
    gluing_raw = obj.get("gluing", {})
    if not isinstance(gluing_raw, dict):
        raise SchemaError("/gluing", "expected an object keyed by node id")
    gluing = {}
    node_ids = {n.id: n for n in curve.nodes}
    for nid in gluing_raw:
        p = f"/gluing/{nid}"
        if nid not in node_ids:
            raise SchemaError(p, "unknown node id")
        if not node_ids[nid].persistent:
            raise SchemaError(p, "gluing data only makes sense at persistent nodes")
        g = Mat.from_json_dict(gluing_raw[nid], p, max_degree=max_degree)
        if g.rows != md.n_factors or g.cols != md.n_factors:
            raise SchemaError(p, f"expected a {md.n_factors}x{md.n_factors} matrix")
        gluing[nid] = g
    missing = sorted(n.id for n in curve.nodes if n.persistent and n.id not in gluing)
    if missing:
        raise SchemaError("/gluing", f"missing matrices for persistent nodes {missing}")
    extra_raw = obj.get("extra_mu", {})
    if not isinstance(extra_raw, dict):
        raise SchemaError("/extra_mu", "expected an object keyed by node id")
    extra_mu = {}
    for nid, k in extra_raw.items():
        p = f"/extra_mu/{nid}"
        if nid not in node_ids:
            raise SchemaError(p, "unknown node id")
        if not isinstance(k, int) or k < 1:
            raise SchemaError(p, "expected a positive integer")
        extra_mu[nid] = k
    return DegenerationInput(curve, md, grading, gluing, extra_mu)


# ---------------------------------------------------------------------------
# Step 1 helpers: insertion parameters and gluing normalization.


def compute_blowup_parameters(g: Mat, grading: GradingSpec) -> list:
    """Insertion parameters (m_k, d_k), one per factor, from the gluing.

    The m_k are the sorted diagonal valuations of the Smith normal form
    (unit factors dropped); a factor with m_k = 0 needs no insertion
    because its line bundle already extends across the node.
    """
    if grading.n_factors != g.rows:
        raise EngineError(
            f"grading has {grading.n_factors} factors for a {g.rows}x{g.cols} gluing")
    snf = smith_normal_form(g)
    return list(zip(snf.diag_valuations, grading.d))


def _normalized_valuations(m1: int, m2: int, k: int) -> tuple:
    # reachable moves: (c, c) for any c and (k*delta, 0) for any delta
    delta = max(0, -((m1 - m2) // k))
    return (m1 - m2 + k * delta, 0)


def normalize_destabilizing_gluing(curve: TwistedCurve, comp_id: str,
                                   valuations: tuple, k: int) -> tuple:
    """Reduce the gluing exponents (m1, m2) on a two-noded rational curve.

    A global fiber rescaling shifts both exponents together and a
    one-sided automorphism shifts the first in steps of the stacky order
    k, so (m1, m2) can always be brought to (m1', 0) with the smallest
    non-negative m1' = m1 - m2 + k*delta. No reduction beyond sign
    repair is performed.
    """
    comp = curve.component(comp_id)
    incident = [n for n in curve.nodes_on(comp_id) if not n.is_self_node]
    if comp.genus != 0 or len(incident) != 2 or curve.branch_count(comp_id) != 2:
        raise EngineError(
            f"component {comp_id!r} is not a two-noded rational curve")
    if k < 1:
        raise EngineError("the shift step must be a positive integer")
    m1, m2 = valuations
    return _normalized_valuations(m1, m2, k)


def _effective_mu(node: Node, extra_mu: dict):
    if node.id in extra_mu:
        return extra_mu[node.id]
    if node.stab_order > 1:
        return node.stab_order
    return None


def _fresh(existing: set, base: str) -> str:
    out = base
    while out in existing:
        out += "'"
    existing.add(out)
    return out


def _totals_json(md: MultiDegree, curve: TwistedCurve) -> list:
    return [str(x) for x in md.totals(curve)]


def _normalize_pass(curve, md, gluing, extra_mu, log):
    """Rewrite gluing matrices on destabilizing components (single factor)."""
    if md.n_factors != 1:
        return gluing
    gluing = dict(gluing)
    for comp in curve.components:
        if comp.genus != 0 or curve.markings_on(comp.id):
            continue
        incident = [n for n in curve.nodes_on(comp.id) if not n.is_self_node]
        if len(incident) != 2 or curve.branch_count(comp.id) != 2:
            continue
        n1, n2 = sorted(incident, key=lambda n: n.id)
        if n1.id not in gluing or n2.id not in gluing:
            continue
        signs = []
        vals = []
        for n in (n1, n2):
            v = valuation_of_det(gluing[n.id])
            if v == INFINITE:
                raise SingularMatrixError(f"gluing at node {n.id!r} is singular")
            s = 1 if n.ends[1] == comp.id else -1
            signs.append(s)
            vals.append(s * v)
        k = _effective_mu(n1, extra_mu) or 1
        m1p, m2p = _normalized_valuations(vals[0], vals[1], k)
        if (m1p, m2p) == (vals[0], vals[1]):
            continue
        gluing[n1.id] = gluing[n1.id].scale(t_power(signs[0] * (m1p - vals[0])))
        gluing[n2.id] = gluing[n2.id].scale(t_power(signs[1] * (m2p - vals[1])))
        log.append({
            "type": "normalize",
            "component": comp.id,
            "nodes": [n1.id, n2.id],
            "step": k,
            "before": [vals[0], vals[1]],
            "after": [m1p, m2p],
            "totals": _totals_json(md, curve),
        })
    return gluing


# ---------------------------------------------------------------------------
# Step 2: chain insertion.


def insert_exceptional_chain(curve: TwistedCurve, md: MultiDegree, node_id: str,
                             params, extra_mu: int | None = None):
    """Replace a persistent node by a chain of exceptional rational curves.

    ``params`` holds one (m_k, d_k) pair per factor; a component is
    inserted for every factor with m_k > 0, walking the chain in factor
    order away from the branch listed second in the node's endpoint pair
    (the blown-up branch). For factor k the new component receives
    degree 1/d_k, or 1/(d_k * extra_mu) when an order-extra_mu structure
    rides along, and the component just blown up loses the same amount,
    so per-factor totals are conserved. Each new smoothing node records
    the surface singularity the insertion leaves behind; the surviving
    persistent node keeps the original stacky order.

    Returns (curve, multidegree, info) where info is None for a no-op
    and otherwise a JSON-ready description of the chain.
    """
    node = curve.node(node_id)
    if not node.persistent:
        raise EngineError(f"node {node_id!r} is not persistent; nothing to insert")
    active = [(ix, m, d) for ix, (m, d) in enumerate(params) if m > 0]
    for ix, (m, d) in enumerate(params):
        if m < 0 or d < 1:
            raise EngineError(f"factor {ix + 1}: invalid parameters (m={m}, d={d})")
    if not active:
        return curve, md, None
    comp_ids = {c.id for c in curve.components}
    node_ids = {n.id for n in curve.nodes} - {node_id}
    un_blown, blown = node.ends
    mu = extra_mu
    new_comps = []
    new_nodes = []
    inserted = []
    prev = blown
    for ix, m, d in active:
        e_id = _fresh(comp_ids, f"{node_id}:E{ix + 1}")
        q_id = _fresh(node_ids, f"{node_id}:q{ix + 1}")
        if mu is None:
            q_order = d
            degree = Fraction(1, d)
            sing = AnSing(m, d)
        else:
            shared = gcd(mu, d - 1)
            q_order = (mu // shared) * d
            degree = Fraction(1, d * mu)
            sing = AnSing(m * shared, q_order)
        new_comps.append(Component(e_id, 0))
        new_nodes.append(Node(q_id, (e_id, prev), q_order, False, sing))
        md = md.adjusted(ix, e_id, degree).adjusted(ix, prev, -degree)
        inserted.append({
            "factor": ix + 1,
            "m": m,
            "d": d,
            "mu": mu,
            "component": e_id,
            "degree": str(degree),
            "lost_by": prev,
            "smoothing_node": {"id": q_id, "stab": q_order,
                               "sing": sing.to_json_dict()},
        })
        prev = e_id
    s_id = _fresh(node_ids, f"{node_id}:S")
    new_nodes.append(Node(s_id, (un_blown, prev), node.stab_order, True, None))
    nodes = tuple(n for n in curve.nodes if n.id != node_id) + tuple(new_nodes)
    comps = curve.components + tuple(new_comps)
    curve = curve.with_changes(components=comps, nodes=nodes)
    info = {
        "node": node_id,
        "inserted": inserted,
        "persistent_node": {"id": s_id, "stab": node.stab_order},
        "totals": _totals_json(md, curve),
    }
    return curve, md, info


# ---------------------------------------------------------------------------
# Step 3: contraction of torsion components.


def contract_torsion_components(curve: TwistedCurve, md: MultiDegree):
    """Contract rational two-noded components of total degree zero.

    Repeatedly removes the first such component (in component order),
    merging its two nodes, which must carry equal stacky orders, into a
    single node whose singularity record combines the two incident
    records; missing records default to the transverse germ. Iterates to
    a fixed point. Degrees and genus are conserved.
    """
    records = []
    node_ids = {n.id for n in curve.nodes}
    while True:
        found = None
        for c in curve.components:
            if c.genus != 0 or curve.markings_on(c.id):
                continue
            incident = [n for n in curve.nodes_on(c.id) if not n.is_self_node]
            if len(incident) != 2 or curve.branch_count(c.id) != 2:
                continue
            if not is_torsion_on_component(md, c.id):
                continue
            found = (c, incident)
            break
        if found is None:
            return curve, md, records
        comp, incident = found
        u, v = sorted(incident, key=lambda n: n.id)
        if u.stab_order != v.stab_order:
            raise TorsionContractionError(
                f"torsion component {comp.id!r} has nodes {u.id!r}, {v.id!r} of "
                f"unequal stabilizer orders {u.stab_order} and {v.stab_order}")
        k = u.stab_order
        rec_u = u.singularity or AnSing(1, k)
        rec_v = v.singularity or AnSing(1, k)
        try:
            merged = contract_singularity(rec_u, rec_v, k)
        except ContractionError as exc:
            raise TorsionContractionError(
                f"torsion component {comp.id!r}: {exc}") from exc
        other_u = u.ends[0] if u.ends[1] == comp.id else u.ends[1]
        other_v = v.ends[0] if v.ends[1] == comp.id else v.ends[1]
        w_id = _fresh(node_ids, f"{u.id}+{v.id}")
        node_ids.discard(u.id)
        node_ids.discard(v.id)
        w = Node(w_id, (other_u, other_v), k, False, merged)
        curve = curve.with_changes(
            components=tuple(x for x in curve.components if x.id != comp.id),
            nodes=tuple(n for n in curve.nodes if n.id not in (u.id, v.id)) + (w,),
        )
        md = md.without_component(comp.id)
        records.append({
            "type": "contract",
            "component": comp.id,
            "nodes": [
                {"id": u.id, "stab": u.stab_order, "sing": rec_u.to_json_dict()},
                {"id": v.id, "stab": v.stab_order, "sing": rec_v.to_json_dict()},
            ],
            "merged_node": {"id": w_id, "stab": k, "ends": [other_u, other_v],
                            "sing": merged.to_json_dict()},
            "totals": _totals_json(md, curve),
        })


# ---------------------------------------------------------------------------
# The full pipeline.


def degenerate(inp: DegenerationInput) -> DegenerationOutput:
    """Run the full pipeline; see the module docstring for the passes.

    Hard failures raise: a singular gluing matrix, a torsion component
    with mismatched node orders, or a final state that is not a twisted
    map (:class:`DegenerationValidationError`, which carries the step
    log accumulated up to the failure).
    """
    inp.validate()
    curve, md = inp.curve, inp.multidegree
    input_violations = validate_twisted_map(curve, md)
    input_violations += md.denominator_violations(curve)
    if input_violations:
        raise EngineError(
            "input is not a twisted map: "
            + "; ".join(v.detail for v in input_violations))
    genus_before = arithmetic_genus(curve)
    totals_before = md.totals(curve)
    log: list = []
    gluing = _normalize_pass(curve, md, inp.gluing, inp.extra_mu, log)
    d_eff = inp.grading.d
    d_src = inp.grading.d_sources()
    for node_id in sorted(gluing):
        node = curve.node(node_id)
        g = gluing[node_id]
        vd = valuation_of_det(g)
        if vd == INFINITE:
            raise SingularMatrixError(f"gluing at node {node_id!r} is singular")
        swapped = vd < 0
        if swapped:
            g = g.inverse()
            node = Node(node.id, (node.ends[1], node.ends[0]),
                        node.stab_order, node.persistent, node.singularity)
            curve = curve.replace_node(node_id, node)
        snf = smith_normal_form(g)
        params = list(zip(snf.diag_valuations, d_eff))
        log.append({
            "type": "snf",
            "node": node_id,
            "oriented": "swapped" if swapped else "kept",
            "shift": snf.shift,
            "diag_valuations": list(snf.diag_valuations),
            "d": list(d_eff),
            "d_source": list(d_src),
            "totals": _totals_json(md, curve),
        })
        mu = _effective_mu(node, inp.extra_mu)
        curve, md, info = insert_exceptional_chain(curve, md, node_id, params, mu)
        if info is not None:
            log.append({"type": "insert", **info})
    curve, md, contractions = contract_torsion_components(curve, md)
    log.extend(contractions)
    if arithmetic_genus(curve) != genus_before:
        raise EngineError("internal invariant breach: genus not conserved")
    if md.totals(curve) != totals_before:
        raise EngineError("internal invariant breach: degree totals not conserved")
    if md.denominator_violations(curve):
        raise EngineError(
            "internal invariant breach: emitted degrees violate local order bounds")
    violations = validate_twisted_map(curve, md)
    if violations:
        raise DegenerationValidationError(violations, log)
    return DegenerationOutput(curve, md, log, [])
