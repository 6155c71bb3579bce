"""Batch front-end: scenario ingestion, built-ins, reports and exports.

Exit codes: 0 on success, 1 for engine or validation failures, 2 for
input errors (reported with a JSON-pointer path to the offending field).
The polynomial degree cap for parsed inputs defaults to 64 and can be
overridden through the STACKYDEG_MAX_DEG environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .blowup import (
    AnSing,
    BlowupParams,
    an_blowup_step,
    mu_action_on_blowup,
    resolve_An,
    twisted_blowup,
)
from .curve import TORSION_CRITERION_NOTE
from .dvrlinalg import Mat, NonSquareMatrixError, SingularMatrixError, smith_normal_form
from .engine import (
    DegenerationInput,
    EngineError,
    DegenerationValidationError,
    degenerate,
    degeneration_input_from_json,
)
from .errors import SchemaError
from .field import DegreeCapExceeded, ParseError

BUILTIN_SCENARIOS = (
    "theta-example-1",
    "theta-example-2",
    "theta-example-3",
    "two-genus2-bridge",
)

DEFAULT_MAX_DEGREE = 64


@dataclass
class ScenarioSpec:
    name: str
    input: DegenerationInput
    out_path: str | None = None
    dot_path: str | None = None
    log_path: str | None = None


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _degree_cap() -> int | None:
    raw = os.environ.get("STACKYDEG_MAX_DEG")
    if raw is None:
        return DEFAULT_MAX_DEGREE
    try:
        cap = int(raw)
    except ValueError:
        raise SchemaError("/STACKYDEG_MAX_DEG", f"not an integer: {raw!r}")
    return cap if cap > 0 else None


# ---------------------------------------------------------------------------
# Built-in scenarios. Each expands to a full input document, so the
# standard parsing path (and its schema checks) runs on built-ins too.


def builtin_scenario(name: str, k: int = 2, d: int = 2, m: int = 1) -> dict:
    if k < 1 or d < 1 or m < 0:
        raise SchemaError("/scenario", f"invalid parameters k={k}, d={d}, m={m}")
    if name == "theta-example-1":
        # one smooth marked body, nothing persists: the identity run
        return {
            "components": [{"id": "C", "genus": 2}],
            "nodes": [],
            "markings": [{"id": "p1", "comp": "C", "gerbe": 1}],
            "multidegree": {"factors": 1, "deg": [{"C": "1"}]},
            "grading": {"d": [1]},
            "gluing": {},
        }
    if name == "theta-example-2":
        # one body with a persistent twisted self-node glued by t^m
        return {
            "components": [{"id": "C", "genus": 2}],
            "nodes": [
                {"id": "n1", "ends": ["C", "C"], "stab": k, "persistent": True},
            ],
            "markings": [],
            "multidegree": {"factors": 1, "deg": [{"C": str(Fraction(2, k))}]},
            "grading": {"d": [d]},
            "gluing": {"n1": _scalar_matrix(m)},
            "extra_mu": {"n1": k},
        }
    if name == "theta-example-3":
        # a destabilizing rational curve between two persistent twisted
        # nodes; the raw exponents (m+1, 1) exercise the normalization
        kp = k // gcd(k, d - 1)
        return {
            "components": [{"id": "C", "genus": 2}, {"id": "P", "genus": 0}],
            "nodes": [
                {"id": "n1", "ends": ["C", "P"], "stab": k, "persistent": True},
                {"id": "n2", "ends": ["C", "P"], "stab": kp * d, "persistent": True},
            ],
            "markings": [],
            "multidegree": {
                "factors": 1,
                "deg": [{
                    "C": str(Fraction(2, k) - Fraction(1, d * k)),
                    "P": str(Fraction(1, d * k)),
                }],
            },
            "grading": {"d": [d]},
            "gluing": {"n1": _scalar_matrix(m + 1), "n2": _scalar_matrix(1)},
            "extra_mu": {"n1": k},
        }
    if name == "two-genus2-bridge":
        # two genus-2 bodies joined twice; gluings 1 and t
        return {
            "components": [{"id": "C1", "genus": 2}, {"id": "C2", "genus": 2}],
            "nodes": [
                {"id": "n1", "ends": ["C1", "C2"], "stab": 1, "persistent": True},
                {"id": "n2", "ends": ["C1", "C2"], "stab": 1, "persistent": True},
            ],
            "markings": [],
            "multidegree": {"factors": 1, "deg": [{"C1": "0", "C2": "0"}]},
            "grading": {"d": [1]},
            "gluing": {"n1": _scalar_matrix(0), "n2": _scalar_matrix(1)},
        }
    raise SchemaError("/scenario", f"unknown built-in scenario {name!r}")


def _scalar_matrix(power: int) -> dict:
    entry = "1" if power == 0 else ("t" if power == 1 else f"t^{power}")
    return {"rows": 1, "cols": 1, "entries": [[entry]]}


# ---------------------------------------------------------------------------
# Running.


def run(spec: ScenarioSpec) -> int:
    """Execute one scenario and write its artifacts; returns the exit code."""
    try:
        output = degenerate(spec.input)
    except DegenerationValidationError as exc:
        report = {
            "error": str(exc),
            "log": exc.log,
            "validation": {
                "violations": [v.to_json_dict() for v in exc.violations],
                "torsion_criterion": TORSION_CRITERION_NOTE,
            },
        }
        _emit(spec.out_path, _dumps(report))
        return 1
    except (EngineError, SingularMatrixError, NonSquareMatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(spec.out_path, _dumps(output.to_json_dict()))
    if spec.dot_path:
        with open(spec.dot_path, "w", encoding="utf-8") as fh:
            fh.write(output.limit_curve.to_dot(output.limit_multidegree))
    if spec.log_path:
        with open(spec.log_path, "w", encoding="utf-8") as fh:
            fh.write(_dumps(output.log))
    return 0


def _emit(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError("/", f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"malformed JSON: {exc}")


def _cmd_degen(args) -> int:
    obj = _load_json(args.input)
    inp = degeneration_input_from_json(obj, max_degree=_degree_cap())
    return run(ScenarioSpec(args.input, inp, args.out, args.dot, args.log))


def _cmd_scenario(args) -> int:
    doc = builtin_scenario(args.name, k=args.k, d=args.d, m=args.m)
    inp = degeneration_input_from_json(doc)
    return run(ScenarioSpec(args.name, inp, args.out, args.dot, args.log))


def _cmd_snf(args) -> int:
    obj = _load_json(args.matrix)
    mat = Mat.from_json_dict(obj, "", max_degree=_degree_cap())
    result = smith_normal_form(mat)
    sys.stdout.write(_dumps(result.to_json_dict()))
    return 0


def _cmd_blowup(args) -> int:
    params = BlowupParams(args.m, args.d)
    report = {"blowup": twisted_blowup(params).to_json_dict()}
    if args.mu is not None:
        report["mu_action"] = mu_action_on_blowup(args.mu, params).to_json_dict()
    sys.stdout.write(_dumps(report))
    return 0


def _cmd_resolve(args) -> int:
    sing = AnSing(args.a, args.mu)
    steps = []
    current = sing
    while current.a >= 2:
        nxt, count = an_blowup_step(current)
        steps.append({"a_before": current.a, "a_after": nxt.a,
                      "exceptional_curves": count})
        current = nxt
    iterations, total = resolve_An(sing)
    sys.stdout.write(_dumps({
        "a": sing.a,
        "mu": sing.mu_order,
        "steps": steps,
        "iterations": iterations,
        "total_exceptional": total,
    }))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stackydeg",
        description="exact limits of twisted curves with torus gluing data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degen", help="run the pipeline on an input document")
    p.add_argument("input")
    p.add_argument("--out")
    p.add_argument("--dot")
    p.add_argument("--log")
    p.set_defaults(func=_cmd_degen)

    p = sub.add_parser("scenario", help="run a built-in scenario")
    p.add_argument("name", choices=BUILTIN_SCENARIOS)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--dot")
    p.add_argument("--log")
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("snf", help="diagonalize a matrix over the local ring")
    p.add_argument("matrix")
    p.set_defaults(func=_cmd_snf)

    p = sub.add_parser("blowup", help="numerical data of an (m, d) blow-up")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--mu", type=int, default=None)
    p.set_defaults(func=_cmd_blowup)

    p = sub.add_parser("resolve", help="resolve the germ xy = z^a by blow-ups")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--mu", type=int, default=1)
    p.set_defaults(func=_cmd_resolve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ParseError, DegreeCapExceeded) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (EngineError, SingularMatrixError, NonSquareMatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
