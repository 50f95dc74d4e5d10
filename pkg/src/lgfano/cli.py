"""Command-line front end: ``lgfano <subcommand> <problem> [flags]``.

A problem is a JSON file (or the name of a bundled fixture) with keys
``weights``, ``degree`` and optionally ``monomials``, ``generators`` (phase
vectors such as "1/2,1/2,0"), ``broad_overrides`` ({sector key: {charge: dim}})
and ``options``.  Reports are JSON with a schema version, the input hash and
the option set.

Exit codes: 0 ok, 1 invalid input, 2 verification failure, 3 precision failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema
import mpmath

from . import asymptotics as asy
from .diagram import all_diagrams, render
from .geometry import InvalidInput, SymmetryGroup, WeightSystem, narrow_set, parse_phase_vector
from .ifunctions import fjrw_big_i, fjrw_small_i, gw_small_i, lg_q_form
from .mirror import extract_j, read_invariants
from .picardfuchs import (annihilation_report, build_pf, formal_monodromy, gw_frontier, lg_frontier,
                          massive_residual, massive_solutions, reference_delpezzo_recursion, recursion_ratio,
                          solution_audit)
from .statespace import BroadDataUnavailable, verify_correspondence

SCHEMA_VERSION = 1

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["weights", "degree"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "weights": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "degree": {"type": "integer", "minimum": 1},
        "monomials": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "generators": {"type": "array", "items": {"type": "string"}},
        "broad_overrides": {"type": "object", "additionalProperties": {
            "type": "object", "additionalProperties": {"type": "integer", "minimum": 0}}},
        "options": {"type": "object"},
    },
}


class VerificationFailure(RuntimeError):
    pass


class Problem:
    def __init__(self, data: Dict[str, Any], source: str):
        try:
            jsonschema.validate(data, PROBLEM_SCHEMA)
        except jsonschema.ValidationError as e:
            raise InvalidInput(f"problem file: {e.message}") from None
        self.data = data
        self.source = source
        self.name = data.get("name", Path(source).stem)
        mons = data.get("monomials")
        self.ws = WeightSystem(tuple(data["weights"]), data["degree"],
                               tuple(tuple(r) for r in mons) if mons else None)
        gens = []
        for g in data.get("generators", []):
            try:
                gens.append(parse_phase_vector(g))
            except (ValueError, ZeroDivisionError) as e:
                raise InvalidInput(f"bad generator {g!r}: {e}") from None
        self.G = SymmetryGroup(self.ws, gens)
        self.overrides = data.get("broad_overrides")
        self.options = data.get("options", {})

    @property
    def digest(self) -> str:
        canon = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def fixture_names() -> List[str]:
    return sorted(p.name[:-5] for p in resources.files("lgfano.fixtures").iterdir() if p.name.endswith(".json"))


def load_problem(name: str) -> Problem:
    path = Path(name)
    if path.exists():
        text, src = path.read_text(), str(path)
    elif name in fixture_names():
        text, src = (resources.files("lgfano.fixtures") / f"{name}.json").read_text(), name
    else:
        raise InvalidInput(f"no problem file or fixture named {name!r}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInput(f"problem file is not valid JSON: {e}") from None
    return Problem(data, src)


# ---------------------------------------------------------------------------
# subcommands: each returns (result dict, ok flag)

def cmd_statespace(pb: Problem, args):
    rep = verify_correspondence(pb.ws, pb.G, pb.overrides, raise_on_mismatch=False)
    return rep.to_json(), rep.ok


def cmd_diagram(pb: Problem, args):
    dgs = all_diagrams(pb.ws, pb.G)
    r = pb.ws.r
    ok = sum(d.n_internal - d.n_empty for d in dgs) == (len(pb.G) // pb.ws.degree) * r
    return {"diagrams": [d.to_json() for d in dgs]}, ok


def cmd_ifunction(pb: Problem, args):
    out = {}
    ws = pb.ws
    if args.side in ("gw", "both"):
        ptr = None
        if args.p_trunc is not None:
            from .ifunctions import gw_n_values
            ptr = {(-n) % 1: args.p_trunc for n in gw_n_values(ws, 1)}
        out["gw"] = gw_small_i(ws, args.order, z="formal", p_trunc=ptr).to_json()
    if args.side in ("fjrw", "both"):
        out["fjrw"] = fjrw_small_i(ws, args.order, convention=args.exponent_convention,
                                   allow_non_gorenstein=True).to_json()
    return out, True


def _pf_checks(ws: WeightSystem, order: int):
    op = build_pf(ws, "q")
    opz = build_pf(ws, "q", z=True)
    gw = annihilation_report(opz, gw_small_i(ws, order), gw_frontier(ws, order, opz))
    res = {"operator": str(op), "gw": gw.to_json()}
    ok = gw.interior_zero
    if ws.kappa < 0:
        lg = annihilation_report(op, lg_q_form(ws, order), lg_frontier(ws, order, op))
        res["lg"] = lg.to_json()
        ok = ok and lg.interior_zero
    return res, ok


def cmd_pf_check(pb: Problem, args):
    return _pf_checks(pb.ws, args.order)


def _massive(ws: WeightSystem, terms: int, prec: int):
    sols = massive_solutions(ws, terms=terms, prec=prec)
    s0 = sols[0]
    resid = massive_residual(ws, s0)
    zero_upto = len(s0.scaled_coeffs) - 1
    ok = all(x == 0 for x in resid[:zero_upto + 1])
    out = {"solutions": [s.to_json() for s in sols], "residual_zero_to_index": zero_upto,
           "monodromy": formal_monodromy(ws, prec).to_json(), "audit": solution_audit(ws).to_json()}
    if ws.weights == (1, 1, 1, 1) and ws.degree == 3:
        ratio = recursion_ratio(reference_delpezzo_recursion(), s0.recursion.in_a())
        out["reference_recursion_ratio"] = None if ratio is None else str(ratio)
        ok = ok and ratio is not None and s0.coefficients[1] == Fraction(7, 243)
    return out, ok


def cmd_massive(pb: Problem, args):
    return _massive(pb.ws, args.terms, args.precision)


def cmd_mirror_j(pb: Problem, args):
    ws = pb.ws
    big = fjrw_big_i(ws, args.order)
    res = extract_j(big, args.order, ws=ws)
    read_invariants(res, ws)
    return res.to_json(), True


def _ray(args):
    return None if args.ray is None else mpmath.mpf(args.ray) * mpmath.pi / 180


def _profile(reg, ws, args):
    th = _ray(args)
    if th is None:
        return None
    return asy.LaplaceProfile(th, reg.radius / 2, None, reg.prec)


def cmd_asymptotics(pb: Problem, args):
    ws = pb.ws
    prec = args.precision
    out: Dict[str, Any] = {}
    ok = True
    samples = []
    with mpmath.workprec(prec):
        if ws.kappa < 0:
            reg = asy.regularize_fano(ws, args.terms, prec)
            cont = asy.continue_ode(reg, ws, _profile(reg, ws, args))
            out["regularized"] = reg.to_json()
            out["ray_degrees"] = mpmath.nstr(cont.profile.theta * 180 / mpmath.pi, 10)
            out["overlap"] = mpmath.nstr(asy.overlap_check(reg, ws, cont.profile), 5)
            w = asy.watson_check(reg, ws, cont=cont)
            out["watson"] = w
            cm = asy.collapse_map_fano(ws, prec=max(prec, 300))
            out["collapse_map"] = cm.to_json()
            ok = w["ok"] and cm.rank == len(narrow_set(ws)) and cm.residual < mpmath.mpf(10) ** -6
            for u in (10, 20, 40):
                lv = asy.laplace(reg, ws, u=u, cont=cont)
                samples.append((u, lv.values))
            if all(x == 1 for x in ws.weights) and ws.degree < ws.N:
                out["steepest"] = asy.steepest_leading(ws, prec=max(prec, 300))
        elif ws.kappa > 0:
            out["ratio_test"] = {k: v[-3:] for k, v in asy.fjrw_ratio_test(ws).items()}
            out["monodromy_phases"] = {str(k): str(v) for k, v in asy.fjrw_monodromy_phases(ws).items()}
            cm = asy.collapse_map_gt(ws, prec=prec)
            out["collapse_map"] = cm.to_json()
            ok = cm.residual < mpmath.mpf(10) ** -4
        else:
            raise InvalidInput("asymptotic correspondence needs kappa != 0")
    out["_samples"] = [[mpmath.nstr(u, 10)] + [mpmath.nstr(v, 25) for v in vals] for u, vals in samples]
    return out, ok


def cmd_verify_all(pb: Problem, args):
    ws = pb.ws
    checks: Dict[str, Any] = {}
    ok = True

    def run(name, fn):
        nonlocal ok
        try:
            res, good = fn()
        except BroadDataUnavailable as e:
            res, good = {"skipped": str(e)}, True
        checks[name] = {"ok": good, "result": res}
        ok = ok and good

    run("statespace", lambda: cmd_statespace(pb, args))
    run("diagram", lambda: cmd_diagram(pb, args))
    if ws.kappa != 0:
        run("pf-check", lambda: _pf_checks(ws, args.order))
    if ws.kappa < 0:
        run("massive", lambda: _massive(ws, args.terms, args.precision))
    if ws.gorenstein and len(narrow_set(ws)) <= 3 and ws.kappa != 0:
        run("mirror-j", lambda: cmd_mirror_j(pb, argparse.Namespace(order=min(args.order, 6))))
    if args.numeric and ws.kappa != 0:
        run("asymptotics", lambda: cmd_asymptotics(pb, args))
    return {"checks": checks}, ok


COMMANDS = {
    "statespace": cmd_statespace,
    "diagram": cmd_diagram,
    "ifunction": cmd_ifunction,
    "pf-check": cmd_pf_check,
    "massive": cmd_massive,
    "mirror-j": cmd_mirror_j,
    "asymptotics": cmd_asymptotics,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lgfano", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("problem", help="problem JSON file or fixture name (" + ", ".join(fixture_names()) + ")")
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--precision", type=int, default=200, help="binary precision (bits)")
    p.add_argument("--ray", type=float, default=None, help="integration ray angle in degrees")
    p.add_argument("--format", choices=["json", "text", "svg", "csv"], default="json")
    p.add_argument("--p-trunc", type=int, default=None)
    p.add_argument("--exponent-convention", choices=["big", "small"], default="small")
    p.add_argument("--terms", type=int, default=20)
    p.add_argument("--side", choices=["gw", "fjrw", "both"], default="both")
    p.add_argument("--numeric", action="store_true", help="verify-all: include the numeric asymptotic checks")
    p.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")
    return p


def _options(args) -> Dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "problem", "output")}


def _emit(text: str, args):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _as_text(command: str, result: Dict[str, Any]) -> str:
    if command == "statespace":
        lines = ["n  CR  FJRW"]
        cr, lg = result["cr"]["graded_dims"], result["fjrw"]["graded_dims"]
        for n in sorted({*cr, *lg}, key=int):
            lines.append(f"{n:>2} {cr.get(n, 0):>3} {lg.get(n, 0):>5}")
        lines.append(f"ledger {result['ledger']}  ok={result['ok']}")
        return "\n".join(lines) + "\n"
    return json.dumps(result, indent=2, sort_keys=True) + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        pb = load_problem(args.problem)
        if args.command == "diagram" and args.format in ("text", "svg"):
            _emit("".join(render(d, args.format).decode() for d in all_diagrams(pb.ws, pb.G)), args)
            return 0
        result, ok = COMMANDS[args.command](pb, args)
    except InvalidInput as e:
        sys.stderr.write(f"invalid input: {e}\n")
        return 1
    except asy.PrecisionFailure as e:
        sys.stderr.write(f"precision failure: {e}\n")
        return 3
    except (AssertionError, VerificationFailure, ArithmeticError) as e:
        sys.stderr.write(f"verification failure: {e}\n")
        return 2
    samples = result.pop("_samples", None)
    if args.format == "csv" and samples is not None:
        buf = io.StringIO()
        csv.writer(buf).writerows(samples)
        _emit(buf.getvalue(), args)
    elif args.format == "text":
        _emit(_as_text(args.command, result), args)
    else:
        report = {"schema_version": SCHEMA_VERSION, "command": args.command, "problem": pb.name,
                  "input_hash": pb.digest, "options": _options(args), "ok": ok, "result": result}
        _emit(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n", args)
    if not ok:
        sys.stderr.write("verification failure\n")
        return 2
    return 0
