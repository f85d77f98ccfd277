"""Command-line interface.

Exit codes: 0 when a result was produced, 2 when the input is invalid, 3 when
a resource cap (policy enumeration, simplex iterations) was hit.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import lp as lpmod
from .abstraction import InitNotOnFacet, InvalidPphs, Pphs, abstract, verify
from .casestudy import switched_system
from .chain import DEFAULT_POLICY_CAP, EnumerationTooLarge, decide_as_convergence
from .harness import oracle_max_mean_payoff, simulate_chain, simulate_pphs
from .io import ParseError, Report, SchemaError, ValidationError, dumps, encode_value, parse_model
from .mdp import Wmdp, induce
from .meanpayoff import analyze

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAP = 3


class _Usage(ValueError):
    pass


def _load(path: str, kind: type | None = None):
    model = parse_model(path)
    if kind is not None and not isinstance(model, kind):
        want = "wmdp" if kind is Wmdp else "pphs"
        raise _Usage(f"{path}: expected a {want} model")
    return model


def _verify_report(H: Pphs, workers: int | None) -> Report:
    res = verify(H, workers)
    ab = res.abstraction
    return Report(
        verdict=res.verdict.value,
        max_mean_payoff=res.analysis.value,
        diagnostics=list(ab.diagnostics) + ([res.analysis.reason] if res.analysis.reason else []),
        timings={"T_red": res.t_red, "T_stab": res.t_stab},
        details={"abstract_states": ab.wmdp.n_states, "abstract_edges": ab.n_edges,
                 "edge_lps": sum(ab.lp_counts)},
    )


def cmd_analyze(args) -> Report:
    m = _load(args.model, Wmdp)
    t0 = time.perf_counter()
    res = analyze(m)
    return Report(res.verdict.value, res.value, [res.reason] if res.reason else [],
                  {"T_stab": time.perf_counter() - t0},
                  {"mecs": len(res.mecs), "bias_c": res.bias_c})


def cmd_as_check(args) -> Report:
    m = _load(args.model, Wmdp)
    dec = decide_as_convergence(m, args.policy_cap)
    details = {"policies_checked": dec.policies_checked}
    diags = []
    if dec.witness is not None:
        details["witness_policy"] = list(dec.witness.policy)
        details["witness_bscc"] = sorted(dec.witness.bscc)
        details["witness_weight"] = encode_value(dec.witness.weight)
        diags.append("a memoryless policy reaches a bottom component with nonnegative weight")
    return Report("Yes" if dec.convergent else "No", None, diags, {}, details)


def cmd_abstract(args) -> Report:
    H = _load(args.model, Pphs)
    ab = abstract(H, args.threads)
    info = [{"loc": q, "facet": [f.owner, f.index]} for q, f in ab.states]
    text = dumps(ab.wmdp, states_info=info)
    details = {"abstract_states": ab.wmdp.n_states, "abstract_edges": ab.n_edges,
               "edge_lps": sum(ab.lp_counts)}
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
        details["written"] = args.output
    else:
        details["wmdp"] = __import__("json").loads(text)
    return Report(None, None, list(ab.diagnostics), {"T_red": ab.seconds}, details)


def cmd_verify(args) -> Report:
    return _verify_report(_load(args.model, Pphs), args.threads)


def cmd_simulate(args) -> Report:
    model = _load(args.model)
    if isinstance(model, Wmdp):
        if args.policy:
            rho = [int(v) for v in args.policy.split(",")]
            if len(rho) != model.n_states:
                raise _Usage(f"--policy needs {model.n_states} comma-separated action indices")
        else:
            rho = [0] * model.n_states
        rep = simulate_chain(induce(model, rho), args.horizon, args.runs, args.seed)
    else:
        rep = simulate_pphs(model, args.horizon, args.runs, args.seed)
    d = rep.to_dict()
    return Report(None, None, [], {}, {k: v for k, v in d.items()})


def cmd_oracle(args) -> Report:
    m = _load(args.model, Wmdp)
    t0 = time.perf_counter()
    v = oracle_max_mean_payoff(m, args.policy_cap)
    verdict = "Stable" if v < -1e-9 else "Unknown"
    return Report(verdict, v, [], {"T_oracle": time.perf_counter() - t0}, {})


def cmd_casestudy(args) -> Report:
    offset = None if args.offset is None else np.deg2rad(args.offset)
    H = switched_system(args.sectors, offset=offset)
    if args.output:
        Path(args.output).write_text(dumps(H) + "\n", encoding="utf-8")
    rep = _verify_report(H, args.threads)
    rep.details = {"sectors": args.sectors, "locations": len(H.locations), **rep.details}
    if args.output:
        rep.details["written"] = args.output
    return rep


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--lp-tolerance", type=float, default=None,
                        help="feasibility/optimality tolerance of the simplex solver")
    common.add_argument("--policy-cap", type=int, default=DEFAULT_POLICY_CAP,
                        help="maximum number of memoryless policies to enumerate")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for edge LPs (default: $PPHS_THREADS or 1)")

    p = argparse.ArgumentParser(prog="pphs-stability",
                                description="Stability verification of polyhedral probabilistic hybrid systems.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", parents=[common], help="maximum expected mean payoff of a WMDP")
    s.add_argument("model")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("as-check", parents=[common], help="almost-sure convergence by policy enumeration")
    s.add_argument("model")
    s.set_defaults(func=cmd_as_check)

    s = sub.add_parser("abstract", parents=[common], help="abstract a PPHS to a WMDP")
    s.add_argument("model")
    s.add_argument("-o", "--output", help="write the abstract WMDP here")
    s.set_defaults(func=cmd_abstract)

    s = sub.add_parser("verify", parents=[common], help="abstract a PPHS and analyse the abstraction")
    s.add_argument("model")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo partial mean payoffs")
    s.add_argument("model")
    s.add_argument("--horizon", type=int, default=10_000)
    s.add_argument("--runs", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--policy", help="WMDP only: comma-separated action index per state")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("oracle", parents=[common], help="brute-force maximum mean payoff of a WMDP")
    s.add_argument("model")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("casestudy", parents=[common], help="regenerate and verify a case study")
    s.add_argument("system", choices=["switched"])
    s.add_argument("--sectors", type=int, choices=[4, 8, 16], required=True)
    s.add_argument("--offset", type=float, default=None,
                   help="angle of the first sector boundary in degrees (default: -180/sectors)")
    s.add_argument("-o", "--output", help="also write the generated PPHS here")
    s.set_defaults(func=cmd_casestudy)
    return p


def run_cli(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.lp_tolerance is not None:
        try:
            lpmod.set_tolerance(args.lp_tolerance)
        except ValueError as exc:
            print(f"error: {exc}", file=err)
            return EXIT_INVALID
    try:
        report = args.func(args)
    except (ParseError, SchemaError, ValidationError, InvalidPphs, InitNotOnFacet, _Usage,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INVALID
    except (EnumerationTooLarge, lpmod.NumericalFailure) as exc:
        print(f"error: resource limit: {exc}", file=err)
        return EXIT_CAP
    print(report.to_json() if args.json else report.to_text(), file=out)
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())
