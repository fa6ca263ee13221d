"""Command-line entry point.

Exit codes: 0 pass, 2 parse/config error, 3 resource cap or empty sample,
4 an inclusion claim or identity check failed, 5 target not Shannon-provable.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import formats
from .formats import FormatError, fmt_real
from .multiletter import (IDENTITY_TOL, code_joint, csiszar_check, is_zero_error, memoryless_residual,
                          single_letter_identify, telescope_check)
from .probcore import SupportCapError
from .prover import (EntropySpace, ParseError, ProverError, certify_claim1, parse_constraints,
                     parse_statement, prove_equality, prove_nonneg, statement_labels)
from .regions import MEMBERSHIP_TOL, bound1_slacks, claim_check, frontier, nj_slacks
from .schemes import (CommonScheme, build_joint, rate_point_common, rate_point_private,
                      residuals_common, residuals_private)
from .search import SearchConfig, scan_region

EXIT_OK, EXIT_PARSE, EXIT_RESOURCE, EXIT_CLAIM, EXIT_NOT_PROVABLE = 0, 2, 3, 4, 5

log = logging.getLogger("bcbound")


class UsageError(Exception):
    pass


def _cards(text: str) -> tuple[int, ...]:
    try:
        cards = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cards must be comma-separated integers, got {text!r}") from None
    if len(cards) not in (4, 5) or min(cards) < 1:
        raise argparse.ArgumentTypeError("cards must be u,v,w1,w2[,t] with positive entries")
    return cards


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _echo(args, **extra) -> dict:
    cfg = {"command": args.command, "seed": args.seed, "tol": args.tol, "jobs": args.jobs, "mode": args.mode}
    cfg.update(extra)
    print("# config " + json.dumps(cfg, sort_keys=True), file=sys.stderr)
    return cfg


def _search_config(args, common: bool) -> SearchConfig:
    d = formats.read_config_dict(args.config) if args.config else {}
    over = {"common": common}
    if common and "sweep" not in d:
        over["sweep"] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (1.0, 1.0, 1.0))
    if args.seed is not None:
        over["seed"] = args.seed
    if args.tol is not None:
        over["constraint_tol"] = args.tol
    if args.jobs is not None:
        over["jobs"] = args.jobs
    if args.cards is not None:
        over["cards"] = args.cards
    d = dict(d, **over)
    if common and len(d.get("sweep", [[0] * 3])[0]) != 3:
        raise FormatError("config: common-message scans need 3-component rate weights")
    return formats.config_from_dict(d)


# ---------------------------------------------------------------------------


def cmd_info(args) -> int:
    ch = formats.read_channel(args.channel)
    scheme = formats.read_scheme(args.scheme)
    _echo(args)
    joint = build_joint(scheme, ch)
    lines = []
    if isinstance(scheme, CommonScheme):
        res = residuals_common(joint)
        rate = rate_point_common(joint)
        slacks = nj_slacks(joint, rate, literal_mode=args.mode == "literal")
        names = ("R0", "R1", "R2")
    else:
        res = residuals_private(joint)
        rate = rate_point_private(joint)
        slacks = bound1_slacks(joint, rate)
        names = ("R1", "R2")
    for n, r in zip(names, rate):
        lines.append(f"{n:<6} {fmt_real(r)}")
    lines.append(f"residual_inf {fmt_real(res.norm_inf)}")
    lines.append("")
    lines.append("constraint,lhs,rhs,residual")
    lines += [f"{e.id},{fmt_real(e.lhs)},{fmt_real(e.rhs)},{fmt_real(e.residual)}" for e in res.entries]
    lines.append("")
    lines.append("inequality,bound,rate,slack")
    lines += [f"{e.id},{fmt_real(e.bound)},{fmt_real(e.rate)},{fmt_real(e.slack)}" for e in slacks.entries]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    ch = formats.read_channel(args.channel)
    cfg = _search_config(args, args.common)
    _echo(args, search=formats.config_to_dict(cfg))
    sample = scan_region(ch, cfg)
    print(f"# attempts {sample.attempts} feasible {len(sample.points)} failed {sample.failures}",
          file=sys.stderr)
    if not sample.points:
        return EXIT_RESOURCE
    _emit(formats.sample_to_csv(sample, cfg.common), args.out)
    if args.frontier:
        pts = frontier(sample.rates(), "hull")
        dims = ["R0", "R1", "R2"] if cfg.common else ["R1", "R2"]
        Path(args.frontier).write_text(formats.rows_to_csv(dims, [list(p) for p in pts]))
    return EXIT_OK


def _flagged_slack_diff(joint, rate) -> float:
    a = nj_slacks(joint, rate, literal_mode=False).entries
    b = nj_slacks(joint, rate, literal_mode=True).entries
    return max(abs(x.slack - y.slack) for x, y in zip(a, b))


def cmd_claim(args) -> int:
    ch = formats.read_channel(args.channel)
    common = args.which == "claim2"
    cfg = _search_config(args, common)
    t0 = time.perf_counter()
    echo = _echo(args, which=args.which, search=formats.config_to_dict(cfg))
    sample = scan_region(ch, cfg)
    if not sample.points:
        print("# no feasible points found", file=sys.stderr)
        return EXIT_RESOURCE
    literal = args.mode == "literal"
    header = (["lambda0", "lambda1", "lambda2", "R0", "R1", "R2"] if common else ["lambda1", "lambda2", "R1", "R2"])
    header += ["residual_inf", "seed", "min_slack", "argmin", "verdict"]
    if common:
        header += ["mode_dependent"]
    rows, failures = [], 0
    for p in sample.points:
        rep = claim_check(p.scheme, ch, args.which, constraint_tol=cfg.constraint_tol,
                          membership_tol=MEMBERSHIP_TOL, literal_mode=literal)
        worst = min(rep.slacks.entries, key=lambda e: e.slack)
        row = list(p.lam) + list(rep.rate) + [rep.residual_inf, p.seed, rep.slacks.min_slack, worst.id,
                                               rep.verdict]
        if common:
            diff = _flagged_slack_diff(build_joint(p.scheme, ch), rep.rate)
            row.append("yes" if diff > MEMBERSHIP_TOL else "no")
        rows.append(row)
        failures += rep.verdict != "pass"
    _emit(formats.rows_to_csv(header, rows), args.out)
    min_slack = min(r[header.index("min_slack")] for r in rows)
    print(f"# points {len(rows)} failures {failures} min_slack {fmt_real(min_slack)} "
          f"infeasible_restarts {sample.failures} seconds {time.perf_counter() - t0:.1f}", file=sys.stderr)
    if args.report:
        report = {"command": "claim", "config": echo, "seed": cfg.seed,
                  "table": {"header": header, "rows": [[fmt_real(x) if isinstance(x, float) else x for x in r]
                                                       for r in rows]},
                  "verdicts": {"points": len(rows), "failures": failures, "pass": failures == 0}}
        Path(args.report).write_text(json.dumps(report, indent=1) + "\n")
    return EXIT_OK if failures == 0 else EXIT_CLAIM


def _print_verdict(label: str, v) -> None:
    print(f"{label}: {v.status} (optimal value {fmt_real(v.value)})")
    if v.provable:
        print(f"  certificate (reconstruction error {v.reconstruction_error():.3e}):")
        for term, w in v.certificate_terms():
            print(f"    {w:+.12g} * [{term}]")
    else:
        print("  not Shannon-provable under the given constraints; witness entropy vector:")
        for term, val in v.witness_terms():
            print(f"    {term} = {val:.12g}")


def _bundled(name: str) -> str:
    return resources.files("bcbound").joinpath("data", name).read_text()


def cmd_prove(args) -> int:
    _echo(args, fixture=args.fixture, target=args.target)
    tol = args.tol if args.tol is not None else 1e-8
    if args.fixture == "claim1" and args.target is None:
        rep = certify_claim1()
        for name, rel, vs in rep.results:
            status = "ShannonProvable" if all(v.provable for v in vs) else "NotProvable"
            err = max(v.reconstruction_error() for v in vs if v.provable) if status == "ShannonProvable" else float("nan")
            print(f"{name:<14} {rel:<2} 0  {status}  certificate_error={err:.2e}")
        for label, v in (("ablation drop eq5", rep.ablation), ("ablation drop eq4+eq5", rep.pair_ablation)):
            print(f"{label:<22} {v.status}  value={fmt_real(v.value)}")
        return EXIT_OK if rep.all_provable else EXIT_NOT_PROVABLE
    if args.target is None:
        raise UsageError("a target statement is required unless --fixture is given")
    if args.constraints == "@claim1" or args.fixture == "claim1":
        text = _bundled("claim1_constraints.txt")
    elif args.constraints:
        text = Path(args.constraints).read_text()
    else:
        text = ""
    constraints = parse_constraints(text)
    rel, expr = parse_statement(args.target)
    space = EntropySpace.of(expr, *constraints, extra=statement_labels(args.target))
    if rel == "=":
        a, b = prove_equality(expr, constraints, space)
        _print_verdict(">= direction", a)
        _print_verdict("<= direction", b)
        ok = a.provable and b.provable
    else:
        v = prove_nonneg(expr, constraints, space, tol=tol)
        _print_verdict("target", v)
        ok = v.provable
    return EXIT_OK if ok else EXIT_NOT_PROVABLE


def cmd_multiletter(args) -> int:
    ch = formats.read_channel(args.channel)
    code = formats.read_code(args.code, ch.x_card, args.n)
    tol = args.tol if args.tol is not None else IDENTITY_TOL
    _echo(args, n=code.n)
    joint = code_joint(code, ch)
    results = []
    msgs = list(code.messages)
    subsets = [[m for k, m in enumerate(msgs) if mask >> k & 1] for mask in range(2 ** len(msgs))]
    for K in subsets:
        lhs, rhs = csiszar_check(joint, K)
        results.append((f"csiszar K={{{','.join(K)}}}", lhs, rhs))
    s, e = telescope_check(joint)
    results.append(("telescope", s, e))
    for i in range(1, code.n + 1):
        results.append((f"memoryless i={i}", memoryless_residual(joint, i), 0.0))
    ident = single_letter_identify(code, ch)
    for c in ident.identities:
        results.append((f"identified {c.name}", c.observed, c.predicted))
    ok = True
    print("check,observed,expected,abs_error,status")
    for name, a, b in results:
        good = abs(a - b) <= tol
        ok &= good
        print(f"{name},{fmt_real(a)},{fmt_real(b)},{abs(a - b):.3e},{'pass' if good else 'FAIL'}")
    ze = is_zero_error(code, ch)
    print(f"# zero_error receiver1={ze[0]} receiver2={ze[1]} residual_inf={fmt_real(ident.residuals.norm_inf)}")
    return EXIT_OK if ok else EXIT_CLAIM


def build_parser() -> argparse.ArgumentParser:
    glob = argparse.ArgumentParser(add_help=False)
    glob.add_argument("--seed", type=int, default=None, help="override the search seed")
    glob.add_argument("--tol", type=float, default=None, help="override the command's main tolerance")
    glob.add_argument("--jobs", type=int, default=None, help="parallel restarts")
    glob.add_argument("--mode", choices=("corrected", "literal"), default="corrected",
                      help="reading of the two ambiguous New-Jersey lines")
    glob.add_argument("--cards", type=_cards, default=None, help="auxiliary sizes u,v,w1,w2[,t]")
    glob.add_argument("--out", default=None, help="write the main table here instead of stdout")
    glob.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="bcbound", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("info", parents=[glob], help="rate terms, residuals and slacks of one scheme")
    s.add_argument("channel")
    s.add_argument("scheme")
    s.set_defaults(func=cmd_info)

    s = sub.add_parser("scan", parents=[glob], help="multistart frontier scan, CSV output")
    s.add_argument("channel")
    s.add_argument("--config")
    s.add_argument("--common", action="store_true", help="scan the common-message region")
    s.add_argument("--frontier", help="also write the convex-hull frontier CSV here")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("claim", parents=[glob], help="scan and check inclusion in the comparison region")
    s.add_argument("channel")
    s.add_argument("--config")
    s.add_argument("--which", choices=("claim1", "claim2"), default="claim1")
    s.add_argument("--report", help="write a JSON run report here")
    s.set_defaults(func=cmd_claim)

    s = sub.add_parser("prove", parents=[glob], help="Shannon-type LP prover")
    s.add_argument("target", nargs="?", help="e.g. 'I(A;C) <= I(A;B)'")
    s.add_argument("--constraints", help="file of equalities, one per line, or @claim1")
    s.add_argument("--fixture", choices=("claim1",))
    s.set_defaults(func=cmd_prove)

    s = sub.add_parser("multiletter", parents=[glob], help="finite-n converse identity checks")
    s.add_argument("code")
    s.add_argument("channel")
    s.add_argument("--n", type=int, default=None)
    s.set_defaults(func=cmd_multiletter)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FormatError, ParseError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SupportCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ProverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
