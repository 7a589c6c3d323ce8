"""Command-line driver.

Exit status: 0 on success, 1 when a check fails, 2 on usage errors or
malformed input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import io as sio
from .bundle import (SECTION_CAP, check_covariance, check_normalization, check_symmetry, is_rigid, is_uniform,
                     symmetry_by_conjugation)
from .construct import SOLIDS, construct_assemblages, platonic_symmetry
from .errors import InvariantViolation, SchemaMismatch, SymmetraError
from .incompat import dual_certificate, robustness
from .mub import clifford_stabilizer_rigidity, mub_assemblage, mub_symmetry_group
from .finite_field import field_of_order
from .oracle import compatibility_oracle
from .steering import flag_beats_dichotomic
from .tables import TABLES, run_table

log = logging.getLogger("symmetra")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ------------------------------------------------------------------ helpers

def _read_doc(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"not valid JSON: {exc}") from exc


def _load_assemblage(args):
    a, sym = sio.import_assemblage(_read_doc(args.assemblage), tol=args.tolerance)
    if getattr(args, "symmetry", None):
        doc = _read_doc(args.symmetry)
        group = sio.group_from_json(doc)
        sym = symmetry_by_conjugation(a, group)
    return a, sym


def _emit(args, doc: dict, text: str) -> None:
    print(sio.dumps(doc) if args.json else text)


def _fmt(x: float) -> str:
    return f"{x:.10f}" if math.isfinite(x) else str(x)


def _robustness_line(a, rep) -> str:
    tag = lambda b: "" if b == "exact" else " (lower bound)"
    return (f"{a.name or 'assemblage'}: d={a.dim} |M|={a.n_measurements} |Omega|={a.n_outcomes} "
            f"alpha*={_fmt(rep.alpha_star)}{tag(rep.alpha_bound)} beta*={_fmt(rep.beta_star)}{tag(rep.beta_bound)} "
            f"[{rep.lam.method}]")


def _method(args) -> str:
    if getattr(args, "exhaustive", False):
        return "exhaustive"
    if getattr(args, "greedy", False):
        return "greedy"
    if getattr(args, "ascent", False):
        return "ascent"
    return "auto"


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


# ----------------------------------------------------------------- commands

def cmd_construct(args) -> int:
    group = sio.load_group(args.group)
    mode, n = ("povm", args.povm) if args.povm else ("projective", None)
    res = construct_assemblages(group, mode, n)
    rows = []
    for i, c in enumerate(res.assemblages):
        rep = robustness(c.assemblage, c.symmetry, method=_method(args), cap=args.section_cap,
                         workers=args.threads, reduce_with=True, seed=_seed(args))
        rows.append({"index": i, "n_measurements": c.n_measurements, "n_outcomes": c.assemblage.n_outcomes,
                     "rank": c.generator.rank, "stabilizer_order": c.stabilizer_order,
                     "alpha_star": rep.alpha_star, "beta_star": rep.beta_star,
                     "alpha_bound": rep.alpha_bound, "beta_bound": rep.beta_bound})
        if args.output_dir:
            out = Path(args.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{Path(args.group).stem}_{mode}_{i}.json").write_text(
                sio.dumps(sio.export_assemblage(c.assemblage, c.symmetry)), encoding="utf-8")
    doc = {"group": group.name, "order": group.order, "mode": mode, "n": n, "assemblages": rows,
           "rejected": [{"reason": r, **info} for r, info in res.rejected]}
    lines = [f"{group.name} (order {group.order}), {mode}{'' if n is None else f' n={n}'}:"]
    for r in rows:
        lines.append(f"  [{r['index']}] |M|={r['n_measurements']} rank={r['rank']} stab={r['stabilizer_order']} "
                     f"alpha*={_fmt(r['alpha_star'])} beta*={_fmt(r['beta_star'])}")
    lines.append(f"  rejected candidates: {len(res.rejected)}")
    _emit(args, doc, "\n".join(lines))
    return 0


def cmd_mub(args) -> int:
    d = args.dimension
    if args.verify_symmetry:
        return _verify_mub(args, d)
    if args.symmetry:
        a, sym = mub_symmetry_group(d)
    else:
        a, sym = mub_assemblage(d), None
    print(sio.dumps(sio.export_assemblage(a, sym)))
    return 0


def _verify_mub(args, d: int) -> int:
    f = field_of_order(d)
    checks = {}
    if f.p % 2:
        a, sym = mub_symmetry_group(f)
        checks["group_order"] = sym.group.order
        checks["covariance"] = check_covariance(a.bundle, sym.outcome_action)[0]
        checks["symmetry"] = check_symmetry(a, sym, args.tolerance)[0]
        checks["uniform"] = is_uniform(sym)
        checks["rigid"] = is_rigid(a, sym).rigid
    else:
        checks["clifford_stabilizer_rigid"] = clifford_stabilizer_rigidity(f.n)
    ok = all(v for k, v in checks.items() if isinstance(v, bool))
    text = "\n".join(f"{k}: {'PASS' if v is True else 'FAIL' if v is False else v}" for k, v in checks.items())
    _emit(args, {"dimension": d, "checks": checks, "passed": ok}, text)
    return 0 if ok else 1


def cmd_analyze(args) -> int:
    a, sym = _load_assemblage(args)
    rep = robustness(a, sym, method=_method(args), cap=args.section_cap, workers=args.threads,
                     reduce_with=True, seed=_seed(args))
    doc = {"report": rep.to_dict()}
    lines = [_robustness_line(a, rep)]
    if rep.formula_certified is None:
        lines.append("  no symmetry data: closed forms assume a uniform rigid symmetry")
    lines += [f"  note: {n}" for n in rep.notes]
    status = 0
    if args.oracle is not None:
        res = compatibility_oracle(a, args.oracle, args.kind, sym)
        doc["oracle"] = res.to_dict()
        lines.append(f"  oracle at eta={args.oracle} ({args.kind}): {res.verdict} "
                     f"after {res.iterations} iterations (residual {res.residual:.2e})")
        if res.verdict == "inconclusive":
            status = 1
    if args.certificate:
        try:
            cert = dual_certificate(a, rep, args.kind, cap=args.section_cap, reduce_with=sym)
            doc["certificate"] = cert.to_dict()
            lines.append(f"  certificate ({args.kind}): feasible, upper bound {_fmt(cert.upper_bound)}")
        except SymmetraError as exc:
            doc["certificate"] = {"feasible": False, "error": str(exc)}
            lines.append(f"  certificate ({args.kind}): {exc}")
            status = 1
    _emit(args, doc, "\n".join(lines))
    return status


def cmd_steer(args) -> int:
    a, sym = _load_assemblage(args)
    rep = robustness(a, sym, method=_method(args), cap=args.section_cap, workers=args.threads,
                     reduce_with=True, seed=_seed(args))
    st = flag_beats_dichotomic(rep, a.dim)
    text = (f"isotropic threshold {_fmt(st.isotropic)} (two-outcome bound {_fmt(st.dichotomic_iso)})\n"
            f"Werner threshold    {_fmt(st.werner)} (two-outcome bound {_fmt(st.dichotomic_wer)})\n"
            f"beats two-outcome measurements: isotropic={st.beats_dichotomic_iso} Werner={st.beats_dichotomic_wer} "
            f"[{st.status}]{' ‡' if st.dagger else ''}")
    _emit(args, st.to_dict(), text)
    return 0


def cmd_table(args) -> int:
    rows = run_table(args.name, args.dimension, args.max_d, args.section_cap, args.threads, _seed(args))
    docs = [r.to_dict() for r in rows]
    lines = []
    for r in rows:
        s = r.spec
        head = f"{s.table} d={s.d} {s.group} |M|={s.n_measurements}" + (f" n={s.n_outcomes}" if s.n_outcomes else "")
        exp = f"expected {s.alpha.relation}{s.alpha.value:.6f} / {s.beta.relation}{s.beta.value:.6f}"
        comp = "; ".join(f"{c['alpha']:.6f} / {c['beta']:.6f}" + (" ‡" if c["dagger"] else "") for c in r.computed)
        lines.append(f"{r.status.upper():12s} {head}: {exp}; computed {comp or '-'} {r.note}".rstrip())
    _emit(args, {"rows": docs}, "\n".join(lines))
    return 1 if any(r.status == "mismatch" for r in rows) else 0


def cmd_export(args) -> int:
    if args.platonic:
        a, sym = platonic_symmetry(args.platonic)
    elif args.mub:
        a, sym = mub_symmetry_group(args.mub) if args.symmetry else (mub_assemblage(args.mub), None)
    else:
        mode, n = ("povm", args.povm) if args.povm else ("projective", None)
        res = construct_assemblages(sio.load_group(args.group), mode, n)
        if not 0 <= args.index < len(res.assemblages):
            raise UsageError(f"--index must be in 0..{len(res.assemblages) - 1}")
        c = res.assemblages[args.index]
        a, sym = c.assemblage, c.symmetry
    print(sio.dumps(sio.export_assemblage(a, sym if args.symmetry else None)))
    return 0


def cmd_verify(args) -> int:
    a, sym = _load_assemblage(args)
    tol = args.tolerance
    checks = {"normalisation": check_normalization(a, tol)[0], "positive": a.min_effect_eigenvalue() >= -tol}
    if sym is not None:
        checks["covariance"] = check_covariance(a.bundle, sym.outcome_action)[0]
        checks["symmetry"] = check_symmetry(a, sym, tol)[0]
        checks["uniform"] = is_uniform(sym)
        checks["rigid"] = is_rigid(a, sym).rigid
    ok = all(checks.values())
    text = "\n".join(f"{k}: {'PASS' if v else 'FAIL'}" for k, v in checks.items())
    _emit(args, {"checks": checks, "passed": ok}, text)
    return 0 if ok else 1


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    def add_common(parser, top: bool):
        # subcommands repeat the flags without defaults so they never clobber top-level values
        dflt = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
        parser.add_argument("--json", action="store_true", default=dflt(False), help="machine-readable output")
        parser.add_argument("--tolerance", type=float, default=dflt(1e-9), help="tolerance for checks (default 1e-9)")
        parser.add_argument("--section-cap", type=int, default=dflt(SECTION_CAP), help="largest exhaustive section scan")
        parser.add_argument("--threads", type=int, default=dflt(1), help="worker threads for section scans")
        parser.add_argument("--seed", type=int, default=dflt(None), help="seed for the random ascent starts (default 0)")
        parser.add_argument("-v", "--verbose", action="store_true", default=dflt(False))
        return parser

    common = add_common(_Parser(add_help=False), top=False)

    p = add_common(_Parser(prog="symmetra",
                           description="Symmetric measurement assemblages and their incompatibility robustness."), top=True)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def method_flags(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--exhaustive", action="store_true", help="scan every section")
        g.add_argument("--greedy", action="store_true", help="greedy sections (lower bounds)")
        g.add_argument("--ascent", action="store_true", help="greedy plus eigenvector ascent (lower bounds)")

    sp = sub.add_parser("construct", parents=[common], help="build assemblages from a group")
    sp.add_argument("--group", required=True, help="shipped group key (e.g. st25) or a group JSON file")
    sp.add_argument("--povm", type=int, metavar="N", help="rank-one POVMs with N outcomes instead of projective")
    sp.add_argument("--output-dir", help="write each assemblage as JSON into this directory")
    method_flags(sp)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("mub", parents=[common], help="the standard complete set of MUBs")
    sp.add_argument("--dimension", "-d", type=int, required=True)
    sp.add_argument("--verify-symmetry", action="store_true", help="run the symmetry verification suite")
    sp.add_argument("--symmetry", action="store_true", help="embed the affine symplectic symmetry (odd d)")
    sp.set_defaults(func=cmd_mub)

    sp = sub.add_parser("analyze", parents=[common], help="robustness of an assemblage file")
    sp.add_argument("--assemblage", default="-", help="assemblage JSON file, '-' for stdin")
    sp.add_argument("--symmetry", help="group JSON file; the action is found by conjugation")
    sp.add_argument("--oracle", type=float, metavar="ETA", help="run the compatibility oracle at this noise level")
    sp.add_argument("--certificate", action="store_true", help="check the closed-form dual certificate")
    sp.add_argument("--kind", choices=["white", "complement"], default="white")
    method_flags(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("steer", parents=[common], help="steering thresholds of an assemblage file")
    sp.add_argument("--assemblage", default="-")
    sp.add_argument("--symmetry")
    method_flags(sp)
    sp.set_defaults(func=cmd_steer)

    sp = sub.add_parser("table", parents=[common], help="recompute reference table rows")
    sp.add_argument("--name", choices=sorted(TABLES), required=True)
    sp.add_argument("--dimension", "-d", type=int)
    sp.add_argument("--max-d", type=int)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("export", parents=[common], help="write an assemblage as JSON")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--platonic", choices=SOLIDS)
    src.add_argument("--mub", type=int, metavar="D")
    src.add_argument("--group")
    sp.add_argument("--index", type=int, default=0, help="which constructed assemblage (with --group)")
    sp.add_argument("--povm", type=int, metavar="N")
    sp.add_argument("--symmetry", action="store_true", help="include symmetry data")
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("verify", parents=[common], help="check normalisation and symmetry of an assemblage file")
    sp.add_argument("--assemblage", default="-")
    sp.add_argument("--symmetry")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"symmetra: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"symmetra: error: {exc}", file=sys.stderr)
        return 2
    except (SchemaMismatch, FileNotFoundError, UnicodeDecodeError) as exc:
        print(f"symmetra: bad input: {exc}", file=sys.stderr)
        return 2
    except (InvariantViolation, SymmetraError) as exc:
        print(f"symmetra: check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
