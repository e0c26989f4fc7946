"""Command-line front end: metric evaluation, verification campaigns, searches and special functions.

Exit codes: 0 all checks pass, 1 a violation was found, 2 usage or domain
error, 3 no violation but a convergence flag was not reached.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import bounds as B
from .geometry import DOMAIN_TYPES, DomainError, PairSampler, ParameterError, UnitBall, make_domain
from .metrics import METRIC_TAGS, MetricId, s_metric
from .search import (
    RadialStretch,
    conformal_distortion_check,
    conformal_factors,
    conjecture_scan,
    quasiregular_check,
)
from .specfun import ell_K, gamma2, lambda2_estimate

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CONVERGENCE = 0, 1, 2, 3
QUASI_TOL = 1e-6
SPECIAL_BOUNDS = ("cor3.4", "cor5.3", "thm5.6", "cor5.7")
DISK_BOUNDS = ("cor5.3", "thm5.6", "cor5.7")
TABLE_COLUMNS = ("bound_id", "alpha", "lower_const", "upper_const", "worst_lower_margin",
                 "worst_upper_margin", "empirical_max_quotient", "pass")


class UsageError(Exception):
    pass


# -- argument helpers -------------------------------------------------------------------


def float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def complex_list(text):
    try:
        return [complex(v.strip().replace("i", "j")) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated complex numbers, got {text!r}") from None


def point(text):
    return float_list(text)


def _domain_from_args(args):
    params = {}
    if args.domain == "punctured" and args.punctures:
        params["punctures"] = tuple(tuple(float_list(p)) for p in args.punctures.split(";"))
    if args.domain == "strip" and args.half_width is not None:
        params["half_width"] = args.half_width
    if args.domain == "boxminusball":
        if args.half_side is not None:
            params["half_side"] = args.half_side
        if args.radius is not None:
            params["radius"] = args.radius
    return make_domain(args.domain, args.dim, **params)


def _alphas(args):
    if getattr(args, "alphas", None):
        return args.alphas
    return [args.alpha if args.alpha is not None else 4.0]


# -- numeric hygiene for reports --------------------------------------------------------


def clean(obj):
    """Round floats to 15 significant digits and make the structure JSON-safe."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex):
        return [clean(obj.real), clean(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.15g}")
    return obj


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.15g}"
    return str(v)


# -- subcommands --------------------------------------------------------------------------


def cmd_eval(args):
    d = _domain_from_args(args)
    m = MetricId(args.metric, args.alpha if args.metric == "gpp" else None)
    if m.tag == "gpp" and m.alpha is None:
        raise UsageError("--metric gpp needs --alpha")
    if m.tag == "s":
        v = s_metric(d, args.x, args.y, mode=args.s_mode)
    else:
        v = m.evaluate(d, args.x, args.y)
    print(fmt(float(v)))
    return EXIT_OK, None


def _quasi_entry(d, alpha, args):
    sampler = PairSampler(d, seed=args.seed, count=args.samples)
    r = B.estimate_quasimetric_constant(d, alpha, sampler, refine=args.refine, starts=args.starts)
    chain = r.extra["proof_chain_constant"]
    entry = {
        "bound_id": "cor3.4",
        "alpha": alpha,
        "samples": r.extra["samples"],
        "estimate": r.best_value,
        "stated_constant": r.extra["stated_constant"],
        "proof_chain_constant": chain,
        "discrepancy": r.extra["discrepancy"],
        "lower_const": 1.0,
        "upper_const": chain,
        "worst_lower_margin": r.best_value - 1.0,
        "worst_upper_margin": chain - r.best_value,
        "max_quotient": r.best_value,
        "witness": r.witness.get("points"),
        "evaluations": r.evaluations,
        "converged": r.converged,
        "tol": QUASI_TOL,
        "passed": bool(r.best_value <= chain + QUASI_TOL),
        "notes": [r.extra["note"]] if "note" in r.extra else [],
    }
    if entry["stated_constant"] < 1.0:
        entry["notes"].append("printed constant is below 1, impossible for a quasi-metric constant")
    return entry


def _report_entry(rep, **extra):
    out = rep.to_dict()
    out.update(extra)
    return out


def cmd_verify(args):
    d = _domain_from_args(args)
    known = [b.id for b in B.catalog()] + list(SPECIAL_BOUNDS)
    if args.all:
        ids = known
    elif args.bound:
        ids = [i for group in args.bound for i in group.split(",") if i]
        bad = [i for i in ids if i not in known]
        if bad:
            raise UsageError(f"unknown bound id(s) {bad}; choose from {known}")
    else:
        raise UsageError("give --bound ID or --all")
    alphas = _alphas(args)
    reports, skipped = [], []
    disk = isinstance(d, UnitBall) and d.n == 2
    lam = None
    for bid in ids:
        if bid in DISK_BOUNDS and not disk:
            skipped.append({"bound_id": bid, "reason": "needs the unit disk (--domain ball --dim 2)"})
            continue
        for alpha in alphas:
            sampler = PairSampler(d, seed=args.seed, count=args.samples)
            if bid == "cor3.4":
                reports.append(_quasi_entry(d, alpha, args))
            elif bid == "cor5.3":
                for a in args.a:
                    rep = conformal_distortion_check(alpha, a, sampler, args.tol)
                    reports.append(_report_entry(rep, a=a, passed=rep.passed))
            elif bid in ("thm5.6", "cor5.7"):
                if lam is None:
                    est = lambda2_estimate()
                    lam = est.lambda2
                for K in args.K:
                    rep = quasiregular_check(RadialStretch(K), alpha, sampler, lam, args.tol)[bid]
                    extra = {"K": K, "lambda2": lam, "passed": rep.passed}
                    if bid == "cor5.7" and K == 1:
                        extra["conformal_upper_factor"] = conformal_factors(alpha)[1]
                    reports.append(_report_entry(rep, **extra))
            else:
                b = B.get_bound(bid)
                try:
                    rep = B.verify_bound(b, d, alpha, sampler, args.tol, beta=args.beta)
                except B.ApplicabilityError as exc:
                    skipped.append({"bound_id": bid, "alpha": alpha, "reason": str(exc)})
                    continue
                extra = {"passed": rep.passed, "citation": b.citation}
                if b.note:
                    extra["record_note"] = b.note
                reports.append(_report_entry(rep, **extra))
    body = {"reports": reports, "skipped": skipped, "alphas": alphas, "samples": args.samples}
    if any(not r["passed"] for r in reports):
        code = EXIT_VIOLATION
    elif any(r.get("converged") is False for r in reports):
        code = EXIT_CONVERGENCE
    else:
        code = EXIT_OK
    return code, body


def cmd_sharpness(args):
    d = _domain_from_args(args)
    ids = [i for group in args.bound for i in group.split(",") if i] if args.bound else [
        b.id for b in B.catalog() if b.sharp_lower or b.sharp_upper]
    results, skipped = [], []
    for bid in ids:
        try:
            b = B.get_bound(bid)
        except KeyError:
            raise UsageError(f"unknown bound id {bid!r}") from None
        for alpha in _alphas(args):
            try:
                r = B.assess_sharpness(b, d, alpha, beta=args.beta, starts=args.starts, seed=args.seed,
                                       samples=args.samples)
            except B.ApplicabilityError as exc:
                skipped.append({"bound_id": bid, "alpha": alpha, "reason": str(exc)})
                continue
            if not r["sides"]:
                skipped.append({"bound_id": bid, "alpha": alpha, "reason": "no sharpness claim on this domain"})
                continue
            r["passed"] = all(s["sharp"] for s in r["sides"].values())
            results.append(r)
    body = {"sharpness": results, "skipped": skipped, "alphas": _alphas(args), "samples": args.samples}
    code = EXIT_OK if all(r["passed"] for r in results) else EXIT_VIOLATION
    return code, body


def cmd_quasi(args):
    d = _domain_from_args(args)
    reports = [_quasi_entry(d, alpha, args) for alpha in _alphas(args)]
    body = {"reports": reports, "alphas": _alphas(args), "samples": args.samples}
    if any(not r["passed"] for r in reports):
        return EXIT_VIOLATION, body
    if any(not r["converged"] for r in reports):
        return EXIT_CONVERGENCE, body
    return EXIT_OK, body


def cmd_conjecture(args):
    disk = UnitBall(2)
    scans = []
    for alpha in _alphas(args):
        for a in args.a:
            if abs(a) >= 1:
                raise UsageError(f"|a| must be < 1, got {a}")
            r = conjecture_scan(alpha, a, PairSampler(disk, seed=args.seed, count=args.samples),
                                refine=args.refine, starts=args.starts)
            ex = r.extra
            scans.append({
                "alpha": alpha,
                "a": a,
                "sup_ratio": r.best_value,
                "upper_bound": ex["upper_bound"],
                "inf_ratio": ex["min_ratio"],
                "lower_bound": ex["lower_bound"],
                "exceeds_upper": bool(r.best_value > ex["upper_bound"] + args.tol),
                "below_lower": bool(ex["min_ratio"] < ex["lower_bound"] - args.tol),
                "sup_witness": r.witness.get("points"),
                "inf_witness": ex["min_witness"],
                "evaluations": r.evaluations,
                "converged": r.converged,
                "samples": ex["samples"],
                "tol": args.tol,
            })
    for s in scans:
        s["passed"] = not (s["exceeds_upper"] or s["below_lower"])
    body = {"scans": scans, "alphas": _alphas(args), "samples": args.samples, "domain_override": disk.describe()}
    if any(not s["passed"] for s in scans):
        return EXIT_VIOLATION, body
    if args.refine and any(not s["converged"] for s in scans):
        return EXIT_CONVERGENCE, body
    return EXIT_OK, body


def cmd_specfun(args):
    body = {}
    code = EXIT_OK
    if args.K:
        body["ell_K"] = [{"r": r, "K": ell_K(r)} for r in args.K]
    if args.gamma2:
        body["gamma2"] = [{"t": t, "gamma2": gamma2(t)} for t in args.gamma2]
    if args.lambda2 or not (args.K or args.gamma2):
        est = lambda2_estimate(args.tmax)
        body["lambda2"] = est.to_dict()
        if not est.converged:
            code = EXIT_CONVERGENCE
    return code, body


# -- output ------------------------------------------------------------------------------------


def table_rows(command, body):
    """Flat rows for the tabular export; verification-style commands share ``TABLE_COLUMNS``."""
    if command in ("verify", "quasi"):
        rows = []
        for r in body["reports"]:
            label = r["bound_id"]
            if "K" in r:
                label += f":K={r['K']:g}"
            elif "a" in r:
                label += f":a={complex(*r['a']):g}"
            rows.append({
                "bound_id": label, "alpha": r["alpha"],
                "lower_const": r.get("lower_const"), "upper_const": r.get("upper_const"),
                "worst_lower_margin": r.get("worst_lower_margin"),
                "worst_upper_margin": r.get("worst_upper_margin"),
                "empirical_max_quotient": r.get("max_quotient"), "pass": r["passed"],
            })
        return list(TABLE_COLUMNS), rows
    if command == "sharpness":
        cols = ["bound_id", "alpha", "side", "target", "analytic", "refined", "ratio", "sharp"]
        rows = [{"bound_id": r["bound"], "alpha": r["alpha"], "side": side, **{k: s[k] for k in cols[3:]}}
                for r in body["sharpness"] for side, s in r["sides"].items()]
        return cols, rows
    if command == "conjecture":
        cols = ["alpha", "a", "sup_ratio", "upper_bound", "inf_ratio", "lower_bound", "pass"]
        rows = [{**{k: s[k] for k in cols[:-1]}, "a": abs(complex(*s["a"])), "pass": s["passed"]} for s in body["scans"]]
        return cols, rows
    cols = ["quantity", "argument", "value"]
    rows = [{"quantity": "K", "argument": e["r"], "value": e["K"]} for e in body.get("ell_K", [])]
    rows += [{"quantity": "gamma2", "argument": e["t"], "value": e["gamma2"]} for e in body.get("gamma2", [])]
    lam = body.get("lambda2")
    if lam:
        rows += [{"quantity": "log_lambda2", "argument": t, "value": v}
                 for t, v in zip(lam["t_values"], lam["log_lambda2_estimates"])]
        rows.append({"quantity": "lambda2", "argument": lam["t_values"][-1], "value": lam["lambda2"]})
    return cols, rows


def render_table(command, body):
    cols, rows = table_rows(command, body)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def envelope(args, argv, body, code, wall_time, figures):
    domain = None
    if getattr(args, "domain", None):
        try:
            domain = _domain_from_args(args).describe()
        except (ParameterError, ValueError):
            domain = None
    env = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "argv": list(argv),
        "seed": getattr(args, "seed", 0),
        "domain": body.pop("domain_override", domain) if isinstance(body, dict) else domain,
        "exit_code": code,
        "figures": figures,
        "wall_time": wall_time,
    }
    env.update(body)
    return clean(env)


def _figure_prefix(args):
    out = getattr(args, "out", None)
    if not out:
        raise UsageError("--plot writes figures next to --out; give --out PATH")
    stem = out.rsplit(".", 1)[0] if "." in out.rsplit("/", 1)[-1] else out
    return stem


# -- parser ------------------------------------------------------------------------------------


def _domain_flags(p):
    p.add_argument("--domain", choices=sorted(DOMAIN_TYPES), default="halfspace")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--punctures", help="semicolon-separated points, e.g. '0,0;2,0'")
    p.add_argument("--half-width", type=float, help="strip half-width")
    p.add_argument("--half-side", type=float, help="box half-side")
    p.add_argument("--radius", type=float, help="radius of the removed ball")


def _run_flags(p, samples, tol):
    p.add_argument("--alpha", type=float)
    p.add_argument("--alphas", type=float_list)
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=tol)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("report", "table"), default="report")
    p.add_argument("--plot", action="store_true", help="render PNG figures next to --out")


def build_parser():
    parser = argparse.ArgumentParser(prog="pointpair", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one metric on one pair")
    _domain_flags(p)
    p.add_argument("--metric", choices=METRIC_TAGS, default="gpp")
    p.add_argument("--alpha", type=float)
    p.add_argument("--x", type=point, required=True)
    p.add_argument("--y", type=point, required=True)
    p.add_argument("--s-mode", choices=("closed_form", "brute_force"), default="closed_form")

    p = sub.add_parser("verify", help="sampling campaign for catalog bounds")
    _domain_flags(p)
    _run_flags(p, 100_000, B.DEFAULT_TOL)
    p.add_argument("--bound", action="append", help="bound id(s), comma-separated or repeated")
    p.add_argument("--all", action="store_true")
    p.add_argument("--beta", type=float, help="second parameter of lem4.1 (default 4*alpha)")
    p.add_argument("--a", type=complex_list, default=[0.5], help="Möbius parameters for cor5.3")
    p.add_argument("--K", type=float_list, default=[1.0, 2.0, 4.0], help="radial stretch exponents")
    p.add_argument("--refine", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--starts", type=int, default=16)

    p = sub.add_parser("sharpness", help="extremal witnesses and refined quotients")
    _domain_flags(p)
    _run_flags(p, 20_000, B.DEFAULT_TOL)
    p.add_argument("--bound", action="append")
    p.add_argument("--beta", type=float)
    p.add_argument("--starts", type=int, default=32)

    p = sub.add_parser("quasi", help="empirical quasi-metric constant")
    _domain_flags(p)
    _run_flags(p, 100_000, QUASI_TOL)
    p.add_argument("--refine", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--starts", type=int, default=16)

    p = sub.add_parser("conjecture", help="Möbius distortion scan on the unit disk")
    _run_flags(p, 100_000, QUASI_TOL)
    p.add_argument("--a", type=complex_list, default=[0.5])
    p.add_argument("--refine", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--starts", type=int, default=32)

    p = sub.add_parser("specfun", help="K, gamma2 and the lambda2 limit")
    p.add_argument("--lambda2", action="store_true")
    p.add_argument("--tmax", type=float, default=1e8)
    p.add_argument("--K", type=float_list, help="moduli r for K(r)")
    p.add_argument("--gamma2", type=float_list, help="arguments t > 1 for gamma2(t)")
    p.add_argument("--out")
    p.add_argument("--format", choices=("report", "table"), default="report")
    p.add_argument("--plot", action="store_true")
    return parser


COMMANDS = {
    "eval": cmd_eval,
    "verify": cmd_verify,
    "sharpness": cmd_sharpness,
    "quasi": cmd_quasi,
    "conjecture": cmd_conjecture,
    "specfun": cmd_specfun,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        prefix = _figure_prefix(args) if getattr(args, "plot", False) else None
        code, body = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except DomainError as exc:
        msg = f"domain error: {exc}"
        if exc.witness is not None:
            msg += f" (witness {np.asarray(exc.witness).tolist()})"
        print(msg, file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, B.ApplicabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if body is None:
        return code
    for item in body.get("skipped", []):
        print(f"skipped {item['bound_id']}: {item['reason']}", file=sys.stderr)
    figures = []
    if prefix is not None:
        from .plotting import plot_report

        figures = plot_report(args.command, clean(body), prefix)
    if args.format == "table":
        text = render_table(args.command, clean(body))
    else:
        env = envelope(args, argv, body, code, time.perf_counter() - start, figures)
        text = json.dumps(env, sort_keys=True, indent=1) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
