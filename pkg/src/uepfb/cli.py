"""Command-line front end.

Exit codes: 0 success, 1 a non-vacuous bound failed, 2 usage or input error.
Data files contain no timestamps; each one gets a ``.meta.json`` sidecar.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

from . import __version__
from .channel import ChannelError, load_channel
from .codec import BitwiseCodeSpec, CodecError, ErasureCodeSpec, MwCodeSpec, spec_to_json
from .converse import ConverseError, any_failure, check_exact_fixed, check_exact_vlc, check_report
from .exponents import (
    ExponentError,
    RateExponentQuery,
    TimeSharePlan,
    emd_curve,
    j_big,
    j_curve,
    region_feasible,
    trace_region_boundary,
    write_curve_csv,
)
from .vlc import (
    DEFAULT_MAX_ROUNDS,
    SimulationError,
    VlcScheme,
    dump_json,
    exact_enumerate,
    load_scheme,
    simulate,
    verify_achievability,
)

INPUT_ERRORS = (ChannelError, ExponentError, CodecError, SimulationError, ConverseError, OSError,
                KeyError, TypeError, ValueError, json.JSONDecodeError)


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def _floats(text: str | None) -> list[float]:
    if not text:
        return []
    return [float(t) for t in text.split(",")]


def _write_meta(path: Path, args: argparse.Namespace) -> None:
    meta = {
        "command": args.command,
        "argv": sys.argv[1:],
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    path.with_name(path.name + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _emit_json(obj, args) -> None:
    if args.out:
        out = Path(args.out)
        dump_json(obj, out)
        _write_meta(out, args)


def build_spec(obj: dict, w):
    """Parse a spec file: either a full spec or a ``design`` request expanded on ``w``."""
    if "design" not in obj:
        return load_scheme(obj)
    kind = obj["design"]
    scale = float(obj.get("threshold_scale", 1.0))
    cscale = float(obj.get("control_scale", 1.0))
    seed = int(obj.get("seed", 0))
    n = int(obj["n"])
    if kind == "mw":
        if "plan" in obj:
            plan = TimeSharePlan.from_json(obj["plan"])
        else:
            plan = j_big(w, float(obj.get("rate", 0.0)))[1]
        spec = MwCodeSpec.design(w, n, plan, int(obj["msg_count"]), seed, threshold_scale=scale)
    elif kind == "erasure":
        spec = ErasureCodeSpec.design(w, n, float(obj["rate"]), float(obj["exponent"]), int(obj["msg_count"]),
                                      seed, threshold_scale=scale, control_scale=cscale)
    elif kind == "bitwise":
        rates = obj.get("rates")
        spec = BitwiseCodeSpec.design(w, n, obj["sizes"], obj["phis"], seed,
                                      None if rates is None else [float(r) for r in rates],
                                      threshold_scale=scale, control_scale=cscale)
    else:
        raise UsageError(f"unknown design {kind!r}")
    if obj.get("vlc"):
        return VlcScheme(spec, int(obj.get("max_rounds", DEFAULT_MAX_ROUNDS)))
    return spec


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    w = load_channel(args.channel)
    res = {
        "capacity_nats": w.capacity_nats,
        "d_max_nats": w.d_max_nats,
        "accept_letter": w.accept_letter,
        "reject_letter": w.reject_letter,
        "lambda": w.lam,
        "capacity_input": w.capacity_input.tolist(),
    }
    print(f"C = {fmt(res['capacity_nats'])} nats")
    print(f"D = {fmt(res['d_max_nats'])} nats")
    print(f"x_a = {res['accept_letter']}, x_r = {res['reject_letter']}")
    print(f"lambda = {fmt(res['lambda'])}")
    _emit_json(res, args)
    return 0


def _write_curve(points, args) -> None:
    for p in points[: args.show]:
        print(f"{fmt(p.x)}\t{fmt(p.y)}")
    if args.out:
        out = Path(args.out)
        write_curve_csv(points, out)
        _write_meta(out, args)


def cmd_jcurve(args) -> int:
    w = load_channel(args.channel)
    if args.points < 1:
        raise UsageError("--points must be positive")
    _write_curve(j_curve(w, args.points), args)
    return 0


def cmd_emd(args) -> int:
    w = load_channel(args.channel)
    if args.points < 1:
        raise UsageError("--points must be positive")
    if not 0 <= args.exponent <= w.d_max_nats:
        raise UsageError(f"--exponent must lie in [0, D={w.d_max_nats:.6g}]")
    _write_curve(emd_curve(w, args.exponent, args.points), args)
    return 0


def cmd_region(args) -> int:
    w = load_channel(args.channel)
    rates, exps = _floats(args.rates), _floats(args.exponents)
    if not rates or len(rates) != len(exps):
        raise UsageError("--rates and --exponents need the same positive number of entries")
    if min(rates) < 0 or sum(rates) > w.capacity_nats + 1e-12:
        raise UsageError("rates must be non-negative and sum to at most C")
    q = RateExponentQuery(rates, exps)
    if args.sweep:
        pts = trace_region_boundary(w, q, args.sweep, args.points, args.target, tol=args.tol)
        _write_curve(pts, args)
        return 0
    ok, plan = region_feasible(w, q, tol=args.tol)
    print("feasible" if ok else "infeasible")
    if plan is not None:
        print("phis = " + ", ".join(fmt(float(p)) for p in plan.phis))
    _emit_json({"rates": rates, "exponents": exps, "feasible": ok,
                "plan": None if plan is None else plan.to_json()}, args)
    return 0


def _load_scheme(args, w):
    obj = json.loads(Path(args.spec).read_text())
    return build_spec(obj, w)


def _inner(scheme):
    return scheme.inner if isinstance(scheme, VlcScheme) else scheme


def cmd_simulate(args) -> int:
    w = load_channel(args.channel)
    scheme = _load_scheme(args, w)
    if args.exact:
        table = exact_enumerate(scheme, w)
        obj = table.to_json()
        obj["spec"] = scheme.to_json() if isinstance(scheme, VlcScheme) else spec_to_json(scheme)
        err = table.vlc_error() if isinstance(scheme, VlcScheme) else table.error()
        print(f"exact: Pe = {fmt(float(err.mean()))}, Pe(1) = {fmt(float(err[0]))}")
        _emit_json(obj, args)
        return 0
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    rep = simulate(scheme, w, args.trials, args.seed, args.threads)
    e, lo, hi = rep.interval("error")
    mt, se = rep.mean_time()
    print(f"trials = {rep.trials}, Pe = {fmt(e)} [{fmt(lo)}, {fmt(hi)}], E[T] = {fmt(mt)} +- {fmt(se)}")
    _emit_json(rep.to_json(), args)
    if args.csv:
        path = Path(args.csv)
        path.write_text(rep.to_csv())
        _write_meta(path, args)
    return 0


def cmd_verify(args) -> int:
    w = load_channel(args.channel)
    scheme = _load_scheme(args, w)
    inner = _inner(scheme)
    vlc = isinstance(scheme, VlcScheme)
    if args.exact:
        table = exact_enumerate(scheme, w)
        verdicts = verify_achievability(table, inner, w)
        verdicts += check_exact_vlc(table, w) if vlc else check_exact_fixed(table, w)
    else:
        if args.trials < 1:
            raise UsageError("--trials must be positive")
        rep = simulate(scheme, w, args.trials, args.seed, args.threads)
        verdicts = verify_achievability(rep, scheme, w)
        verdicts += check_report(rep, w, isinstance(inner, BitwiseCodeSpec))
    counts = {s: sum(v.status == s for v in verdicts) for s in ("pass", "fail", "vacuous")}
    for v in verdicts:
        if v.status == "fail":
            print(f"FAIL {v.bound_name}: observed {fmt(v.observed)} vs bound {fmt(v.bound_value)}")
    print(f"pass = {counts['pass']}, fail = {counts['fail']}, vacuous = {counts['vacuous']}")
    _emit_json([v.to_json() for v in verdicts], args)
    return 1 if any_failure(verdicts) else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uepfb", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_help="output file"):
        p.add_argument("--channel", required=True, help="channel JSON file")
        p.add_argument("--out", help=out_help)
        return p

    common(sub.add_parser("analyze", help="capacity, D, accept/reject letters"), "JSON output")

    p = common(sub.add_parser("jcurve", help="J(R) on [0, C]"), "CSV output")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--show", type=int, default=0, help="print the first N points")

    p = common(sub.add_parser("emd", help="E_md(R, E) for fixed E"), "CSV output")
    p.add_argument("--exponent", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--show", type=int, default=0)

    p = common(sub.add_parser("region", help="bit-wise region queries and boundary sweeps"))
    p.add_argument("--rates", required=True, help="comma-separated R_1..R_l")
    p.add_argument("--exponents", required=True, help="comma-separated E_1..E_l")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--sweep", help="axis to sweep, e.g. rate:2 or exponent:2")
    p.add_argument("--target", default="exponent:1", help="axis maximized along the sweep")
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--show", type=int, default=0)

    for name, helptext in (("simulate", "Monte Carlo or exact outcome statistics"),
                           ("verify", "check bounds against simulated or exact statistics")):
        p = common(sub.add_parser(name, help=helptext), "JSON output")
        p.add_argument("--spec", required=True, help="code spec JSON")
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--exact", action="store_true", help="exhaustive enumeration instead of Monte Carlo")
        if name == "simulate":
            p.add_argument("--csv", help="per-message CSV summary")
    return ap


COMMANDS = {
    "analyze": cmd_analyze,
    "jcurve": cmd_jcurve,
    "emd": cmd_emd,
    "region": cmd_region,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
