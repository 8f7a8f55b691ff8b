"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from typing import Any, Sequence

from . import __version__
from .bernoulli import bn_grid_oracle_n2, certify_active, solve_bn
from .comparisons import focus_values, pa_report, tables_csv, tables_text
from .engine import DEFAULT_CAP, dp_value, evaluate, opt_value, product_transform, va_value
from .families import FAMILIES, CorrelatedScenarioInstance
from .model import (
    EnumerationTooLarge,
    Instance,
    ModelError,
    classic_to_dict,
    instance_to_dict,
    load_instance,
)
from .montecarlo import PolicySpec, estimate_prophet, simulate_policy

EXIT_USAGE = 2
EXIT_CAP = 3

SWEEP_COLUMNS = ("dp", "va", "opt", "alpha", "beta", "gamma", "alpha_over_beta")
INT_PARAMS = {"n", "seed", "max_support"}


class UsageError(Exception):
    pass


def fmt(x: Any) -> str:
    """12 significant digits for floats, empty for undefined."""
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def parse_range(text: str, integer: bool = False) -> list[float]:
    """``start:stop:step`` (stop inclusive), a comma list, or a single number."""
    cast = int if integer else float
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if not step > 0:
                raise UsageError(f"step must be positive in {text!r}")
            if stop < start:
                raise UsageError(f"empty range {text!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            pts = [round(start + k * step, 12) for k in range(count)]
            return [cast(p) for p in pts]
        return [cast(float(t)) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load(path: str) -> Instance:
    try:
        return load_instance(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg})") from None


# -- subcommands ------------------------------------------------------------------------


def cmd_eval(args) -> int:
    rep = evaluate(_load(args.path), args.cap)
    if args.format == "json":
        _emit(_json(rep.to_dict()), args.out)
    else:
        lines = [f"{k:>6}: {fmt(v)}" for k, v in rep.to_dict().items() if k != "flags"]
        if rep.flags:
            lines.append(f" flags: {', '.join(rep.flags)}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_tables(args) -> int:
    _emit(tables_csv() if args.format == "csv" else tables_text(), args.out)
    return 0


def sweep_rows(family: str, grids: dict[str, list], cap: int = DEFAULT_CAP) -> list[dict[str, Any]]:
    if family not in FAMILIES or family == "hill":
        raise UsageError(f"unknown sweep family {family!r}")
    make, params = FAMILIES[family]
    missing = [p for p in params if p not in grids]
    if missing:
        raise UsageError(f"family {family!r} needs --{' --'.join(m.replace('_', '-') for m in missing)}")
    rows = []
    for combo in itertools.product(*(grids[p] for p in params)):
        kwargs = dict(zip(params, combo))
        rep = evaluate(make(**kwargs), cap)
        ab = rep.alpha / rep.beta if rep.alpha is not None and rep.beta else None
        rows.append({**kwargs, "dp": rep.dp, "va": rep.va, "opt": rep.opt, "alpha": rep.alpha,
                     "beta": rep.beta, "gamma": rep.gamma, "alpha_over_beta": ab})
    return rows


def cmd_sweep(args) -> int:
    _, params = FAMILIES.get(args.family, (None, ()))
    grids = {}
    for p in params:
        raw = getattr(args, p, None)
        if raw is not None:
            grids[p] = parse_range(raw, integer=p in INT_PARAMS)
    rows = sweep_rows(args.family, grids, args.cap)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(params) + list(SWEEP_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: fmt(v) for k, v in row.items()})
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_bound(args) -> int:
    if not (args.n >= 2):
        raise UsageError("--n must be >= 2")
    if not (0.0 < args.p_min < 1.0):
        raise UsageError("--p-min must lie in the open interval (0, 1)")
    sol = solve_bn(args.n, args.p_min, budget=args.budget)
    out = sol.to_dict()
    out["n"] = args.n
    out["p_min"] = args.p_min
    out["target"] = 2.0 - args.p_min
    out["gap"] = out["target"] - sol.objective
    out["ratio_bound"] = 1.0 / sol.objective
    out["certificate"] = certify_active(sol, args.p_min)
    if args.n == 2:
        out["grid_oracle"] = bn_grid_oracle_n2(args.p_min)[0]
    _emit(_json(out), args.out)
    return 0


def cmd_mc(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    inst = _load(args.path)
    if args.policy == "prophet":
        est = estimate_prophet(inst, args.samples, args.seed)
        exact_fn = opt_value
    else:
        spec = PolicySpec(args.policy, args.tau)
        est = simulate_policy(inst, spec, args.samples, args.seed)
        if spec.kind == "dp-optimal":
            exact_fn = lambda i, cap: dp_value(i)  # noqa: E731
        elif spec.kind == "va-optimal":
            exact_fn = va_value
        else:
            from .policies import threshold_value

            exact_fn = lambda i, cap: threshold_value(i, args.tau)  # noqa: E731
    out = {"policy": args.policy, **est.to_dict()}
    try:
        exact = exact_fn(inst, args.cap)
    except EnumerationTooLarge:
        exact = None
    out["exact"] = exact
    if exact is None:
        out["z"] = None
    elif est.stderr > 0:
        out["z"] = (est.mean - exact) / est.stderr
    else:
        out["z"] = 0.0 if abs(est.mean - exact) <= 1e-9 else None
    _emit(_json(out), args.out)
    return 0


def cmd_transform(args) -> int:
    inst = _load(args.path)
    if args.mapping == "product":
        classic = product_transform(inst)
        out = classic_to_dict(classic)
    elif args.mapping == "values":
        out = classic_to_dict(focus_values(inst))
    else:
        if len(inst) > args.pa_cap:
            raise UsageError(f"{len(inst)} options exceed the acceptance-vector cap --pa-cap {args.pa_cap}")
        out = pa_report(inst, cap=args.pa_cap, enum_cap=args.cap).to_dict()
    _emit(_json(out), args.out)
    return 0


def cmd_families(args) -> int:
    if args.name is None:
        lines = [f"{name}: {', '.join(p.replace('_', '-') for p in params)}" for name, (_, params) in FAMILIES.items()]
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    if args.name not in FAMILIES:
        raise UsageError(f"unknown family {args.name!r}")
    make, params = FAMILIES[args.name]
    kwargs = {}
    for p in params:
        raw = getattr(args, p, None)
        if raw is None:
            raise UsageError(f"family {args.name!r} needs --{p.replace('_', '-')}")
        kwargs[p] = int(raw) if p in INT_PARAMS else float(raw)
    built = make(**kwargs)
    if isinstance(built, CorrelatedScenarioInstance):
        _emit(_json(built.to_dict()), args.out)
    else:
        _emit(_json(instance_to_dict(built)), args.out)
    return 0


# -- parser -------------------------------------------------------------------------------


def _family_params(p: argparse.ArgumentParser, as_ranges: bool) -> None:
    kind = "range start:stop:step, list a,b or value" if as_ranges else "value"
    for name in ("v", "p", "a", "n", "eps", "p-l", "seed", "max-support"):
        p.add_argument(f"--{name}", dest=name.replace("-", "_"), help=kind)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="piua",
        description="Exact values, ratios and simulations for prophet inequalities with uncertain acceptance.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="enumeration cap (default 10^7)")

    p = sub.add_parser("eval", parents=[common], help="evaluate DP, VA, OPT and the ratios of an instance file")
    p.add_argument("path")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser(
        "tables",
        parents=[common],
        help="reproduce the two comparison tables",
        description="CSV columns: " + ", ".join(
            ("table", "v", "p", "a", "alpha", "gamma", "mapped_ratio", "alpha_2dp", "gamma_2dp", "mapped_ratio_2dp")
        ),
    )
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser(
        "sweep",
        parents=[common],
        help="exact values over a parameter grid, as CSV",
        description="CSV columns: the family parameters, then " + ", ".join(SWEEP_COLUMNS)
        + ". Undefined ratios are empty.",
    )
    p.add_argument("family", help="one of: " + ", ".join(f for f in FAMILIES if f != "hill"))
    _family_params(p, as_ranges=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bound", parents=[common], help="solve the worst-case scaled-Bernoulli program")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p-min", type=float, required=True)
    p.add_argument("--budget", type=int, default=10_000, help="max coordinate-ascent sweeps per start")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo estimate for an instance file")
    p.add_argument("path")
    p.add_argument("--policy", choices=("dp-optimal", "va-optimal", "fixed-threshold", "prophet"), required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("transform", parents=[common], help="map to a classical instance or a public-acceptance report")
    p.add_argument("path")
    p.add_argument("--mapping", choices=("product", "values", "pa-report"), required=True)
    p.add_argument("--pa-cap", type=int, default=20, help="max options for the acceptance-vector sum")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("families", parents=[common], help="list families, or emit one instance as JSON")
    p.add_argument("name", nargs="?")
    _family_params(p, as_ranges=False)
    p.set_defaults(func=cmd_families)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EnumerationTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, ModelError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
