"""Mapping uncertain-acceptance instances to classical ones.

Three mappings are compared against the original instance:

* observe the product ``X_i * A_i`` (:func:`piua.engine.product_transform`),
* drop acceptance and keep the values (:func:`focus_values`),
* reveal every acceptance bit before the process starts (:func:`on_pa`).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any

from .engine import DEFAULT_CAP, classic_opt_value, dp_value, evaluate, on_value, opt_value
from .families import example_size2
from .model import (
    ClassicAtom,
    ClassicInstance,
    ClassicOption,
    EnumerationTooLarge,
    Instance,
    ModelError,
    OptionSpec,
    TOL,
)

PA_CAP = 20


class ZeroAcceptanceMass(ModelError):
    pass


@dataclass(frozen=True)
class PaReport:
    on_pa: float
    opt_pa: float
    ratio_pa: float | None
    gamma: float | None

    def to_dict(self) -> dict[str, Any]:
        return {"on_pa": self.on_pa, "opt_pa": self.opt_pa, "ratio_pa": self.ratio_pa, "gamma": self.gamma}


def focus_values(instance: Instance) -> ClassicInstance:
    """Marginal law of the values; acceptance is discarded."""
    return ClassicInstance(
        tuple(ClassicOption(tuple(ClassicAtom(a.value, a.mass) for a in o.atoms)) for o in instance.options),
        name=instance.name,
    )


def _accepted_law(option: OptionSpec) -> ClassicOption:
    # rescale by the largest accept first so tiny acceptance masses keep precision
    top = max(a.accept for a in option.atoms)
    weights = [(a.value, a.mass * (a.accept / top)) for a in option.atoms if a.accept > 0]
    total = math.fsum(w for _, w in weights)
    return ClassicOption(tuple(ClassicAtom(v, w / total) for v, w in weights))


def conditional_on_acceptance(option: OptionSpec, bit: int) -> ClassicOption:
    """Law of ``X * A`` given ``A = bit``."""
    if bit == 0:
        return ClassicOption((ClassicAtom(0.0, 1.0),))
    if bit != 1:
        raise ValueError(f"acceptance bit must be 0 or 1, got {bit!r}")
    if option.acceptance_prob <= 1e-12:
        raise ZeroAcceptanceMass("P[A = 1] is zero")
    return _accepted_law(option)


def on_pa(instance: Instance, cap: int = PA_CAP) -> float:
    """Optimal online value when all acceptance bits are announced upfront."""
    n = len(instance)
    if n > cap:
        raise EnumerationTooLarge(2**n, 2**cap)
    marg = [o.acceptance_prob for o in instance.options]
    # only events of probability exactly 0 are skipped
    accepted = [_accepted_law(o) if m > 0 else None for o, m in zip(instance.options, marg)]
    rejected = ClassicOption((ClassicAtom(0.0, 1.0),))
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        weight = 1.0
        for b, m in zip(bits, marg):
            weight *= m if b else 1.0 - m
        if weight == 0.0:
            continue
        classic = ClassicInstance(tuple(accepted[i] if b else rejected for i, b in enumerate(bits)))
        total += weight * on_value(classic)
    return total


def pa_report(instance: Instance, cap: int = PA_CAP, enum_cap: int = DEFAULT_CAP) -> PaReport:
    on = on_pa(instance, cap)
    opt = opt_value(instance, enum_cap)
    dp = dp_value(instance)
    # both ratios share the denominator; compare the numerators on the value scale
    if dp > on + TOL:
        raise ArithmeticError(f"online value {dp} exceeds public-acceptance value {on}")
    ratio = on / opt if opt > 0 else None
    gamma = dp / opt if opt > 0 else None
    return PaReport(on, opt, ratio, gamma)


def classic_ratio(classic: ClassicInstance) -> float | None:
    opt = classic_opt_value(classic)
    return on_value(classic) / opt if opt > 0 else None


# -- tables -------------------------------------------------------------------------

TABLE1_PARAMS = ((10.0, 0.1, 0.1), (100.0, 0.1, 0.1))
TABLE2_PARAMS = ((2.0, 0.5, 0.5), (100.0, 0.1, 0.1))
TABLE_COLUMNS = ("table", "v", "p", "a", "alpha", "gamma", "mapped_ratio", "alpha_2dp", "gamma_2dp", "mapped_ratio_2dp")


def round2(x: float) -> str:
    """Two decimals, half-even, on the shortest repr of ``x``."""
    return str(Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def _row(table: str, v: float, p: float, a: float, mapped: float) -> dict[str, Any]:
    rep = evaluate(example_size2(v, p, a))
    return {
        "table": table,
        "v": v,
        "p": p,
        "a": a,
        "alpha": rep.alpha,
        "gamma": rep.gamma,
        "mapped_ratio": mapped,
        "alpha_2dp": round2(rep.alpha),
        "gamma_2dp": round2(rep.gamma),
        "mapped_ratio_2dp": round2(mapped),
    }


def table1() -> list[dict[str, Any]]:
    """Decision maker ratios next to the classical ratio of the value marginals."""
    rows = []
    for v, p, a in TABLE1_PARAMS:
        rows.append(_row("1", v, p, a, classic_ratio(focus_values(example_size2(v, p, a)))))
    return rows


def table2() -> list[dict[str, Any]]:
    """Decision maker ratios next to the public-acceptance ratio."""
    rows = []
    for v, p, a in TABLE2_PARAMS:
        rows.append(_row("2", v, p, a, pa_report(example_size2(v, p, a)).ratio_pa))
    return rows


def tables_csv() -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in table1() + table2():
        writer.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def tables_text() -> str:
    lines = []
    for title, rows, mapped in (
        ("Table 1: values only", table1(), "ON/OPT(values)"),
        ("Table 2: public acceptances", table2(), "ON^PA/OPT^PA"),
    ):
        lines.append(title)
        lines.append(f"{'v':>6} {'p':>5} {'a':>5} | {'alpha':>6} {'gamma':>6} {mapped:>15}")
        for r in rows:
            lines.append(
                f"{r['v']:>6g} {r['p']:>5g} {r['a']:>5g} | {r['alpha_2dp']:>6} {r['gamma_2dp']:>6} {r['mapped_ratio_2dp']:>15}"
            )
        lines.append("")
    return "\n".join(lines)


def mix_conditionals(option: OptionSpec) -> dict[float, float]:
    """Recombine the two conditional laws with the marginal acceptance weights."""
    m = option.acceptance_prob
    atoms = [ClassicAtom(0.0, 1.0 - m)]
    if m > 0:
        atoms += [ClassicAtom(a.value, m * a.mass) for a in _accepted_law(option).atoms]
    return ClassicOption(tuple(atoms)).as_dict()
