"""Instance data model for prophet inequalities with uncertain acceptance.

An option is the joint law of a value ``X`` and an acceptance bit ``A``,
stored as a finite list of atoms ``(value, mass, accept)`` where ``accept``
is ``P[A = 1 | X = value]``. Every constructor normalizes its input: atoms
with mass 0 are dropped, atoms whose values agree within :data:`TOL` are
merged (masses added, acceptance mass-weighted), atoms are sorted by value,
and masses within :data:`TOL` of summing to one are renormalized.

All types are immutable; every function here is pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, NamedTuple, Sequence

TOL = 1e-9


class ModelError(ValueError):
    """Base class for invalid instances and parameters.

    ``index`` names the offending option (0-based) when it is known.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index

    def __str__(self) -> str:
        msg = super().__str__()
        if self.index is not None:
            return f"option {self.index}: {msg}"
        return msg


class NegativeValue(ModelError):
    pass


class MassNotOne(ModelError):
    pass


class ProbOutOfRange(ModelError):
    pass


class EmptyInstance(ModelError):
    pass


class NonPositiveScale(ModelError):
    pass


class ParamOutOfRange(ModelError):
    pass


class EnumerationTooLarge(RuntimeError):
    """An exact enumeration would exceed its configured cap."""

    def __init__(self, size: int, cap: int):
        super().__init__(f"enumeration of {size} outcomes exceeds cap {cap}")
        self.size = size
        self.cap = cap


class Atom(NamedTuple):
    value: float
    mass: float
    accept: float = 1.0


class ClassicAtom(NamedTuple):
    value: float
    mass: float


def _check_value(v: float) -> float:
    v = float(v)
    if not (math.isfinite(v) and v >= 0):
        raise NegativeValue(f"value {v!r} is not a finite nonnegative number")
    return v


def _check_prob(x: float, what: str) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ProbOutOfRange(f"{what} {x!r} outside [0, 1]")
    return x


def _normalize(triples: Iterable[tuple[float, float, float]]) -> tuple[Atom, ...]:
    """Validate, drop null atoms, merge near-equal values, renormalize."""
    rows = []
    for v, m, a in triples:
        rows.append((_check_value(v), _check_prob(m, "mass"), _check_prob(a, "accept")))
    if not rows:
        raise EmptyInstance("option has no atoms")
    total = math.fsum(m for _, m, _ in rows)
    if abs(total - 1.0) > TOL:
        raise MassNotOne(f"masses sum to {total!r}, not 1")
    rows = sorted((r for r in rows if r[1] > 0.0), key=lambda r: r[0])

    groups: list[list[tuple[float, float, float]]] = []
    for r in rows:
        if groups and r[0] - groups[-1][0][0] <= TOL:
            groups[-1].append(r)
        else:
            groups.append([r])
    # leave totals that are already 1 to rounding alone, so normalizing twice is a no-op
    scale = 1.0 if abs(total - 1.0) <= 1e-15 else total
    out = []
    for g in groups:
        v, m, a = g[0]
        if len(g) > 1:
            m = math.fsum(r[1] for r in g)
            a = min(1.0, max(0.0, math.fsum(r[1] * r[2] for r in g) / m))
        out.append(Atom(v, min(1.0, m / scale), a))
    return tuple(out)


@dataclass(frozen=True)
class OptionSpec:
    """One time step: the joint law of (value, acceptance)."""

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", _normalize(self.atoms))

    @classmethod
    def of(cls, *triples) -> "OptionSpec":
        return cls(tuple(Atom(*t) for t in triples))

    @classmethod
    def deterministic(cls, value: float, accept: float = 1.0) -> "OptionSpec":
        return cls((Atom(value, 1.0, accept),))

    @classmethod
    def scaled_bernoulli(cls, lam: float, p: float, accept: float = 1.0) -> "OptionSpec":
        """Value ``lam`` w.p. ``p`` else 0; acceptance independent of the value."""
        return cls((Atom(lam, p, accept), Atom(0.0, 1.0 - p, accept)))

    @property
    def acceptance_prob(self) -> float:
        """Marginal P[A = 1]."""
        return math.fsum(a.mass * a.accept for a in self.atoms)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(a.value for a in self.atoms)


@dataclass(frozen=True)
class Instance:
    """An ordered sequence of independent options."""

    options: tuple[OptionSpec, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        opts = tuple(self.options)
        if not opts:
            raise EmptyInstance("instance has no options")
        object.__setattr__(self, "options", opts)

    def __len__(self) -> int:
        return len(self.options)

    @property
    def support_sizes(self) -> tuple[int, ...]:
        return tuple(len(o.atoms) for o in self.options)

    @property
    def min_accept(self) -> float:
        """Smallest conditional acceptance probability over all atoms."""
        return min(a.accept for o in self.options for a in o.atoms)


@dataclass(frozen=True)
class ClassicOption:
    """A finite nonnegative discrete distribution."""

    atoms: tuple[ClassicAtom, ...]

    def __post_init__(self):
        norm = _normalize((v, m, 1.0) for v, m in self.atoms)
        object.__setattr__(self, "atoms", tuple(ClassicAtom(a.value, a.mass) for a in norm))

    @classmethod
    def of(cls, mapping: dict[float, float] | Iterable[tuple[float, float]]) -> "ClassicOption":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return cls(tuple(ClassicAtom(v, m) for v, m in items))

    def as_dict(self) -> dict[float, float]:
        return {a.value: a.mass for a in self.atoms}

    @property
    def mean(self) -> float:
        return math.fsum(a.value * a.mass for a in self.atoms)


@dataclass(frozen=True)
class ClassicInstance:
    options: tuple[ClassicOption, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        opts = tuple(self.options)
        if not opts:
            raise EmptyInstance("instance has no options")
        object.__setattr__(self, "options", opts)

    def __len__(self) -> int:
        return len(self.options)

    def as_instance(self) -> Instance:
        """Embed as an uncertain-acceptance instance with every accept = 1."""
        return Instance(
            tuple(OptionSpec(tuple(Atom(a.value, a.mass, 1.0) for a in o.atoms)) for o in self.options),
            name=self.name,
        )


class SBPair(NamedTuple):
    lam: float
    p: float


@dataclass(frozen=True)
class SBInstance:
    """Scaled-Bernoulli classical instance: option i is ``lam_i * Ber(p_i)``."""

    pairs: tuple[SBPair, ...]

    def __post_init__(self):
        pairs = []
        for i, (lam, p) in enumerate(self.pairs):
            lam, p = float(lam), float(p)
            if not (math.isfinite(lam) and lam >= 0):
                raise NegativeValue(f"lambda {lam!r} is not a finite nonnegative number", i)
            if not (0.0 < p <= 1.0):
                raise ProbOutOfRange(f"p {p!r} outside (0, 1]", i)
            pairs.append(SBPair(lam, p))
        if not pairs:
            raise EmptyInstance("instance has no options")
        object.__setattr__(self, "pairs", tuple(pairs))

    @classmethod
    def from_lists(cls, lams: Sequence[float], ps: Sequence[float]) -> "SBInstance":
        if len(lams) != len(ps):
            raise ModelError("lambda and p lists differ in length")
        return cls(tuple(SBPair(lam, p) for lam, p in zip(lams, ps)))

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def lams(self) -> tuple[float, ...]:
        return tuple(pr.lam for pr in self.pairs)

    @property
    def ps(self) -> tuple[float, ...]:
        return tuple(pr.p for pr in self.pairs)


@dataclass(frozen=True)
class EvalReport:
    """Values of the three agents and their pairwise ratios.

    A ratio is ``None`` (and listed in ``flags``) when its denominator is 0.
    """

    dp: float
    va: float
    opt: float
    alpha: float | None
    beta: float | None
    gamma: float | None
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "dp": self.dp,
            "va": self.va,
            "opt": self.opt,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "flags": list(self.flags),
        }


def validate(instance: Instance) -> Instance:
    """Return the normalized form of ``instance``.

    Normalization is idempotent. Errors carry the offending option index.
    """
    if not instance.options:
        raise EmptyInstance("instance has no options")
    opts = []
    for i, o in enumerate(instance.options):
        try:
            opts.append(OptionSpec(tuple(o.atoms)))
        except ModelError as exc:
            exc.index = i
            raise
    return Instance(tuple(opts), name=instance.name)


def scale_values(instance: Instance, c: float) -> Instance:
    """Multiply every atom value by ``c > 0``."""
    c = float(c)
    if not (c > 0 and math.isfinite(c)):
        raise NonPositiveScale(f"scale {c!r} must be positive")
    return Instance(
        tuple(
            OptionSpec(tuple(Atom(a.value * c, a.mass, a.accept) for a in o.atoms))
            for o in instance.options
        ),
        name=instance.name,
    )


# -- JSON ---------------------------------------------------------------------


def _atoms_from_json(raw: Any, index: int, classic: bool):
    if not isinstance(raw, dict) or not isinstance(raw.get("atoms"), list):
        raise ModelError("expected an object with an 'atoms' list", index)
    out = []
    for atom in raw["atoms"]:
        try:
            value, prob = atom["value"], atom["prob"]
        except (TypeError, KeyError):
            raise ModelError("each atom needs 'value' and 'prob'", index) from None
        if classic:
            out.append(ClassicAtom(value, prob))
        else:
            out.append(Atom(value, prob, atom.get("accept", 1.0)))
    return tuple(out)


def instance_from_dict(data: Any) -> Instance:
    if not isinstance(data, dict) or not isinstance(data.get("options"), list):
        raise ModelError("expected an object with an 'options' list")
    if not data["options"]:
        raise EmptyInstance("instance has no options")
    opts = []
    for i, raw in enumerate(data["options"]):
        atoms = _atoms_from_json(raw, i, classic=False)
        try:
            opts.append(OptionSpec(atoms))
        except (ModelError, TypeError) as exc:
            if isinstance(exc, ModelError):
                exc.index = i
                raise
            raise ModelError(str(exc), i) from None
    return Instance(tuple(opts), name=data.get("name"))


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    out: dict[str, Any] = {}
    if instance.name is not None:
        out["name"] = instance.name
    out["options"] = [
        {"atoms": [{"value": a.value, "prob": a.mass, "accept": a.accept} for a in o.atoms]}
        for o in instance.options
    ]
    return out


def classic_from_dict(data: Any) -> ClassicInstance:
    """Read a classical instance; an ``accept`` field, if present, must be 1."""
    inst = instance_from_dict(data)
    for i, o in enumerate(inst.options):
        if any(abs(a.accept - 1.0) > TOL for a in o.atoms):
            raise ModelError("classical instances cannot carry accept < 1", i)
    return ClassicInstance(
        tuple(ClassicOption(tuple(ClassicAtom(a.value, a.mass) for a in o.atoms)) for o in inst.options),
        name=inst.name,
    )


def classic_to_dict(classic: ClassicInstance) -> dict[str, Any]:
    out: dict[str, Any] = {}
    if classic.name is not None:
        out["name"] = classic.name
    out["options"] = [
        {"atoms": [{"value": a.value, "prob": a.mass} for a in o.atoms]} for o in classic.options
    ]
    return out


def load_instance(path: str | Path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def dump_instance(instance: Instance, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
