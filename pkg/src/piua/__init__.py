"""Prophet inequalities with uncertain acceptance: exact values, competitive
ratios, worst-case constructions and simulation."""

__version__ = "0.1.0"

from .engine import dp_value, evaluate, on_value, opt_value, product_transform, va_value
from .model import Atom, ClassicInstance, ClassicOption, EvalReport, Instance, OptionSpec, SBInstance

__all__ = [
    "Atom",
    "ClassicInstance",
    "ClassicOption",
    "EvalReport",
    "Instance",
    "OptionSpec",
    "SBInstance",
    "dp_value",
    "evaluate",
    "on_value",
    "opt_value",
    "product_transform",
    "va_value",
]
