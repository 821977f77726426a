"""Directional time-frequency localization measures."""

from ._core import (
    Function,
    SpecError,
    UplocalError,
    candidates,
    extremes,
    format_number,
    parse,
    run_spec,
    sweep,
    up_directional,
    up_gg,
    up_hermite,
)

__all__ = [
    "Function",
    "SpecError",
    "UplocalError",
    "candidates",
    "extremes",
    "format_number",
    "parse",
    "run_spec",
    "sweep",
    "up_directional",
    "up_gg",
    "up_hermite",
]
