"""Topological singular sets of sampled fields."""

from ._core import (
    PRESETS,
    CapExceededError,
    DegeneracyError,
    Field,
    InputError,
    check_jacobian,
    flat_norm,
    lift,
    load_field,
    preset,
    save_field,
    singular_set,
)

__all__ = [
    "PRESETS",
    "CapExceededError",
    "DegeneracyError",
    "Field",
    "InputError",
    "check_jacobian",
    "flat_norm",
    "lift",
    "load_field",
    "preset",
    "save_field",
    "singular_set",
]
