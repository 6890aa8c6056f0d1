"""Python access to the min-max mixed-shelves picker routing toolkit."""

from ._msprp import (
    Instance,
    Solution,
    ParseError,
    ValidationError,
    InfeasibleActionError,
    LimitError,
    generate,
    generate_custom,
    presets,
    solve,
    validate,
    export_lp,
    brute_force,
    save_random_weights,
)

__all__ = [
    "Instance",
    "Solution",
    "ParseError",
    "ValidationError",
    "InfeasibleActionError",
    "LimitError",
    "generate",
    "generate_custom",
    "presets",
    "solve",
    "validate",
    "export_lp",
    "brute_force",
    "save_random_weights",
]
