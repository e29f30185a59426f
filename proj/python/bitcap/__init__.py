"""Template-size and error-rate calculations for biometric identification."""

from ._bitcap import (
    BudgetExceeded,
    DomainError,
    Infeasible,
    __version__,
    accept_all,
    accept_all_zero_noise,
    collision,
    db_size_gib,
    db_table,
    fit_line,
    flip_from_noise,
    min_bits,
    min_k,
    min_ratio_x,
    noise_from_flip,
    open_world_rates,
    plan,
    recognize_one,
    simulate,
    sweep,
)

__all__ = [
    "BudgetExceeded",
    "DomainError",
    "Infeasible",
    "__version__",
    "accept_all",
    "accept_all_zero_noise",
    "collision",
    "db_size_gib",
    "db_table",
    "fit_line",
    "flip_from_noise",
    "min_bits",
    "min_k",
    "min_ratio_x",
    "noise_from_flip",
    "open_world_rates",
    "plan",
    "recognize_one",
    "simulate",
    "sweep",
]
