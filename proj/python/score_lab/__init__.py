"""Score regularity bounds, counter-examples and diffusion sampler experiments."""

from ._scorelab import (
    ContractError,
    DomainError,
    HorizonError,
    NumericalError,
    ScoreField,
    Target,
    UnsupportedError,
    block_ratio,
    catalog,
    catalog_names,
    closed_form_score,
    cor32_Ct,
    early_stopping_lipschitz,
    forward_sample,
    prior_horizon,
    provenance,
    rate_fit,
    run_cli,
    sample,
    sweep_verify,
    theorem_ids,
    thm31_bounds,
    w1_1d,
)

__all__ = [
    "ContractError",
    "DomainError",
    "HorizonError",
    "NumericalError",
    "ScoreField",
    "Target",
    "UnsupportedError",
    "block_ratio",
    "catalog",
    "catalog_names",
    "closed_form_score",
    "cor32_Ct",
    "early_stopping_lipschitz",
    "forward_sample",
    "prior_horizon",
    "provenance",
    "rate_fit",
    "run_cli",
    "sample",
    "sweep_verify",
    "theorem_ids",
    "thm31_bounds",
    "w1_1d",
]
