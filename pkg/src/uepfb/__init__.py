"""Unequal error protection exponents and feedback codes over DMCs."""

from .channel import (
    Channel,
    ChannelError,
    Distribution,
    EmpiricalDist,
    binary_entropy,
    capacity,
    empirical,
    kl_divergence,
    load_channel,
    max_divergence,
    mutual_information,
    total_variation,
)
from .exponents import (
    J,
    PhasePlan,
    RateExponentQuery,
    TimeSharePlan,
    burnashev,
    emd,
    j_big,
    j_single,
    max_exponent,
    optimal_e1,
    region_feasible,
)

__version__ = "0.1.0"
