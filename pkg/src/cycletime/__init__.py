"""Cycle-time analysis of max-plus stochastic recursions."""

from .errors import CapExceededError, CycleTimeError, ModelError, UnsupportedLawError
from .exponents import (ExponentEstimate, estimate_bottom_exponent, estimate_top_exponent,
                        karp_max_cycle_mean, top_exponent)
from .law import Atom, Deterministic, FiniteIID, MarkovModulated, example1_law, load_law, load_law_file
from .verdict import decide_cycle_time, simulate_limit_distribution

__all__ = [
    "Atom", "CapExceededError", "CycleTimeError", "Deterministic", "ExponentEstimate", "FiniteIID",
    "MarkovModulated", "ModelError", "UnsupportedLawError", "decide_cycle_time",
    "estimate_bottom_exponent", "estimate_top_exponent", "example1_law", "karp_max_cycle_mean",
    "load_law", "load_law_file", "simulate_limit_distribution", "top_exponent",
]
