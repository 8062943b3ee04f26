from .fitting import FitResult, extrapolate, fit_expansion, loglog_slope
from .linalg import SmallestSingular, eigenvalues_small, smallest_singular
from .roots import find_root_complex, muller
from .special import bessel_i, bessel_i_prime, bessel_k, bessel_k_prime

__all__ = [
    "FitResult",
    "SmallestSingular",
    "bessel_i",
    "bessel_i_prime",
    "bessel_k",
    "bessel_k_prime",
    "eigenvalues_small",
    "extrapolate",
    "find_root_complex",
    "fit_expansion",
    "loglog_slope",
    "muller",
    "smallest_singular",
]
