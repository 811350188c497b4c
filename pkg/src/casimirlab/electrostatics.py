"""Sphere-plane electrostatic force: exact image-series and proximity forms.

Exact (Smythe) series at potential difference V = V1 - V2:

    F = 2 pi eps0 V^2 sum_{n>=1} csch(n a) [coth(a) - n coth(n a)],
    a = acosh(1 + z/R)

summed with scaled exponentials (n a reaches ~10^3 terms at small gaps).
The proximity form F = -pi eps0 R V^2 / z fixes the normalization; the
series approaches it from below as z/R -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import CONST
from .errors import ConvergenceError, ValidityError
from .lifshitz import PROXIMITY_RATIO_MAX


@dataclass(frozen=True)
class ElectrostaticConfig:
    R: float = 100.85e-6
    V1: float = 0.0
    V2: float = 7.9e-3          # residual potential of the grounded sphere
    series_tol: float = 1e-9
    max_terms: int = 100000

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError(f"sphere radius must be > 0, got {self.R}")
        if not (0 < self.series_tol <= 1e-6):
            raise ValueError(f"series_tol must be in (0, 1e-6], got {self.series_tol}")
        if self.max_terms < 10:
            raise ValueError("max_terms must be >= 10")


def alpha(z: float, R: float) -> float:
    """acosh(1 + z/R) via the log1p-stable form ln(1 + x + sqrt(x^2 + 2x))."""
    if z < 0:
        raise ValueError(f"separation must be >= 0, got {z}")
    if R <= 0:
        raise ValueError(f"radius must be > 0, got {R}")
    x = z / R
    return math.log1p(x + math.sqrt(x * x + 2.0 * x))


def _csch(x):
    e = math.exp(-x)
    return 2.0 * e / (1.0 - e * e)


def _coth(x):
    e = math.exp(-2.0 * x)
    return (1.0 + e) / (1.0 - e)


def sphere_plane_force_exact(z: float, cfg: ElectrostaticConfig) -> float:
    """Converged image-series force in N; attractive = negative.

    Terms decay like e^{-n a}; summation stops when the relative term drops
    below cfg.series_tol and the geometric tail bound confirms the
    truncation. Invariant under V -> -V.
    """
    if z <= 0:
        raise ValueError(f"separation must be > 0, got {z}")
    dv = cfg.V1 - cfg.V2
    if dv == 0.0:
        return 0.0
    a = alpha(z, cfg.R)
    coth_a = _coth(a)
    total = 0.0
    for n in range(1, cfg.max_terms + 1):
        term = _csch(n * a) * (coth_a - n * _coth(n * a))
        total += term
        if n >= 10 and abs(term) < cfg.series_tol * abs(total):
            ratio = math.exp(-a)
            tail_bound = abs(term) * ratio / (1.0 - ratio)
            if tail_bound < cfg.series_tol * abs(total):
                break
    else:
        raise ConvergenceError(
            f"series not converged after {cfg.max_terms} terms at alpha={a:.3g}",
            estimate=2.0 * math.pi * CONST.eps0 * dv * dv * total,
            error_bound=abs(term),
        )
    return 2.0 * math.pi * CONST.eps0 * dv * dv * total


def sphere_plane_force_pfa(z: float, cfg: ElectrostaticConfig) -> float:
    """Proximity form -pi eps0 R (V1-V2)^2 / z; requires z/R < 0.05."""
    if z <= 0:
        raise ValueError(f"separation must be > 0, got {z}")
    if z / cfg.R >= PROXIMITY_RATIO_MAX:
        raise ValidityError(
            f"z/R = {z / cfg.R:.3g} outside the proximity regime (< {PROXIMITY_RATIO_MAX})"
        )
    dv = cfg.V1 - cfg.V2
    return -math.pi * CONST.eps0 * cfg.R * dv * dv / z
