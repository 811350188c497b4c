"""Finite-conductivity Casimir force between a large sphere and a flat plate.

The sphere-plate force is the proximity composition of the plate-plate
zero-point energy, written with the p-integration in logarithmic form:

    F(z) = (hbar R c / (16 pi z^3)) *
           int_0^inf y^2 dy int_1^inf p dp
             [ ln(1 - r_tm^2 e^{-p y}) + ln(1 - r_te^2 e^{-p y}) ]

with y = 2 xi z / c, s = sqrt(eps - 1 + p^2), r_te = (s-p)/(s+p),
r_tm = (s - eps p)/(s + eps p) and eps = eps(i xi). The normalization is
anchored to the perfect-conductor limit -pi^3 hbar c R / (360 z^3), which
this form reproduces analytically as eps -> inf.

Quadrature is nested Gauss-Legendre on geometric panels with order-doubling
refinement; the y axis is truncated at xi_max = multiplier * c/(2z) and the
inner axis at u = p*y ~ 60, both with exponentially small remainders.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .constants import CONST
from .dielectric import DielectricModel
from .errors import ConvergenceError, ValidityError

PROXIMITY_RATIO_MAX = 0.05  # z/R guard for the proximity regime


@dataclass(frozen=True)
class SphereGeometry:
    """Sphere radius in meters."""

    R: float

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError(f"sphere radius must be > 0, got {self.R}")


# Default sphere: diameter 201.7 um.
DEFAULT_GEOMETRY = SphereGeometry(R=100.85e-6)


@dataclass(frozen=True)
class QuadratureParams:
    rel_tol: float = 1e-4
    abs_tol: float = 1e-18          # N
    max_refinements: int = 6
    xi_cut_multiplier: float = 40.0  # xi_max = multiplier * c/(2z)
    u_cut: float = 60.0              # p upper bound via u = 2 p xi z / c
    base_order: int = 8

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-2):
            raise ValueError(f"rel_tol must be in (0, 1e-2], got {self.rel_tol}")
        if self.xi_cut_multiplier < 20:
            raise ValueError("xi_cut_multiplier must be >= 20")


DEFAULT_QUADRATURE = QuadratureParams()


def reflection_terms(eps: float, p):
    """(s, r_te, r_tm) for one polarization pair at fixed eps and p >= 1."""
    if eps < 1:
        raise ValueError(f"eps must be >= 1, got {eps}")
    p = np.asarray(p, dtype=float)
    s = np.sqrt(eps - 1.0 + p * p)
    r_te = (s - p) / (s + p)
    r_tm = (s - eps * p) / (s + eps * p)
    return s, r_te, r_tm


def ideal_casimir_sphere_plate(z: float, geom: SphereGeometry = DEFAULT_GEOMETRY) -> float:
    """Perfect-conductor sphere-plate force -pi^3 hbar c R / (360 z^3), in N."""
    if z <= 0:
        raise ValueError(f"separation must be > 0, got {z}")
    return -np.pi**3 * CONST.hbar * CONST.c * geom.R / (360.0 * z**3)


def ideal_casimir_parallel_plates(z: float) -> float:
    """Perfect-conductor pressure -pi^2 hbar c / (240 z^4), in N/m^2."""
    if z <= 0:
        raise ValueError(f"separation must be > 0, got {z}")
    return -np.pi**2 * CONST.hbar * CONST.c / (240.0 * z**4)


@functools.lru_cache(maxsize=32)
def _leggauss_cached(order):
    return leggauss(order)


def _gauss_panels(edges, order):
    x, w = _leggauss_cached(order)
    a = np.asarray(edges[:-1])[:, None]
    b = np.asarray(edges[1:])[:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def _geometric_edges(lo, hi, first=1.0):
    edges = [lo]
    v = first
    while v < hi:
        if v > lo:
            edges.append(v)
        v *= 2
    edges.append(hi)
    return np.array(edges)


def _force_estimate(z, geom, model, q, order):
    y_edges = _geometric_edges(0.0, q.xi_cut_multiplier, first=0.5)
    ys, yw = _gauss_panels(y_edges, order)
    c = CONST.c
    total = 0.0
    for y, wy in zip(ys, yw):
        eps = model.eps(y * c / (2.0 * z))
        u_edges = _geometric_edges(y, q.u_cut, first=1.0)
        us, uw = _gauss_panels(u_edges, order)
        p = us / y
        _, r_te, r_tm = reflection_terms(eps, p)
        damp = np.exp(-us)
        inner = np.sum(uw * us * (np.log1p(-r_tm * r_tm * damp)
                                  + np.log1p(-r_te * r_te * damp)))
        total += wy * inner  # y^2 * inner/y^2: the 1/y^2 of u=p*y cancels
    return CONST.hbar * geom.R * c / (16.0 * np.pi * z**3) * total


def casimir_force_sphere_plate(z: float, geom: SphereGeometry = DEFAULT_GEOMETRY,
                               model: DielectricModel = None,
                               q: QuadratureParams = DEFAULT_QUADRATURE) -> float:
    """Lifshitz sphere-plate force in N (attractive = negative).

    Converged by order-doubling until successive estimates agree to
    q.rel_tol (plus q.abs_tol); raises ConvergenceError carrying the last
    estimate and error bound otherwise.
    """
    if model is None:
        raise TypeError("a DielectricModel is required")
    if z <= 0:
        raise ValueError(f"separation must be > 0, got {z}")
    if z / geom.R >= PROXIMITY_RATIO_MAX:
        raise ValidityError(
            f"z/R = {z / geom.R:.3g} outside the proximity regime (< {PROXIMITY_RATIO_MAX})"
        )
    order = q.base_order
    prev = _force_estimate(z, geom, model, q, order)
    for _ in range(q.max_refinements):
        order *= 2
        cur = _force_estimate(z, geom, model, q, order)
        err = abs(cur - prev)
        if err <= q.rel_tol * abs(cur) + q.abs_tol:
            return cur
        prev = cur
    raise ConvergenceError(
        f"no convergence to rel_tol={q.rel_tol} within {q.max_refinements} refinements",
        estimate=prev, error_bound=err,
    )
