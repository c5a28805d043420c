"""Resolvent densities: the law of the process at an independent exponential time.

All formulas are closed-form combinations of exponentials; the barrier
variants subtract exit-weighted copies.  ``laplace_density_oracle`` is the
slow numerical transform of the time-domain density, kept here to arbitrate
between the two routes in test suites.
"""
from __future__ import annotations

import math

from . import density as _density
from .core import ModelParams
from .exit_times import one_sided_hitting_laplace, two_sided_exit_down, two_sided_exit_up
from .quadrature import DEFAULT_QUAD, QuadConfig, integrate

__all__ = [
    "potential_density_origin",
    "potential_density",
    "potential_density_two_barriers",
    "potential_density_one_barrier",
    "laplace_density_oracle",
]


def _check_q(q: float) -> None:
    if not q > 0.0:
        raise ValueError(f"q must be positive, got {q!r}")


def _deltas(params: ModelParams, q: float) -> tuple[float, float]:
    return (
        math.hypot(params.mu_minus, math.sqrt(2.0 * q)),
        math.hypot(params.mu_plus, math.sqrt(2.0 * q)),
    )


def _denominator(params: ModelParams, q: float) -> float:
    dm, dp = _deltas(params, q)
    b = params.beta
    return (1.0 + b) * params.mu_plus - (1.0 - b) * params.mu_minus + (1.0 + b) * dp + (1.0 - b) * dm


def potential_density_origin(y: float, params: ModelParams, q: float) -> float:
    """Density of X at an independent Exp(q) time, started at the skew level."""
    _check_q(q)
    ys = y - params.skew_level
    if ys == 0.0:
        raise ValueError("y must differ from the skew level (the density jumps there)")
    dm, dp = _deltas(params, q)
    big_d = _denominator(params, q)
    b = params.beta
    if ys > 0.0:
        return 2.0 * (1.0 + b) * q / big_d * math.exp((params.mu_plus - dp) * ys)
    return 2.0 * (1.0 - b) * q / big_d * math.exp((params.mu_minus + dm) * ys)


def potential_density(x: float, y: float, params: ModelParams, q: float) -> float:
    """Density of X at an independent Exp(q) time from a general start x.

    Four branches by the signs of x and y relative to the skew level; both
    x-branches agree at x equal to the skew level, where they reduce to
    ``potential_density_origin``.
    """
    _check_q(q)
    a = params.skew_level
    xs, ys = x - a, y - a
    if ys == 0.0:
        raise ValueError("y must differ from the skew level (the density jumps there)")
    dm, dp = _deltas(params, q)
    big_d = _denominator(params, q)
    b = params.beta
    mp, mm = params.mu_plus, params.mu_minus
    if ys > 0.0:
        if xs >= 0.0:
            free = math.exp(mp * (ys - xs) - abs(ys - xs) * dp)
            image = math.exp(mp * (ys - xs) - (xs + ys) * dp)
            return (q / dp) * (free - image) + 2.0 * (1.0 + b) * q / big_d * image
        return 2.0 * (1.0 + b) * q / big_d * math.exp((-mm + dm) * xs + (mp - dp) * ys)
    if xs >= 0.0:
        return 2.0 * (1.0 - b) * q / big_d * math.exp((-mp - dp) * xs + (mm + dm) * ys)
    free = math.exp(mm * (ys - xs) - abs(ys - xs) * dm)
    image = math.exp(mm * (ys - xs) + (xs + ys) * dm)
    return (q / dm) * (free - image) + 2.0 * (1.0 - b) * q / big_d * image


def potential_density_two_barriers(
    x: float, y: float, b_minus: float, b_plus: float, params: ModelParams, q: float
) -> float:
    """Resolvent density killed on first exit from (b_minus, b_plus)."""
    _check_q(q)
    a = params.skew_level
    if not (b_minus < a < b_plus):
        raise ValueError("barriers must satisfy b_minus < skew_level < b_plus")
    if not (b_minus <= x <= b_plus):
        raise ValueError("start must satisfy b_minus <= x <= b_plus")
    val = (
        potential_density(x, y, params, q)
        - two_sided_exit_down(x, b_minus, b_plus, params, q)
        * potential_density(b_minus, y, params, q)
        - two_sided_exit_up(x, b_minus, b_plus, params, q)
        * potential_density(b_plus, y, params, q)
    )
    return max(val, 0.0)


def potential_density_one_barrier(
    x: float, y: float, b_minus: float, params: ModelParams, q: float
) -> float:
    """Resolvent density killed on first passage to b_minus (start above it)."""
    _check_q(q)
    if x < b_minus:
        raise ValueError("start must satisfy x >= b_minus")
    val = potential_density(x, y, params, q) - one_sided_hitting_laplace(
        x, b_minus, params, q
    ) * potential_density(b_minus, y, params, q)
    return max(val, 0.0)


def laplace_density_oracle(
    y: float,
    params: ModelParams,
    q: float,
    t_max: float,
    quad: QuadConfig = DEFAULT_QUAD,
) -> float:
    """Numerical transform int_0^t_max q e^{-qt} p(t; y) dt of the transition density.

    Test-suite oracle for the closed-form potential densities.  Requires
    q * t_max >= 25 so the neglected tail stays below 1e-10.
    """
    _check_q(q)
    if q * t_max < 25.0:
        raise ValueError(f"need q * t_max >= 25 for a negligible tail, got {q * t_max}")
    ys = y - params.skew_level

    def f(ts):
        out = []
        for t in ts:
            t = float(t)
            if _density._log_density_bound(t, ys, params) < -745.0:
                out.append(0.0)
                continue
            out.append(
                q * math.exp(-q * t) * _density.transition_density_origin(t, y, params, quad)
            )
        return out

    pts = sorted(
        {
            min(t_max / 2.0, ys * ys / 3.0),
            min(t_max / 2.0, abs(ys)),
            min(t_max / 2.0, 1.0),
            t_max / 4.0,
        }
    )
    value, _ = integrate(f, 0.0, t_max, quad, initial_points=pts)
    return value
