"""Exit-time Laplace transforms and their q -> 0 closed forms.

The q > 0 operations are ratios of the Wronskian form built from the two
fundamental solutions.  The q -> 0 quantities (escape probabilities, hitting
probabilities, expected hitting times) are implemented as hand-simplified
closed forms: evaluating the q > 0 formulas at tiny q is ill-conditioned
because one root of each characteristic pair degenerates to 0.
"""
from __future__ import annotations

import math

from .core import ModelParams, _g1_terms, _g2_terms, _scaled_sum, _wronskian_scaled, coeffs, roots

__all__ = [
    "UnsupportedRegimeError",
    "two_sided_exit_up",
    "two_sided_exit_down",
    "one_sided_hitting_laplace",
    "escape_probabilities",
    "hitting_probability",
    "expected_hitting_time",
]


class UnsupportedRegimeError(ValueError):
    """The requested quantity has no closed form in this drift-sign regime."""


def _check_interval(x: float, y: float, z: float) -> None:
    if y >= z:
        raise ValueError(f"need y < z, got y={y}, z={z}")
    if not (y <= x <= z):
        raise ValueError(f"need y <= x <= z, got x={x}, y={y}, z={z}")


def _w_ratio(xn: float, yn: float, xd: float, yd: float, params: ModelParams, q: float) -> float:
    """w(xn, yn) / w(xd, yd) with the dominant exponential factored out."""
    mn, sn = _wronskian_scaled(xn, yn, params, q)
    md, sd = _wronskian_scaled(xd, yd, params, q)
    return (mn / md) * math.exp(sn - sd)


def two_sided_exit_up(x: float, y: float, z: float, params: ModelParams, q: float) -> float:
    """E_x[exp(-q tau_z); tau_z < tau_y] for the interval (y, z), y <= x <= z."""
    _check_interval(x, y, z)
    a = params.skew_level
    return _w_ratio(x - a, y - a, z - a, y - a, params, q)


def two_sided_exit_down(x: float, y: float, z: float, params: ModelParams, q: float) -> float:
    """E_x[exp(-q tau_y); tau_y < tau_z] for the interval (y, z), y <= x <= z."""
    _check_interval(x, y, z)
    a = params.skew_level
    return _w_ratio(x - a, z - a, y - a, z - a, params, q)


def one_sided_hitting_laplace(x: float, r: float, params: ModelParams, q: float) -> float:
    """E_x[exp(-q tau_r)], branching on the positions of x and r around the skew level."""
    a = params.skew_level
    xs, rs = x - a, r - a
    rt = roots(params, q)
    cf = coeffs(params, q)
    if xs >= rs:
        if rs > 0.0:
            return math.exp(rt.rho1_plus * (xs - rs))
        num, sn = _scaled_sum(_g1_terms(xs, rt, cf))
        den, sd = _scaled_sum(_g1_terms(rs, rt, cf))
    else:
        if rs <= 0.0:
            return math.exp(rt.rho2_minus * (xs - rs))
        num, sn = _scaled_sum(_g2_terms(xs, rt, cf))
        den, sd = _scaled_sum(_g2_terms(rs, rt, cf))
    return (num / den) * math.exp(sn - sd)


def escape_probabilities(x: float, params: ModelParams) -> tuple[float, float]:
    """(P_x[X_t -> +inf], P_x[X_t -> -inf]) for outward drifts mu_plus > 0 > mu_minus."""
    mp, mm, b = params.mu_plus, params.mu_minus, params.beta
    if not (mp > 0.0 and mm < 0.0):
        raise UnsupportedRegimeError(
            "escape probabilities require mu_plus > 0 and mu_minus < 0"
        )
    xs = x - params.skew_level
    delta = (1.0 + b) * mp - (1.0 - b) * mm
    if xs < 0.0:
        up = (1.0 + b) * mp * math.exp(-2.0 * mm * xs) / delta
        return up, 1.0 - up
    down = -(1.0 - b) * mm * math.exp(-2.0 * mp * xs) / delta
    return 1.0 - down, down


def hitting_probability(x: float, z: float, params: ModelParams) -> float:
    """P_x(tau_z < infinity).

    Inward drifts (mu_minus > 0 > mu_plus): identically 1.  Outward drifts
    (mu_plus > 0 > mu_minus): the q -> 0 limits of the one-sided transforms.
    Levels on the same side of the skew point as the start reduce to the
    single-drift first-passage probability.  Other sign regimes are refused.
    """
    mp, mm, b = params.mu_plus, params.mu_minus, params.beta
    if mm > 0.0 and mp < 0.0:
        return 1.0
    if not (mp > 0.0 and mm < 0.0):
        raise UnsupportedRegimeError(
            "hitting_probability covers only inward (mu_minus > 0 > mu_plus) "
            "or outward (mu_plus > 0 > mu_minus) drift regimes"
        )
    xs = x - params.skew_level
    zs = z - params.skew_level
    if xs == zs:
        return 1.0
    delta = (1.0 + b) * mp - (1.0 - b) * mm
    if xs < zs:
        # hitting upward against mu_minus < 0 below / with mu_plus > 0 above
        if zs <= 0.0:
            return math.exp(-2.0 * mm * (xs - zs))
        den = delta + (1.0 - b) * mm * math.exp(-2.0 * mp * zs)
        if xs <= 0.0:
            return (1.0 + b) * mp * math.exp(-2.0 * mm * xs) / den
        return (delta + (1.0 - b) * mm * math.exp(-2.0 * mp * xs)) / den
    # hitting downward
    if zs > 0.0:
        return math.exp(-2.0 * mp * (xs - zs))
    den = delta - (1.0 + b) * mp * math.exp(-2.0 * mm * zs)
    if xs >= 0.0:
        return -(1.0 - b) * mm * math.exp(-2.0 * mp * xs) / den
    return (delta - (1.0 + b) * mp * math.exp(-2.0 * mm * xs)) / den


def expected_hitting_time(x: float, z: float, params: ModelParams) -> float:
    """E_x[tau_z] for inward drifts mu_minus > 0, mu_plus < 0.

    A vanishing drift on either side makes the expectation infinite; drifts of
    the wrong sign are refused rather than analytically continued.
    """
    mp, mm, b = params.mu_plus, params.mu_minus, params.beta
    if mm < 0.0 or mp > 0.0:
        raise UnsupportedRegimeError(
            "expected_hitting_time requires mu_minus >= 0 and mu_plus <= 0"
        )
    xs = x - params.skew_level
    zs = z - params.skew_level
    if xs == zs:
        return 0.0
    if mm == 0.0 or mp == 0.0:
        return math.inf
    dlt = (1.0 + b) * mm - (1.0 - b) * mp
    if xs < zs:
        if zs >= 0.0 and xs <= 0.0:
            num = 2.0 * (1.0 + b) * (mm * mp * zs - mp * mp * xs) + dlt * math.expm1(-2.0 * mp * zs)
            return num / (2.0 * mm * mp * mp * (1.0 + b))
        if xs > 0.0:
            diff = math.exp(-2.0 * mp * xs) * math.expm1(-2.0 * mp * (zs - xs))
            num = 2.0 * (1.0 + b) * mm * mp * (zs - xs) + dlt * diff
            return num / (2.0 * mm * mp * mp * (1.0 + b))
        # xs < zs < 0: single-drift passage upward, below the skew level throughout
        return (zs - xs) / mm
    if zs <= 0.0 and xs >= 0.0:
        num = 2.0 * (1.0 - b) * (mm * mp * zs - mm * mm * xs) - dlt * math.expm1(-2.0 * mm * zs)
        return num / (2.0 * mm * mm * mp * (1.0 - b))
    if xs < 0.0:
        diff = math.exp(-2.0 * mm * zs) * math.expm1(-2.0 * mm * (xs - zs))
        num = 2.0 * mm * mp * (1.0 - b) * (zs - xs) + dlt * diff
        return num / (2.0 * mm * mm * mp * (1.0 - b))
    # 0 < zs < xs: single-drift passage downward, above the skew level throughout
    return (xs - zs) / (-mp)
