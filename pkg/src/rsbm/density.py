"""Transition densities, CDF, the density jump at the skew point, and the t -> infinity limit.

The exact density from the skew level is a semi-infinite integral (over an
excursion-straddle variable b) of a time convolution of two first-passage
kernels.  Evaluation is a nested pair of one-dimensional adaptive rules:

* the inner time integral runs over (0, t) and is evaluated simultaneously
  for every outer node and every requested target point (shared adaptive
  partition, per-column error control);
* the outer integral over b is truncated where a drift-aware Gaussian
  envelope and probes of the integrand itself drop below the configured tail
  bound.

All exponential prefactors are folded into the integrand in log space, so
strongly drifted models neither overflow nor lose the tail to premature
underflow.
"""
from __future__ import annotations

import math

import numpy as np

from .core import ModelParams, erfc, erfcx
from .parallel import map_ordered
from .quadrature import DEFAULT_QUAD, QuadConfig, integrate, integrate_semi_infinite

__all__ = [
    "first_passage_kernel",
    "first_passage_kernel_laplace",
    "transition_density_origin",
    "transition_density_origin_grid",
    "transition_density",
    "transition_density_grid",
    "density_one_drift",
    "density_alternating",
    "cdf_origin",
    "cdf_origin_grid",
    "cdf_general",
    "density_jump",
    "stationary_density",
    "normalization_mass",
]

_LOG_2PI = math.log(2.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_CHUNK = 48  # grid targets evaluated per batched kernel call


# ---------------------------------------------------------------------------
# First-passage kernel


def first_passage_kernel(t: float, x: float, mu: float) -> float:
    """|x| / sqrt(2 pi t^3) * exp(-(x + mu t)^2 / (2t)); zero at x = 0."""
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t!r}")
    if x == 0.0:
        return 0.0
    return abs(x) / math.sqrt(2.0 * math.pi * t**3) * math.exp(-((x + mu * t) ** 2) / (2.0 * t))


def first_passage_kernel_laplace(q: float, x: float, mu: float) -> float:
    """Time-Laplace transform exp(-(mu + sgn(x) sqrt(2q + mu^2)) x); zero at x = 0."""
    if not q > 0.0:
        raise ValueError(f"q must be positive, got {q!r}")
    if x == 0.0:
        return 0.0
    return math.exp(-(mu + math.copysign(1.0, x) * math.hypot(mu, math.sqrt(2.0 * q))) * x)


def _log_fpk(t, x, mu):
    """Vectorised log of the first-passage kernel; -inf where x == 0."""
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x)) - 0.5 * (_LOG_2PI + 3.0 * np.log(t)) - (x + mu * t) ** 2 / (2.0 * t)


def _time_mode(x, mu):
    """Mode in t of the first-passage kernel: x^2/3 when driftless."""
    x = np.abs(x)
    msq = mu * mu
    if msq == 0.0:
        return x * x / 3.0
    return (np.sqrt(9.0 + 4.0 * msq * x * x) - 3.0) / (2.0 * msq)


def _log_density_bound(t: float, ys: float, params: ModelParams) -> float:
    """Cheap upper bound for log p(t; y), used to skip hopeless evaluations."""
    m = max(abs(params.mu_plus), abs(params.mu_minus))
    gap = max(abs(ys) - m * t, 0.0)
    pref = 2.0 * (params.mu_plus if ys > 0 else params.mu_minus) * ys
    return math.log(4.0) + pref - gap * gap / (2.0 * t) - 0.5 * math.log(t)


# ---------------------------------------------------------------------------
# The nested double integral shared by the density and the jump size


def _inner_cfg(quad: QuadConfig) -> QuadConfig:
    return QuadConfig(
        rel_tol=0.1 * quad.rel_tol,
        abs_tol=0.01 * quad.abs_tol,
        max_subdivisions=quad.max_subdivisions,
        semi_infinite_truncation_tail=quad.semi_infinite_truncation_tail,
    )


def _tau_breakpoints(t, x_up, x_down, mu_p, mu_m):
    """Shared inner breakpoints: kernel modes from both ends plus the small-argument peak."""
    m_down = _time_mode(x_down, mu_m)
    m_up = t - _time_mode(x_up, mu_p)
    small = np.minimum(0.5 * t, np.minimum(np.abs(x_up), np.abs(x_down)) ** 2 / 3.0)
    cand = np.concatenate([np.ravel(m_down), np.ravel(m_up), np.ravel(small)])
    cand = cand[(cand > 1e-12 * t) & (cand < t * (1.0 - 1e-12))]
    if cand.size == 0:
        return ()
    return np.unique(np.quantile(cand, [0.0, 0.25, 0.5, 0.75, 1.0]))


def _outer_scale(t: float, params: ModelParams, offsets_max: float) -> float:
    m = abs(params.mu_plus) + abs(params.mu_minus)
    width = min(1.0 + params.beta, 1.0 - params.beta)
    return (2.0 * m * t + 12.0 * math.sqrt(t) + offsets_max + 1.0) / width


def _outer_ladder(scale: float):
    return [scale / 64.0, scale / 16.0, scale / 4.0]


def _conv_kernel(
    t: float,
    up_off: np.ndarray,
    down_off: np.ndarray,
    log_pref: np.ndarray,
    params: ModelParams,
    quad: QuadConfig,
) -> np.ndarray:
    """exp(log_pref_j) * int_0^inf int_0^t h(t-tau; (1+b)s + A_j, mu+) h(tau; (1-b)s + C_j, -mu-) dtau ds."""
    bp, bm = 1.0 + params.beta, 1.0 - params.beta
    mu_p, mu_m = params.mu_plus, params.mu_minus
    up = np.atleast_1d(np.asarray(up_off, dtype=float))
    down = np.atleast_1d(np.asarray(down_off, dtype=float))
    pref = np.atleast_1d(np.asarray(log_pref, dtype=float))
    nc = up.size
    icfg = _inner_cfg(quad)

    def outer(bs):
        nb = bs.size
        x1 = bp * bs[:, None] + up[None, :]
        x2 = bm * bs[:, None] + down[None, :]
        pts = _tau_breakpoints(t, x1, x2, mu_p, -mu_m)
        x1f = x1.reshape(1, -1)
        x2f = x2.reshape(1, -1)
        pf = np.broadcast_to(pref[None, :], (nb, nc)).reshape(1, -1)

        def inner(taus):
            tau = taus[:, None]
            with np.errstate(over="ignore", invalid="ignore"):
                logv = pf + _log_fpk(t - tau, x1f, mu_p) + _log_fpk(tau, x2f, -mu_m)
                vals = np.exp(logv)
            return np.nan_to_num(vals, nan=0.0, posinf=0.0)

        vals, _ = integrate(inner, 0.0, t, icfg, initial_points=pts)
        return np.asarray(vals).reshape(nb, nc)

    tail_gap_p = abs(mu_p) * t
    tail_gap_m = abs(mu_m) * t

    def envelope(b):
        e1 = np.maximum(bp * b + up - tail_gap_p, 0.0)
        e2 = np.maximum(bm * b + down - tail_gap_m, 0.0)
        return float(np.exp(np.max(pref - (e1 * e1 + e2 * e2) / (2.0 * t))))

    scale = _outer_scale(t, params, float(np.max(up) + np.max(down)))
    vals, _ = integrate_semi_infinite(
        outer, 0.0, quad, envelope=envelope, scale=scale, initial_points=_outer_ladder(scale)
    )
    return np.maximum(np.atleast_1d(vals), 0.0)


# ---------------------------------------------------------------------------
# Transition density


def _origin_grid_oneside(t, ys_shifted, params, quad):
    """Density from the skew level for shifted targets all of one sign."""
    b = params.beta
    pos = ys_shifted > 0.0
    if np.all(pos):
        pref = math.log(2.0 * (1.0 + b)) + 2.0 * params.mu_plus * ys_shifted
        return _conv_kernel(t, ys_shifted, np.zeros_like(ys_shifted), pref, params, quad)
    pref = math.log(2.0 * (1.0 - b)) + 2.0 * params.mu_minus * ys_shifted
    return _conv_kernel(t, np.zeros_like(ys_shifted), -ys_shifted, pref, params, quad)


def _eval_sides(ys_shifted, one_side):
    """Split targets by sign, evaluate each side in chunks, reassemble in order."""
    ys = np.asarray(ys_shifted, dtype=float)
    out = np.empty(ys.shape)
    for mask in (ys > 0.0, ys < 0.0):
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            continue
        chunks = [idx[i : i + _CHUNK] for i in range(0, idx.size, _CHUNK)]
        results = map_ordered(lambda ch: one_side(ys[ch]), chunks)
        for ch, res in zip(chunks, results):
            out[ch] = res
    return out


def transition_density_origin_grid(t, ys, params: ModelParams, quad: QuadConfig = DEFAULT_QUAD):
    """Vectorised transition density from the skew level over a grid of targets."""
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t!r}")
    ys = np.asarray(ys, dtype=float)
    shifted = ys - params.skew_level
    if np.any(shifted == 0.0):
        raise ValueError("targets must differ from the skew level (the density jumps there)")
    return _eval_sides(shifted, lambda chunk: _origin_grid_oneside(t, chunk, params, quad))


def transition_density_origin(t: float, y: float, params: ModelParams, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """Transition density p(t; y) started at the skew level."""
    return float(transition_density_origin_grid(t, [y], params, quad)[0])


def _image_term(t, xs, ys, mu):
    """phi(y - x; mu) - exp(-2 mu x) phi(x + y; mu), exponents combined before exp."""
    direct = -((ys - xs - mu * t) ** 2) / (2.0 * t)
    image = -2.0 * mu * xs - (xs + ys - mu * t) ** 2 / (2.0 * t)
    return (np.exp(direct) - np.exp(image)) / math.sqrt(2.0 * math.pi * t)


def _general_grid_oneside(t, xs, ys_shifted, params, quad):
    b = params.beta
    mu_p, mu_m = params.mu_plus, params.mu_minus
    pos = np.all(ys_shifted > 0.0)
    if pos:
        pref = math.log(2.0 * (1.0 + b)) + 2.0 * mu_p * ys_shifted
        if xs >= 0.0:
            conv = _conv_kernel(t, xs + ys_shifted, np.zeros_like(ys_shifted), pref, params, quad)
            return conv + _image_term(t, xs, ys_shifted, mu_p)
        return _conv_kernel(t, ys_shifted, np.full_like(ys_shifted, -xs), pref, params, quad)
    pref = math.log(2.0 * (1.0 - b)) + 2.0 * mu_m * ys_shifted
    if xs > 0.0:
        return _conv_kernel(t, np.full_like(ys_shifted, xs), -ys_shifted, pref, params, quad)
    conv = _conv_kernel(t, np.zeros_like(ys_shifted), -ys_shifted - xs, pref, params, quad)
    # mirrored image pair: phi(y - x; mu-) - exp(2 mu- y) phi(-x - y; mu-)
    direct = -((ys_shifted - xs - mu_m * t) ** 2) / (2.0 * t)
    image = 2.0 * mu_m * ys_shifted - (-xs - ys_shifted - mu_m * t) ** 2 / (2.0 * t)
    return conv + (np.exp(direct) - np.exp(image)) / math.sqrt(2.0 * math.pi * t)


def transition_density_grid(t, x, ys, params: ModelParams, quad: QuadConfig = DEFAULT_QUAD):
    """Vectorised transition density p(t; x, y) over a grid of targets y."""
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t!r}")
    ys = np.asarray(ys, dtype=float)
    shifted = ys - params.skew_level
    if np.any(shifted == 0.0):
        raise ValueError("targets must differ from the skew level (the density jumps there)")
    xs = x - params.skew_level
    vals = _eval_sides(shifted, lambda chunk: _general_grid_oneside(t, xs, chunk, params, quad))
    return np.maximum(vals, 0.0)


def transition_density(t: float, x: float, y: float, params: ModelParams, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """Transition density p(t; x, y) from a general start x."""
    return float(transition_density_grid(t, x, [y], params, quad)[0])


# ---------------------------------------------------------------------------
# Closed-form special cases


def _check_one_drift_args(t: float, y: float, beta: float) -> None:
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t!r}")
    if y == 0.0:
        raise ValueError("y must be nonzero (the density jumps at the skew level)")
    if not -1.0 < beta < 1.0:
        raise ValueError(f"beta must lie strictly in (-1, 1), got {beta!r}")


def _erfc_product(arg: float, gauss_exponent: float, shifted_exponent: float) -> float:
    """exp(a2) * erfc(arg) * exp(gauss) without overflow; shifted = gauss + arg^2."""
    if arg >= 0.0:
        return erfcx(arg) * math.exp(gauss_exponent)
    return erfc(arg) * math.exp(shifted_exponent)


def density_one_drift(t: float, y: float, mu: float, beta: float) -> float:
    """Closed-form density for equal drifts (mu_minus = mu_plus = mu), start at the skew level."""
    _check_one_drift_args(t, y, beta)
    side = 1.0 + beta if y > 0.0 else 1.0 - beta
    gauss = -((y - mu * t) ** 2) / (2.0 * t)
    arg = (abs(y) + beta * mu * t) / math.sqrt(2.0 * t)
    # arg^2 + gauss simplifies to mu (1 +- beta) y + mu^2 t (beta^2 - 1) / 2
    shifted = mu * side * y + mu * mu * t * (beta * beta - 1.0) / 2.0
    term1 = side / (_SQRT_2PI * math.sqrt(t)) * math.exp(gauss)
    term2 = side * beta * mu / 2.0 * _erfc_product(arg, gauss, shifted)
    return max(term1 - term2, 0.0)


def density_alternating(t: float, y: float, mu: float, beta: float) -> float:
    """Closed-form density for alternating drifts (-mu_minus = mu_plus = mu), start at the skew level."""
    _check_one_drift_args(t, y, beta)
    if y > 0.0:
        side = 1.0 + beta
        gauss = -((y - mu * t) ** 2) / (2.0 * t)
        shifted = gauss + (y + mu * t) ** 2 / (2.0 * t)  # = 2 mu y
    else:
        side = 1.0 - beta
        gauss = -((y + mu * t) ** 2) / (2.0 * t)
        shifted = gauss + (-y + mu * t) ** 2 / (2.0 * t)  # = -2 mu y
    arg = (abs(y) + mu * t) / math.sqrt(2.0 * t)
    term1 = side / _SQRT_2PI / math.sqrt(t) * math.exp(gauss)
    term2 = side * mu / 2.0 * _erfc_product(arg, gauss, shifted)
    return max(term1 - term2, 0.0)


# ---------------------------------------------------------------------------
# CDF from the skew level


def _cdf_bracket(tau, arg, mu, sign):
    """exp(-arg^2)/sqrt(2 pi tau) + sign*(mu/2)*erfc(arg), a first-passage tail mass.

    Equals int_c^infty h(tau; w, -sign*mu) dw when arg = (c - sign*mu*tau)/sqrt(2 tau),
    so it is nonnegative by construction; the erfc term is routed through erfcx
    for arg >= 0 so deep tails keep relative accuracy.
    """
    shape = np.broadcast_shapes(np.shape(tau), np.shape(arg))
    base = np.broadcast_to(1.0 / np.sqrt(2.0 * math.pi * tau), shape)
    arg = np.broadcast_to(arg, shape)
    out = np.empty(shape)
    nn = arg >= 0.0
    a = arg[nn]
    out[nn] = np.exp(-a * a) * np.maximum(base[nn] + sign * (mu / 2.0) * erfcx(a), 0.0)
    a = arg[~nn]
    out[~nn] = np.maximum(np.exp(-a * a) * base[~nn] + sign * (mu / 2.0) * erfc(a), 0.0)
    return out


def _cdf_mass_below(t, zs_shifted, params, quad):
    """P(X_t - a <= z') for z' <= 0, start at the skew level."""
    bp, bm = 1.0 + params.beta, 1.0 - params.beta
    mu_p, mu_m = params.mu_plus, params.mu_minus
    zs = np.asarray(zs_shifted, dtype=float)
    nc = zs.size
    icfg = _inner_cfg(quad)

    def outer(bs):
        nb = bs.size
        x1 = bp * bs  # (nb,)
        c = bm * bs[:, None] - zs[None, :]  # (nb, nc)
        pts_kernel = _tau_breakpoints(t, x1[:, None], np.maximum(c, 1e-300), mu_p, mu_m)
        cf = c.reshape(1, -1)
        x1f = np.broadcast_to(x1[:, None], (nb, nc)).reshape(1, -1)
        pref = 2.0 * mu_m * bm * bs
        pf = np.broadcast_to(pref[:, None], (nb, nc)).reshape(1, -1)

        def inner(taus):
            tau = taus[:, None]
            arg = (cf + mu_m * tau) / np.sqrt(2.0 * tau)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                tail = _cdf_bracket(tau, arg, mu_m, -1.0)
                logh = pf + _log_fpk(t - tau, x1f, mu_p)
                vals = np.exp(logh) * tail
            return np.nan_to_num(vals, nan=0.0, posinf=0.0)

        vals, _ = integrate(inner, 0.0, t, icfg, initial_points=pts_kernel)
        return np.asarray(vals).reshape(nb, nc)

    def envelope(b):
        growth = 2.0 * mu_m * bm * b
        e1 = max(bp * b - abs(mu_p) * t, 0.0)
        e2 = max(bm * b + float(np.min(-zs)) - abs(mu_m) * t, 0.0)
        return math.exp(growth - (e1 * e1 + e2 * e2) / (2.0 * t))

    scale = _outer_scale(t, params, float(np.max(-zs)) + 4.0 * max(params.mu_minus, 0.0) * t)
    vals, _ = integrate_semi_infinite(
        outer, 0.0, quad, envelope=envelope, scale=scale, initial_points=_outer_ladder(scale)
    )
    return 2.0 * bm * np.clip(np.atleast_1d(vals), 0.0, None)


def _cdf_mass_above(t, zs_shifted, params, quad):
    """P(X_t - a > z') for z' >= 0, start at the skew level."""
    bp, bm = 1.0 + params.beta, 1.0 - params.beta
    mu_p, mu_m = params.mu_plus, params.mu_minus
    zs = np.asarray(zs_shifted, dtype=float)
    nc = zs.size
    icfg = _inner_cfg(quad)

    def outer(bs):
        nb = bs.size
        x1 = bm * bs
        c = bp * bs[:, None] + zs[None, :]
        pts_kernel = _tau_breakpoints(t, x1[:, None], np.maximum(c, 1e-300), -mu_m, -mu_p)
        cf = c.reshape(1, -1)
        x1f = np.broadcast_to(x1[:, None], (nb, nc)).reshape(1, -1)
        pref = -2.0 * mu_p * bp * bs
        pf = np.broadcast_to(pref[:, None], (nb, nc)).reshape(1, -1)

        def inner(taus):
            tau = taus[:, None]
            arg = (cf - mu_p * tau) / np.sqrt(2.0 * tau)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                tail = _cdf_bracket(tau, arg, mu_p, 1.0)
                logh = pf + _log_fpk(t - tau, x1f, -mu_m)
                vals = np.exp(logh) * tail
            return np.nan_to_num(vals, nan=0.0, posinf=0.0)

        vals, _ = integrate(inner, 0.0, t, icfg, initial_points=pts_kernel)
        return np.asarray(vals).reshape(nb, nc)

    def envelope(b):
        growth = -2.0 * mu_p * bp * b
        e1 = max(bm * b - abs(mu_m) * t, 0.0)
        e2 = max(bp * b + float(np.min(zs)) - abs(mu_p) * t, 0.0)
        return math.exp(growth - (e1 * e1 + e2 * e2) / (2.0 * t))

    scale = _outer_scale(t, params, float(np.max(zs)) + 4.0 * max(-params.mu_plus, 0.0) * t)
    vals, _ = integrate_semi_infinite(
        outer, 0.0, quad, envelope=envelope, scale=scale, initial_points=_outer_ladder(scale)
    )
    return 2.0 * bp * np.clip(np.atleast_1d(vals), 0.0, None)


def cdf_origin_grid(t, zs, params: ModelParams, quad: QuadConfig = DEFAULT_QUAD):
    """Vectorised CDF P(X_t <= z) from the skew level; continuous across the skew point."""
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t!r}")
    zs = np.asarray(zs, dtype=float)
    shifted = zs - params.skew_level
    out = np.empty(shifted.shape)
    below = shifted <= 0.0
    for mask, func, complement in ((below, _cdf_mass_below, False), (~below, _cdf_mass_above, True)):
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            continue
        chunks = [idx[i : i + _CHUNK] for i in range(0, idx.size, _CHUNK)]
        results = map_ordered(lambda ch: func(t, shifted[ch], params, quad), chunks)
        for ch, res in zip(chunks, results):
            out[ch] = 1.0 - res if complement else res
    return np.clip(out, 0.0, 1.0)


def cdf_origin(t: float, z: float, params: ModelParams, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """P(X_t <= z) started from the skew level."""
    return float(cdf_origin_grid(t, [z], params, quad)[0])


def cdf_general(t: float, x: float, z: float, params: ModelParams, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """P(X_t <= z) from a general start, by numerical integration of the density.

    Plumbing on top of ``transition_density_grid``; no closed form is provided
    for general starts.
    """
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t!r}")
    a = params.skew_level
    m = max(abs(params.mu_plus), abs(params.mu_minus))
    reach = m * t + 10.0 * math.sqrt(t) + 2.0
    lo = min(x, a) - reach
    hi = max(x, a) + reach

    def f(ys):
        ys = np.where(ys == a, a + 1e-12, ys)
        return transition_density_grid(t, x, ys, params, quad)

    if z <= lo:
        return 0.0
    if z >= hi:
        return 1.0
    if z <= 0.5 * (lo + hi):
        val, _ = integrate(f, lo, z, quad, initial_points=(a, x))
        return float(min(max(val, 0.0), 1.0))
    val, _ = integrate(f, z, hi, quad, initial_points=(a, x))
    return float(min(max(1.0 - val, 0.0), 1.0))


def density_jump(t: float, params: ModelParams, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """Jump p(t; 0+) - p(t; 0-) of the density at the skew level; sign follows beta."""
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t!r}")
    kernel = _conv_kernel(t, np.zeros(1), np.zeros(1), np.zeros(1), params, quad)
    return 4.0 * params.beta * float(kernel[0])


def stationary_density(y: float, params: ModelParams) -> float:
    """t -> infinity density, defined for inward drifts mu_minus > 0 > mu_plus."""
    from .exit_times import UnsupportedRegimeError

    mp, mm, b = params.mu_plus, params.mu_minus, params.beta
    if not (mm > 0.0 and mp < 0.0):
        raise UnsupportedRegimeError("stationary density requires mu_minus > 0 and mu_plus < 0")
    ys = y - params.skew_level
    if ys == 0.0:
        raise ValueError("y must differ from the skew level (the density jumps there)")
    dlt = (1.0 + b) * mm - (1.0 - b) * mp
    if ys > 0.0:
        return -2.0 * (1.0 + b) * mp * mm / dlt * math.exp(2.0 * mp * ys)
    return -2.0 * (1.0 - b) * mp * mm / dlt * math.exp(2.0 * mm * ys)


def normalization_mass(
    t: float,
    params: ModelParams,
    quad: QuadConfig = DEFAULT_QUAD,
    half_width: float = 20.0,
    x: float | None = None,
) -> float:
    """integral of the transition density over [a - half_width, a + half_width]."""
    a = params.skew_level
    start = a if x is None else x

    def f(ys):
        ys = np.where(ys == a, a + 1e-12, ys)
        return transition_density_grid(t, start, ys, params, quad)

    pts = (a,) if x is None or x == a else (a, start)
    val, _ = integrate(f, a - half_width, a + half_width, quad, initial_points=pts)
    return float(val)
