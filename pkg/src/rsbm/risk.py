"""Value-at-Risk and Conditional Value-at-Risk of the fitted loss law.

Three routes: closed forms on the truncated-normal mixture, linear
interpolation of a tabulated CDF, and empirical order statistics of
Monte-Carlo samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .sampler import CdfTable, MixtureTruncatedNormal, mixture_quantile

__all__ = ["RiskReport", "var_mixture", "cvar_mixture", "var_from_cdf", "mc_var_cvar"]


@dataclass(frozen=True)
class RiskReport:
    """One confidence level's VaR/CVaR from every estimator."""

    confidence: float
    var_formula: float
    cvar_formula: float
    var_interp: float
    var_mc: float
    cvar_mc: float

    CSV_HEADER = "confidence,var_formula,cvar_formula,var_interp,var_mc,cvar_mc"

    def csv_row(self) -> str:
        return ",".join(
            format(v, ".17g")
            for v in (
                self.confidence,
                self.var_formula,
                self.cvar_formula,
                self.var_interp,
                self.var_mc,
                self.cvar_mc,
            )
        )


def var_mixture(mtn: MixtureTruncatedNormal, q: float) -> float:
    """Quantile of the mixture at confidence q: the exact inverse of its CDF."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {q!r}")
    return float(mixture_quantile(q, mtn))


def cvar_mixture(mtn: MixtureTruncatedNormal, q: float) -> float:
    """Tail mean E[L | L >= VaR_q(L)], defined on the upper branch q > alpha."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {q!r}")
    if q <= mtn.alpha:
        raise ValueError(
            f"cvar_mixture is defined only for q > alpha ({mtn.alpha:.6g}); got q={q}"
        )
    v = var_mixture(mtn, q)
    z_star = (v - mtn.mu2) / mtn.sigma2
    z0 = -mtn.mu2 / mtn.sigma2
    log_phi = -0.5 * z_star * z_star - 0.5 * math.log(2.0 * math.pi)
    return mtn.mu2 + mtn.sigma2 * (1.0 - mtn.alpha) / (1.0 - q) * math.exp(
        log_phi - _sp.log_ndtr(-z0)
    )


def var_from_cdf(cdf_table: CdfTable, q: float) -> float:
    """Piecewise-linear inverse of a tabulated CDF at level q."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {q!r}")
    return float(cdf_table.quantile(q))


def mc_var_cvar(samples, q: float) -> tuple[float, float]:
    """Empirical VaR (order statistic at ceil(q n), ties to the lower value) and tail mean."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {q!r}")
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < math.ceil(1.0 / (1.0 - q)):
        raise ValueError(
            f"need at least ceil(1/(1-q)) = {math.ceil(1.0 / (1.0 - q))} samples, got {n}"
        )
    k = max(1, math.ceil(q * n - 1e-12))
    var = float(x[k - 1])
    tail = x[x >= var]
    if tail.size == 0:
        raise ValueError("empty tail beyond the empirical quantile")
    return var, float(tail.mean())
