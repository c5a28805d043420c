"""One-sample Kolmogorov-Smirnov test against an arbitrary callable CDF."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["KsResult", "ks_statistic", "ks_pvalue", "ks_test"]


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n: int


def ks_statistic(samples, cdf) -> float:
    """Sup distance between the empirical CDF of the samples and the reference CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("ks_statistic requires a non-empty sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(max(d_plus, d_minus))


def ks_pvalue(d: float, n: int) -> float:
    """Asymptotic Kolmogorov tail with Stephens' finite-sample argument correction."""
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"the statistic must lie in [0, 1], got {d!r}")
    if n < 1:
        raise ValueError("n must be a positive integer")
    sqrt_n = math.sqrt(n)
    lam = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d
    if lam <= 0.2:
        # the tail sum equals 1 to double precision here
        return 1.0
    total = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * lam * lam)
        if term < 1e-12:
            break
        total += sign * term
        sign = -sign
        k += 1
    return float(min(max(2.0 * total, 0.0), 1.0))


def ks_test(samples, cdf) -> KsResult:
    """Convenience wrapper returning the statistic, p-value and sample size."""
    samples = np.asarray(samples, dtype=float)
    d = ks_statistic(samples, cdf)
    return KsResult(statistic=d, p_value=ks_pvalue(d, samples.size), n=samples.size)
