"""Kolmogorov-Smirnov goodness of fit against an analytic CDF."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

CdfFunc = Callable[[np.ndarray], np.ndarray]

DEFAULT_SAMPLE_SIZE = 10_000


class EmpiricalCDF:
    """Right-continuous step function of a sample: ``k/v`` at the k-th order statistic."""

    def __init__(self, samples) -> None:
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0:
            raise DomainError("empirical CDF needs at least one sample")
        if np.any(np.isnan(x)):
            raise DomainError("samples contain NaN")
        self.points = x

    @property
    def size(self) -> int:
        return self.points.size

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = np.searchsorted(self.points, z, side="right") / self.points.size
        return float(out) if out.ndim == 0 else out


def empirical_cdf(samples) -> EmpiricalCDF:
    return EmpiricalCDF(samples)


def ks_statistic(samples, analytic_cdf: CdfFunc) -> float:
    """Two-sided sup distance, evaluated on both sides of every jump."""
    x = samples.points if isinstance(samples, EmpiricalCDF) else np.sort(np.asarray(samples, dtype=float).ravel())
    v = x.size
    if v == 0:
        raise DomainError("KS statistic needs at least one sample")
    f = np.asarray(analytic_cdf(x), dtype=float)
    k = np.arange(1, v + 1)
    return float(max(np.max(k / v - f), np.max(f - (k - 1) / v), 0.0))


def critical_value(alpha: float, v: int) -> float:
    """Asymptotic critical value ``sqrt(-ln(alpha/2) / (2 v))``."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if v < 1:
        raise DomainError("sample size must be at least 1")
    return math.sqrt(-math.log(alpha / 2.0) / (2.0 * v))


@dataclass(frozen=True)
class KSReport:
    statistic: float
    critical: float
    sample_size: int
    alpha: float

    @property
    def accepted(self) -> bool:
        return self.statistic < self.critical


def ks_test(samples, analytic_cdf: CdfFunc, alpha: float = 0.05) -> KSReport:
    ecdf = samples if isinstance(samples, EmpiricalCDF) else EmpiricalCDF(samples)
    stat = ks_statistic(ecdf, analytic_cdf)
    return KSReport(stat, critical_value(alpha, ecdf.size), ecdf.size, alpha)
