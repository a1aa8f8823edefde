"""The squared Fisher-Snedecor F variate.

The instantaneous SNR ``gamma = X1 / X2`` where ``X1 ~ Gamma(m, gamma_bar/m)``
models multipath fading and ``X2 ~ Gamma(m_s, 1/(m_s - 1))`` models
shadowing.  With this scaling ``E[gamma] = gamma_bar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentMomentError, DomainError, ParameterError
from .specfun import inc_beta_pair, log_beta, sample_gamma


@dataclass(frozen=True)
class FisherFParams:
    gamma_bar: float
    m: float
    m_s: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma_bar) and self.gamma_bar > 0):
            raise ParameterError(f"gamma_bar must be positive, got {self.gamma_bar}")
        if not (math.isfinite(self.m) and self.m > 0.5):
            raise ParameterError(f"m must exceed 1/2, got {self.m}")
        if not (math.isfinite(self.m_s) and self.m_s > 1):
            raise ParameterError(f"m_s must exceed 1, got {self.m_s}")

    @property
    def gamma_bar_db(self) -> float:
        return 10.0 * math.log10(self.gamma_bar)

    def scaled(self, factor: float) -> "FisherFParams":
        return FisherFParams(self.gamma_bar * factor, self.m, self.m_s)


def from_db(gamma_bar_db: float, m: float, m_s: float) -> FisherFParams:
    return FisherFParams(10.0 ** (gamma_bar_db / 10.0), m, m_s)


def _as_nonneg(gamma) -> np.ndarray:
    g = np.asarray(gamma, dtype=float)
    if np.any(~(g >= 0)):
        raise DomainError("SNR argument must be non-negative")
    return g


def pdf(p: FisherFParams, gamma):
    g = _as_nonneg(gamma)
    m, ms = p.m, p.m_s
    w = (ms - 1.0) * p.gamma_bar
    with np.errstate(divide="ignore", invalid="ignore"):
        shape_term = (m - 1.0) * np.log(g) if m != 1.0 else np.zeros_like(g)
        log_f = (m * math.log(m) + ms * math.log(w) - log_beta(m, ms)
                 + shape_term - (m + ms) * np.log(m * g + w))
    out = np.exp(log_f)
    return float(out) if out.ndim == 0 else out


def cdf(p: FisherFParams, gamma):
    """Closed form ``I_x(m, m_s)`` at ``x = m*gamma / (m*gamma + (m_s-1)*gamma_bar)``."""
    g = _as_nonneg(gamma)
    w = (p.m_s - 1.0) * p.gamma_bar
    with np.errstate(invalid="ignore"):
        denom = p.m * g + w
        x = np.where(np.isinf(g), 1.0, p.m * g / denom)
        y = np.where(np.isinf(g), 0.0, w / denom)
    return inc_beta_pair(x, y, p.m, p.m_s)


def moment(p: FisherFParams, n: float) -> float:
    """``E[gamma^n]``; finite for ``-m < n < m_s``.  Real ``n`` is allowed."""
    if n >= p.m_s:
        raise DivergentMomentError(f"moment of order {n} diverges for m_s = {p.m_s}")
    if n <= -p.m:
        raise DivergentMomentError(f"moment of order {n} diverges for m = {p.m}")
    if n == 0:
        return 1.0
    log_scale = math.log((p.m_s - 1.0) * p.gamma_bar / p.m)
    return math.exp(n * log_scale + log_beta(p.m + n, p.m_s - n) - log_beta(p.m, p.m_s))


def sample(p: FisherFParams, rng, size=None):
    """Draws built as the ratio of two gamma variates."""
    x1 = sample_gamma(p.m, p.gamma_bar / p.m, rng, size)
    x2 = sample_gamma(p.m_s, 1.0 / (p.m_s - 1.0), rng, size)
    return x1 / x2
