"""Exact statistics of ratios of products of squared F variates.

For ``Z = prod(gamma_1) / prod(gamma_2)`` the Mellin transform factorises,

    E[Z^s] = K^s prod Gamma(m_1 + s) Gamma(m_s1 - s) Gamma(m_2 - s) Gamma(m_s2 + s)
             / (B_1 B_2),

with ``K = gbar_1 A_2 / (gbar_2 A_1)``, so PDF, CDF and MGF are Mellin-Barnes
integrals handled by :mod:`fratio.mellin`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import DomainError
from .fisher_f import FisherFParams, sample
from .mellin import (
    ContourPolicy,
    GammaRatioKernel,
    eval_contour_many,
    leading_term,
)
from .specfun import gauss_2f1, log_beta

KernelKind = Literal["pdf", "cdf", "mgf"]


@dataclass(frozen=True)
class RatioSpec:
    numerator: tuple[FisherFParams, ...]
    denominator: tuple[FisherFParams, ...] = ()

    def __post_init__(self) -> None:
        num = tuple(self.numerator)
        den = tuple(self.denominator)
        if not num:
            raise DomainError("the numerator needs at least one factor")
        for p in num + den:
            if not isinstance(p, FisherFParams):
                raise DomainError("factors must be FisherFParams")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @property
    def delta1(self) -> tuple[float, ...]:
        return tuple(p.m for p in self.numerator)

    @property
    def delta2(self) -> tuple[float, ...]:
        return tuple(p.m for p in self.denominator)

    @property
    def e1(self) -> tuple[float, ...]:
        return tuple(p.m_s for p in self.numerator)

    @property
    def e2(self) -> tuple[float, ...]:
        return tuple(p.m_s for p in self.denominator)

    @staticmethod
    def _log_a(factors) -> float:
        return sum(math.log(p.m / (p.m_s - 1.0)) for p in factors)

    @staticmethod
    def _log_b(factors) -> float:
        return sum(math.lgamma(p.m) + math.lgamma(p.m_s) for p in factors)

    @property
    def log_a1(self) -> float:
        return self._log_a(self.numerator)

    @property
    def log_a2(self) -> float:
        return self._log_a(self.denominator)

    @property
    def log_b1(self) -> float:
        return self._log_b(self.numerator)

    @property
    def log_b2(self) -> float:
        return self._log_b(self.denominator)

    @property
    def gamma_bar1(self) -> float:
        return math.prod(p.gamma_bar for p in self.numerator)

    @property
    def gamma_bar2(self) -> float:
        return math.prod(p.gamma_bar for p in self.denominator)

    @property
    def log_scale(self) -> float:
        """``log K``: the Mellin transform is ``K^s`` times gamma factors."""
        return (math.log(self.gamma_bar1) - math.log(self.gamma_bar2)
                + self.log_a2 - self.log_a1)

    def inverted(self) -> "RatioSpec":
        """Spec of ``1/Z``; needs a non-empty denominator."""
        if not self.denominator:
            raise DomainError("cannot invert a spec with an empty denominator")
        return RatioSpec(self.denominator, self.numerator)


def build_kernel(spec: RatioSpec, kind: KernelKind) -> GammaRatioKernel:
    """Mellin-Barnes kernel whose integral at the matching argument gives the statistic.

    ``pdf`` and ``cdf`` kernels take ``x = K/z`` (the pdf result must still
    be divided by ``z``); the ``mgf`` kernel takes ``x = 1/(s K)``.
    """
    prefactor = -spec.log_b1 - spec.log_b2
    if kind in ("pdf", "cdf"):
        return GammaRatioKernel(
            num_plus=spec.delta1 + spec.e2,
            num_minus=spec.e1 + spec.delta2,
            cdf_factor=kind == "cdf",
            log_prefactor=prefactor,
        )
    if kind == "mgf":
        return GammaRatioKernel(
            num_plus=(0.0,) + spec.e1 + spec.delta2,
            num_minus=spec.delta1 + spec.e2,
            log_prefactor=prefactor,
        )
    raise DomainError(f"unknown kernel kind {kind!r}")


def _positive(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)) or np.any(~np.isfinite(z)):
        raise DomainError("argument must be positive and finite")
    return z


def _shape_out(values: np.ndarray, like: np.ndarray):
    return float(values) if like.ndim == 0 else values


def pdf_z(spec: RatioSpec, z, policy: ContourPolicy | None = None):
    z = _positive(z)
    x = np.exp(spec.log_scale - np.log(z))
    vals = eval_contour_many(build_kernel(spec, "pdf"), x, policy) / z
    return _shape_out(np.maximum(vals, 0.0), z)


def cdf_z(spec: RatioSpec, z, policy: ContourPolicy | None = None):
    z = _positive(z)
    x = np.exp(spec.log_scale - np.log(z))
    vals = eval_contour_many(build_kernel(spec, "cdf"), x, policy)
    return _shape_out(np.clip(vals, 0.0, 1.0), z)


def mgf_z(spec: RatioSpec, s, policy: ContourPolicy | None = None):
    """``E[exp(-s Z)]`` for ``s >= 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(~(s >= 0)) or np.any(~np.isfinite(s)):
        raise DomainError("MGF argument must be non-negative and finite")
    out = np.ones(s.shape)
    pos = s > 0
    if np.any(pos):
        x = np.exp(-np.log(s[pos]) - spec.log_scale)
        out[pos] = np.clip(eval_contour_many(build_kernel(spec, "mgf"), x, policy), 0.0, 1.0)
    return _shape_out(out, s)


def cdf_product(factors: Sequence[FisherFParams], z, policy: ContourPolicy | None = None):
    """CDF of the product of independent squared F variates."""
    return cdf_z(RatioSpec(tuple(factors)), z, policy)


def pdf_ratio2(p1: FisherFParams, p2: FisherFParams, x) -> float:
    """Closed-form density of ``gamma_1 / gamma_2`` through a Gauss 2F1."""
    x = _positive(x)
    r = (p2.m_s - 1.0) * p2.gamma_bar * p1.m / ((p1.m_s - 1.0) * p1.gamma_bar * p2.m)
    a = p1.m + p1.m_s
    b = p1.m + p2.m
    c = a + p2.m + p2.m_s
    log_front = (log_beta(b, p1.m_s + p2.m_s) - log_beta(p1.m, p1.m_s) - log_beta(p2.m, p2.m_s)
                 + p1.m * math.log(r))
    flat = x.ravel()
    out = np.array([
        math.exp(log_front + (p1.m - 1.0) * math.log(xi)) * gauss_2f1(a, b, c, 1.0 - r * xi, r * xi)
        for xi in flat
    ]).reshape(x.shape)
    return _shape_out(out, x)


def cdf_ratio2(p1: FisherFParams, p2: FisherFParams, x, policy: ContourPolicy | None = None):
    return cdf_z(RatioSpec((p1,), (p2,)), x, policy)


def mgf_ratio2(p1: FisherFParams, p2: FisherFParams, s, policy: ContourPolicy | None = None):
    return mgf_z(RatioSpec((p1,), (p2,)), s, policy)


def leading_cdf(spec: RatioSpec, z: float, allow_multiple: bool = True):
    """Dominant small-``z`` term of the CDF and its power of ``z``."""
    z = float(_positive(z))
    return leading_term(build_kernel(spec, "cdf"), math.exp(spec.log_scale) / z,
                        allow_multiple=allow_multiple)


def sample_z(spec: RatioSpec, rng, size=None):
    """Draws of Z composed factor by factor from one stream."""
    n = 1 if size is None else size
    out = np.ones(n)
    for p in spec.numerator:
        out = out * sample(p, rng, n)
    for p in spec.denominator:
        out = out / sample(p, rng, n)
    return float(out[0]) if size is None else out
