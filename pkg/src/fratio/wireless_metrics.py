"""Secrecy and full-duplex relay metrics over cascaded F fading.

Closed forms here are bounds or approximations built from the exact ratio
and product CDFs; the corresponding exact metrics are Monte Carlo only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError
from .fisher_f import FisherFParams, sample
from .montecarlo import McEstimate, estimate_probability
from .ratio_stats import RatioSpec, cdf_product, cdf_z, leading_cdf


def _cascade(factors: Sequence[FisherFParams], name: str) -> tuple[FisherFParams, ...]:
    factors = tuple(factors)
    if not factors:
        raise DomainError(f"{name} cascade needs at least one link")
    return factors


def _draw_product(factors, rng, k: int) -> np.ndarray:
    out = np.ones(k)
    for p in factors:
        out *= sample(p, rng, k)
    return out


@dataclass(frozen=True)
class SecrecyConfig:
    legit: tuple[FisherFParams, ...]
    eaves: tuple[FisherFParams, ...]
    rate_threshold: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "legit", _cascade(self.legit, "legitimate"))
        object.__setattr__(self, "eaves", _cascade(self.eaves, "eavesdropper"))
        if not self.rate_threshold >= 0:
            raise DomainError("rate threshold must be non-negative")

    @property
    def tau(self) -> float:
        return 2.0 ** self.rate_threshold

    @property
    def spec(self) -> RatioSpec:
        return RatioSpec(self.legit, self.eaves)


def sop_lower_bound(cfg: SecrecyConfig) -> float:
    """``P(gD/gE < tau)``, a lower bound on the secrecy outage probability."""
    return cdf_z(cfg.spec, cfg.tau)


def sop_exact_mc(cfg: SecrecyConfig, n: int, rng) -> McEstimate:
    """Monte Carlo secrecy outage ``P((1 + gD)/(1 + gE) < tau)``."""
    def draws(r, k):
        return np.stack([_draw_product(cfg.legit, r, k), _draw_product(cfg.eaves, r, k)])

    return estimate_probability(lambda d: (1.0 + d[0]) < cfg.tau * (1.0 + d[1]), draws, n, rng)


def pnsc(cfg: SecrecyConfig) -> float:
    """Probability of non-zero secrecy capacity, ``1 - P(gD/gE <= 1)``."""
    return 1.0 - cdf_z(cfg.spec, 1.0)


def pnsc_mc(cfg: SecrecyConfig, n: int, rng) -> McEstimate:
    def draws(r, k):
        return np.stack([_draw_product(cfg.legit, r, k), _draw_product(cfg.eaves, r, k)])

    return estimate_probability(lambda d: d[0] > d[1], draws, n, rng)


class AsymptoticCdf(NamedTuple):
    value: float
    diversity_exponent: float


def asymptotic_cdf(spec: RatioSpec, z: float) -> AsymptoticCdf:
    """Leading high-SNR term of the ratio CDF at ``z``.

    The exponent is the smallest of the numerator fading parameters and
    the denominator shadowing parameters.  Repeated minima give a pole of
    higher order, whose residue carries the extra powers of ``log``.
    """
    lead = leading_cdf(spec, z, allow_multiple=True)
    return AsymptoticCdf(lead.value, lead.exponent)


def sop_asymptotic(cfg: SecrecyConfig) -> AsymptoticCdf:
    return asymptotic_cdf(cfg.spec, cfg.tau)


@dataclass(frozen=True)
class RelayConfig:
    first_hop: tuple[FisherFParams, ...]
    second_hop: tuple[FisherFParams, ...]
    self_interference: FisherFParams
    rate: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "first_hop", _cascade(self.first_hop, "first hop"))
        object.__setattr__(self, "second_hop", _cascade(self.second_hop, "second hop"))
        if not isinstance(self.self_interference, FisherFParams):
            raise DomainError("self_interference must be FisherFParams")
        if not self.rate >= 0:
            raise DomainError("rate must be non-negative")

    @property
    def sigma(self) -> float:
        return 2.0 ** self.rate - 1.0

    @property
    def first_hop_spec(self) -> RatioSpec:
        return RatioSpec(self.first_hop, (self.self_interference,))


class RelayTerms(NamedTuple):
    first_hop_cdf: float
    second_hop_cdf: float


def relay_terms(cfg: RelayConfig) -> RelayTerms:
    """``F_Y(sigma)`` for ``gAR/gRR`` and ``F_g(sigma)`` for the second-hop product."""
    if cfg.sigma == 0.0:
        return RelayTerms(0.0, 0.0)
    return RelayTerms(cdf_z(cfg.first_hop_spec, cfg.sigma), cdf_product(cfg.second_hop, cfg.sigma))


def _union(fy: float, fg: float) -> float:
    return fy + fg - fy * fg


def fd_outage_bound(cfg: RelayConfig) -> float:
    """Outage of ``min(gAR/gRR, gRB) < sigma``.

    Dropping the ``+1`` next to the self-interference only enlarges the
    first-hop SINR, so this value never exceeds the exact outage.
    """
    return _union(*relay_terms(cfg))


def fd_outage_asymptotic(cfg: RelayConfig) -> float:
    """Bound with the first-hop CDF replaced by its leading high-SNR term."""
    if cfg.sigma == 0.0:
        return 0.0
    fy = asymptotic_cdf(cfg.first_hop_spec, cfg.sigma).value
    return _union(fy, cdf_product(cfg.second_hop, cfg.sigma))


def fd_outage_exact_mc(cfg: RelayConfig, n: int, rng) -> McEstimate:
    """Monte Carlo outage ``P(min(gAR/(gRR + 1), gRB) < sigma)``."""
    def draws(r, k):
        return np.stack([
            _draw_product(cfg.first_hop, r, k),
            sample(cfg.self_interference, r, k),
            _draw_product(cfg.second_hop, r, k),
        ])

    return estimate_probability(
        lambda d: np.minimum(d[0] / (d[1] + 1.0), d[2]) < cfg.sigma, draws, n, rng)
