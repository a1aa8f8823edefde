"""Log-normal approximations matched to the first two moments.

Every fit has the form ``sigma^2 = ln(Y - eps)`` and
``mu = ln H - sigma^2 / 2``, where ``H`` is the exact mean and ``Y`` the
ratio ``E[Z^2] / E[Z]^2``.  For products and ratios both quantities
factorise, one term per F factor: a numerator factor contributes
``H = gbar`` and ``Y = (m_s-1)(m+1) / (m(m_s-2))``; a denominator factor
contributes the moments of ``1/gamma``.  The adjustment ``eps`` shrinks or
widens the log-variance to improve the tails while keeping the mean fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import ndtr

from .errors import DomainError, FitDomainError
from .fisher_f import FisherFParams
from .goodness_of_fit import EmpiricalCDF, ks_statistic
from .ratio_stats import RatioSpec, cdf_z

# margin kept between eps and the value that makes sigma^2 vanish
SIGMA_MARGIN = 1e-6
GRID_POINTS = 200
GRID_QUANTILES = (1e-4, 1.0 - 1e-4)
COARSE_POINTS = 32


@dataclass(frozen=True)
class LogNormalParams:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise DomainError("mu must be finite")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError("sigma must be positive")

    @classmethod
    def from_log_mean(cls, log_h: float, sigma2: float) -> "LogNormalParams":
        """Parameters with ``E[Y] = exp(log_h)`` and log-variance ``sigma2``."""
        if not sigma2 > 0:
            raise FitDomainError(f"log-variance must be positive, got {sigma2}")
        return cls(log_h - 0.5 * sigma2, math.sqrt(sigma2))


def _positive(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("log-normal argument must be positive")
    return y


def lognormal_pdf(p: LogNormalParams, y):
    y = _positive(y)
    u = (np.log(y) - p.mu) / p.sigma
    out = np.exp(-0.5 * u * u) / (y * p.sigma * math.sqrt(2.0 * math.pi))
    return float(out) if out.ndim == 0 else out


def lognormal_cdf(p: LogNormalParams, y):
    y = _positive(y)
    out = ndtr((np.log(y) - p.mu) / p.sigma)
    return float(out) if out.ndim == 0 else out


def lognormal_moment(p: LogNormalParams, n: float) -> float:
    return math.exp(n * p.mu + 0.5 * n * n * p.sigma**2)


@dataclass(frozen=True)
class FitReport:
    """Outcome of a moment match.

    ``matched_y`` is the unadjusted product of Y terms (``inf`` when a second
    moment does not exist) and ``epsilon`` the adjustment used, ``nan`` when
    the log-variance was tuned directly.  ``kolmogorov_distance`` is ``nan``
    unless the fit was measured against a reference CDF.
    """

    params: LogNormalParams
    matched_h: float
    matched_y: float
    epsilon: float | tuple[float, ...]
    kolmogorov_distance: float = math.nan
    search: str = "moment match"

    @property
    def sigma2(self) -> float:
        return self.params.sigma ** 2


def y_numerator(p: FisherFParams) -> float:
    """``E[g^2]/E[g]^2`` of one F factor; needs ``m_s > 2``."""
    if not p.m_s > 2:
        raise FitDomainError(f"shadowing too heavy for a second moment: m_s = {p.m_s} must exceed 2")
    return (p.m_s - 1.0) * (p.m + 1.0) / (p.m * (p.m_s - 2.0))


def y_denominator(p: FisherFParams) -> float:
    """``E[g^-2]/E[g^-1]^2`` of one F factor; needs ``m > 2``."""
    if not p.m > 2:
        raise FitDomainError(f"fading too heavy for E[1/g^2]: m = {p.m} must exceed 2")
    return (p.m - 1.0) * (p.m_s + 1.0) / (p.m_s * (p.m - 2.0))


def h_denominator(p: FisherFParams) -> float:
    """``E[1/g]`` of one F factor; needs ``m > 1``."""
    if not p.m > 1:
        raise FitDomainError(f"E[1/g] diverges: m = {p.m} must exceed 1")
    return p.m_s * p.m / ((p.m - 1.0) * (p.m_s - 1.0)) / p.gamma_bar


def _log_h(spec: RatioSpec) -> float:
    return (sum(math.log(p.gamma_bar) for p in spec.numerator)
            + sum(math.log(h_denominator(p)) for p in spec.denominator))


def _y_terms(spec: RatioSpec) -> tuple[float, ...]:
    return (tuple(y_numerator(p) for p in spec.numerator)
            + tuple(y_denominator(p) for p in spec.denominator))


def _broadcast(epsilon, count: int) -> tuple[float, ...]:
    if np.ndim(epsilon) == 0:
        return (float(epsilon),) * count
    eps = tuple(float(e) for e in epsilon)
    if len(eps) != count:
        raise DomainError(f"expected {count} adjustment factors, got {len(eps)}")
    return eps


def _from_terms(log_h: float, ys: Sequence[float], eps: Sequence[float], epsilon_out) -> FitReport:
    adjusted = [y - e for y, e in zip(ys, eps)]
    if any(a <= 0 for a in adjusted):
        raise FitDomainError("every adjusted factor Y - eps must stay positive")
    sigma2 = sum(math.log(a) for a in adjusted)
    if not sigma2 > 0:
        raise FitDomainError(f"adjusted Y product {math.exp(sigma2):.6g} must exceed 1")
    return FitReport(LogNormalParams.from_log_mean(log_h, sigma2), math.exp(log_h),
                     math.prod(ys), epsilon_out)


def fit_single(p: FisherFParams, epsilon: float = 0.0) -> FitReport:
    return _from_terms(math.log(p.gamma_bar), [y_numerator(p)], [epsilon], float(epsilon))


def fit_product(factors: Sequence[FisherFParams], epsilons=0.0) -> FitReport:
    factors = tuple(factors)
    if not factors:
        raise DomainError("a product needs at least one factor")
    eps = _broadcast(epsilons, len(factors))
    log_h = sum(math.log(p.gamma_bar) for p in factors)
    out = eps if np.ndim(epsilons) else float(epsilons)
    return _from_terms(log_h, [y_numerator(p) for p in factors], eps, out)


def fit_ratio(px: FisherFParams, py: FisherFParams, epsilon: float = 0.0) -> FitReport:
    """Fit of ``X/Y``; ``epsilon`` adjusts the combined ``Y_ratio``."""
    y_ratio = y_numerator(px) * y_denominator(py)
    log_h = math.log(px.gamma_bar) + math.log(h_denominator(py))
    return _from_terms(log_h, [y_ratio], [epsilon], float(epsilon))


def fit_ratio_of_products(spec: RatioSpec, epsilons=0.0) -> FitReport:
    """Fit of ``prod(num)/prod(den)`` with one adjustment per factor (or one shared)."""
    ys = _y_terms(spec)
    eps = _broadcast(epsilons, len(ys))
    out = eps if np.ndim(epsilons) else float(epsilons)
    return _from_terms(_log_h(spec), ys, eps, out)


def fit_iid_product(p: FisherFParams, n: int, epsilon: float = 0.0) -> FitReport:
    """Closed form for ``n`` i.i.d. factors: ``sigma^2 = n ln(Y - eps)``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    y = y_numerator(p)
    return _from_terms(n * math.log(p.gamma_bar), [y] * n, [epsilon] * n, float(epsilon))


def fit_iid_ratio(p: FisherFParams, L: int, epsilon: float = 0.0) -> FitReport:
    """Closed form for ``L`` i.i.d. factors over ``L`` i.i.d. factors.

    ``epsilon`` adjusts each numerator/denominator pair, so
    ``sigma^2 = L ln(Y_num Y_den - eps)``.
    """
    if L < 1:
        raise DomainError("L must be at least 1")
    y_pair = y_numerator(p) * y_denominator(p)
    log_h = L * math.log(p.m_s * p.m / ((p.m_s - 1.0) * (p.m - 1.0)))
    return _from_terms(log_h, [y_pair] * L, [epsilon] * L, float(epsilon))


# --- tuning ---------------------------------------------------------------

CdfFunc = Callable[[np.ndarray], np.ndarray]


class EpsilonFit(NamedTuple):
    epsilon: float
    kolmogorov_distance: float


def _quantile(cdf: CdfFunc, q: float, centre: float, width: float) -> float:
    """Log-space root of ``cdf(z) = q`` with an expanding bracket."""
    lo, hi = centre - width, centre + width
    for _ in range(60):
        if float(cdf(math.exp(lo))) < q:
            break
        lo -= width
        width *= 2.0
    for _ in range(60):
        if float(cdf(math.exp(hi))) > q:
            break
        hi += width
        width *= 2.0
    return brentq(lambda t: float(cdf(math.exp(t))) - q, lo, hi, xtol=1e-6)


class _Distance:
    """Kolmogorov distance between a reference CDF and tied log-normals.

    Against an :class:`EmpiricalCDF` this is the exact two-sided KS
    statistic; against an analytic CDF it is the sup over a log-spaced grid
    between the reference quantiles 1e-4 and 1 - 1e-4.
    """

    def __init__(self, reference: CdfFunc, log_h: float, centre: float, spread: float):
        self.reference = reference
        self.log_h = log_h
        self.empirical = isinstance(reference, EmpiricalCDF)
        if not self.empirical:
            lo = _quantile(reference, GRID_QUANTILES[0], centre, spread)
            hi = _quantile(reference, GRID_QUANTILES[1], centre, spread)
            self.log_grid = np.linspace(lo, hi, GRID_POINTS)
            self.values = np.asarray(reference(np.exp(self.log_grid)), dtype=float)

    def __call__(self, sigma2: float) -> float:
        p = LogNormalParams.from_log_mean(self.log_h, sigma2)
        if self.empirical:
            return ks_statistic(self.reference, lambda z: lognormal_cdf(p, z))
        approx = ndtr((self.log_grid - p.mu) / p.sigma)
        return float(np.max(np.abs(self.values - approx)))


def _default_reference(spec: RatioSpec) -> CdfFunc:
    return lambda z: cdf_z(spec, z)


def _centre(spec: RatioSpec) -> float:
    return spec.log_scale


def _minimise(objective: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    """Coarse grid then bounded Brent (golden section with parabolic steps)."""
    grid = np.linspace(lo, hi, COARSE_POINTS + 2)[1:-1]
    vals = [objective(g) for g in grid]
    i = int(np.argmin(vals))
    step = grid[1] - grid[0]
    a, b = max(lo, grid[i] - step), min(hi, grid[i] + step)
    res = minimize_scalar(objective, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-6 * max(1.0, abs(b - a))})
    if res.fun <= vals[i]:
        return float(res.x), float(res.fun)
    return float(grid[i]), float(vals[i])


def epsilon_bounds(ys: Sequence[float]) -> tuple[float, float]:
    """Admissible shared ``eps``: every ``Y_i - eps > 0`` and ``prod(Y_i - eps) > 1``."""
    ymin = min(ys)
    lo = -ymin

    def excess(e: float) -> float:
        return sum(math.log(y - e) for y in ys)

    if excess(lo) <= 0:
        raise FitDomainError("no admissible adjustment factor")
    # excess falls monotonically to -inf as eps approaches min(Y)
    near = ymin * (1.0 - 1e-12)
    top = brentq(excess, lo, near) if excess(near) < 0 else near
    return lo, top - SIGMA_MARGIN


def tune_epsilon(
    spec: RatioSpec,
    exact_cdf: CdfFunc | None = None,
    bounds: tuple[float, float] | None = None,
) -> EpsilonFit:
    """Shared ``eps`` minimising the Kolmogorov distance to ``exact_cdf``.

    ``exact_cdf`` defaults to the exact distribution of ``spec``; passing an
    :class:`~fratio.goodness_of_fit.EmpiricalCDF` tunes against simulated data.
    Only the product ``prod(Y_i - eps_i)`` enters the fit, so one shared
    factor already reaches every admissible log-variance.
    """
    ys = _y_terms(spec)
    lo, hi = epsilon_bounds(ys)
    if bounds is not None:
        lo, hi = max(lo, float(bounds[0])), min(hi, float(bounds[1]))
        if not lo < hi:
            raise FitDomainError("requested epsilon bounds leave no admissible interval")
    log_h = _log_h(spec)
    reference = exact_cdf or _default_reference(spec)
    spread = 4.0 * math.sqrt(sum(math.log(y) for y in ys))
    dist = _Distance(reference, log_h, _centre(spec), spread)

    def objective(e: float) -> float:
        return dist(sum(math.log(y - e) for y in ys))

    eps, d = _minimise(objective, lo, hi)
    return EpsilonFit(eps, d)


def tune_sigma(spec: RatioSpec, exact_cdf: CdfFunc | None = None,
               sigma2_max: float | None = None) -> FitReport:
    """Tune the log-variance directly, keeping ``E[Z]`` matched.

    Used when a second moment is infinite (``m_s <= 2`` upstairs or ``m <= 2``
    downstairs), where ``Y`` and hence ``eps`` are undefined.
    """
    log_h = _log_h(spec)
    reference = exact_cdf or _default_reference(spec)
    n = len(spec.numerator) + len(spec.denominator)
    top = sigma2_max or 8.0 * n
    dist = _Distance(reference, log_h, _centre(spec), 4.0 * math.sqrt(top))
    s2, d = _minimise(dist, 1e-6, top)
    try:
        y = math.prod(_y_terms(spec))
    except FitDomainError:
        y = math.inf
    return FitReport(LogNormalParams.from_log_mean(log_h, s2), math.exp(log_h), y,
                     math.nan, d, "log-variance search")


def fit_tuned(spec: RatioSpec, exact_cdf: CdfFunc | None = None) -> FitReport:
    """Adjusted fit with ``eps`` tuned; falls back to :func:`tune_sigma` when ``Y`` is infinite."""
    try:
        _y_terms(spec)
    except FitDomainError:
        return tune_sigma(spec, exact_cdf)
    eps, d = tune_epsilon(spec, exact_cdf)
    report = fit_ratio_of_products(spec, eps)
    return FitReport(report.params, report.matched_h, report.matched_y, eps, d, "epsilon search")


def kolmogorov_distance(params: LogNormalParams, spec: RatioSpec,
                        exact_cdf: CdfFunc | None = None) -> float:
    """Distance between a log-normal and the reference CDF on the tuning grid."""
    reference = exact_cdf or _default_reference(spec)
    if isinstance(reference, EmpiricalCDF):
        return ks_statistic(reference, lambda z: lognormal_cdf(params, z))
    centre = _centre(spec)
    lo = _quantile(reference, GRID_QUANTILES[0], centre, 4.0 * params.sigma)
    hi = _quantile(reference, GRID_QUANTILES[1], centre, 4.0 * params.sigma)
    grid = np.exp(np.linspace(lo, hi, GRID_POINTS))
    return float(np.max(np.abs(np.asarray(reference(grid)) - lognormal_cdf(params, grid))))
