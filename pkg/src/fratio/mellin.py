"""Mellin-Barnes integrals of gamma-function ratios.

A :class:`GammaRatioKernel` describes

    I(x) = exp(log_prefactor) / (2 pi i) * Int_L  G(s) x^(sign * s) ds,

    G(s) = prod Gamma(a_i + s) prod Gamma(b_j - s)
           / (prod Gamma(c_k + s) prod Gamma(d_l - s))  [* (-1/s)]

where the optional ``-1/s = Gamma(-s)/Gamma(1-s)`` factor turns a density
kernel into a distribution-function kernel.  Every Meijer G-function of the
package is one of these integrals, evaluated either by trapezoidal
quadrature along a vertical line or by summing residues at the left poles.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    CancellationError,
    DivergenceError,
    DomainError,
    EmptyStripError,
    NonConvergenceError,
    PoleCollisionError,
    PoleTieError,
)
from .specfun import log_gamma, log_gamma_real

COLLISION_TOL = 1e-9
# largest rounding error tolerated in a residue sum, absolute
RESIDUE_ROUNDING_LIMIT = 1e-9
_EPS = np.finfo(float).eps


def _group(values: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Unique parameter values and their multiplicities."""
    if not values:
        return np.empty(0), np.empty(0)
    uniq, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
    return uniq, counts.astype(float)


@dataclass(frozen=True)
class GammaRatioKernel:
    num_plus: tuple[float, ...]
    num_minus: tuple[float, ...]
    den_plus: tuple[float, ...] = ()
    den_minus: tuple[float, ...] = ()
    cdf_factor: bool = False
    log_prefactor: float = 0.0
    argument_exponent_sign: int = 1
    _groups: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for name in ("num_plus", "num_minus", "den_plus", "den_minus"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not all(math.isfinite(v) for v in vals):
                raise DomainError(f"{name} entries must be finite")
            object.__setattr__(self, name, vals)
        if self.argument_exponent_sign not in (1, -1):
            raise DomainError("argument_exponent_sign must be +1 or -1")
        if not math.isfinite(self.log_prefactor):
            raise DomainError("log_prefactor must be finite")
        groups = tuple(_group(getattr(self, n)) for n in ("num_plus", "num_minus", "den_plus", "den_minus"))
        object.__setattr__(self, "_groups", groups)

    @property
    def decay_rate(self) -> float:
        """Exponential decay rate of |G(c + it)| in |t|."""
        n = len(self.num_plus) + len(self.num_minus) - len(self.den_plus) - len(self.den_minus)
        return 0.5 * math.pi * n

    def log_integrand(self, s) -> np.ndarray:
        """log(prefactor * G(s)) on a complex array, principal branches summed."""
        s = np.asarray(s, dtype=complex)
        (ap, ac), (bm, bc), (cp, cc), (dm, dc) = self._groups
        out = np.full(s.shape, self.log_prefactor, dtype=complex)
        for a, k in zip(ap, ac):
            out += k * log_gamma(a + s)
        for b, k in zip(bm, bc):
            out += k * log_gamma(b - s)
        for c, k in zip(cp, cc):
            out -= k * log_gamma(c + s)
        for d, k in zip(dm, dc):
            out -= k * log_gamma(d - s)
        if self.cdf_factor:
            out += np.log(-1.0 / s)
        return out

    def log_integrand_real(self, s) -> tuple[np.ndarray, np.ndarray]:
        """``(log|prefactor * G(s)|, sign)`` at real ``s``."""
        s = np.asarray(s, dtype=float)
        (ap, ac), (bm, bc), (cp, cc), (dm, dc) = self._groups
        logabs = np.full(s.shape, self.log_prefactor)
        sign = np.ones(s.shape)
        for vals, counts, shift, flip in ((ap, ac, 1, 1), (bm, bc, -1, 1), (cp, cc, 1, -1), (dm, dc, -1, -1)):
            for v, k in zip(vals, counts):
                la, sg = log_gamma_real(v + shift * s)
                logabs = logabs + flip * k * la
                sign = sign * sg ** int(k)
        if self.cdf_factor:
            logabs = logabs - np.log(np.abs(s))
            sign = sign * np.sign(-s)
        return logabs, sign


@dataclass(frozen=True)
class ContourPolicy:
    """Controls for :func:`eval_contour`.

    ``abscissa=None`` places the line at the saddle of ``|G(c)| x^c`` inside
    the strip, which keeps the quadrature well conditioned even when the
    integral is tiny; ``"midpoint"`` uses the centre of the strip.  ``step``
    and ``truncation`` are starting values for the adaptive loop.
    """

    abscissa: float | str | None = None
    truncation: float | None = None
    step: float | None = None
    tolerance: float = 1e-300
    rel_tolerance: float = 1e-12
    max_truncation: float = 2000.0
    max_halvings: int = 18

    def __post_init__(self) -> None:
        if not (self.tolerance > 0 and self.rel_tolerance > 0):
            raise DomainError("contour tolerances must be positive")


DEFAULT_POLICY = ContourPolicy()


def valid_strip(kernel: GammaRatioKernel) -> tuple[float, float]:
    """Open interval of abscissas separating left poles from right poles."""
    lo = -min(kernel.num_plus) if kernel.num_plus else -math.inf
    hi = min(kernel.num_minus) if kernel.num_minus else math.inf
    if kernel.cdf_factor:
        hi = min(hi, 0.0)
    if not lo < hi:
        raise EmptyStripError(f"no pole-free strip: left edge {lo}, right edge {hi}")
    return lo, hi


def _finite_strip(lo: float, hi: float) -> tuple[float, float]:
    if math.isinf(lo) and math.isinf(hi):
        return -25.0, 25.0
    if math.isinf(lo):
        return hi - 50.0, hi
    if math.isinf(hi):
        return lo, lo + 50.0
    return lo, hi


def _saddle(kernel: GammaRatioKernel, lx: float, lo: float, hi: float) -> float:
    """Minimiser of log|G(c)| + c*lx over the strip (a convex function)."""
    flo, fhi = _finite_strip(lo, hi)
    width = fhi - flo
    pad = 1e-9 * max(width, 1.0)

    def phi(c: float) -> float:
        la, _ = kernel.log_integrand_real(np.array([c]))
        return float(la[0]) + c * lx

    res = minimize_scalar(phi, bounds=(flo + pad, fhi - pad), method="bounded",
                          options={"xatol": 1e-7 * min(width, 1.0)})
    return float(res.x)


def _choose_abscissa(kernel, lx, policy, lo, hi) -> float:
    if policy.abscissa is None:
        return _saddle(kernel, lx, lo, hi)
    if policy.abscissa == "midpoint":
        flo, fhi = _finite_strip(lo, hi)
        return 0.5 * (flo + fhi)
    c = float(policy.abscissa)
    if not lo < c < hi:
        raise DomainError(f"abscissa {c} outside the pole-free strip ({lo}, {hi})")
    return c


def _initial_truncation(kernel: GammaRatioKernel, c: float) -> float:
    """First t where the envelope of |G(c+it)| has fallen by e^-50 and keeps falling."""
    base = float(kernel.log_integrand(np.array([complex(c, 0.0)])).real[0])
    t = 0.5
    prev = base
    while t < 1e4:
        cur = float(kernel.log_integrand(np.array([complex(c, t)])).real[0])
        if cur < base - 50.0 and cur < prev:
            return t
        prev = cur
        t *= 2.0
    return t


class _LineSums:
    """Row sums of Re g and |g| over grid points, evaluated in column blocks."""

    def __init__(self, kernel, c, lxs):
        self.kernel = kernel
        self.c = c
        self.lxs = lxs

    def __call__(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        re_sum = np.zeros(self.lxs.size)
        abs_sum = np.zeros(self.lxs.size)
        for start in range(0, t.size, 512):
            tt = t[start:start + 512]
            s = self.c + 1j * tt
            li = self.kernel.log_integrand(s)
            e = li[None, :] + s[None, :] * self.lxs[:, None]
            with np.errstate(under="ignore"):
                mag = np.exp(e.real)
                re_sum += (mag * np.cos(e.imag)).sum(axis=1)
                abs_sum += mag.sum(axis=1)
        return re_sum, abs_sum

    def envelope(self, t: float) -> np.ndarray:
        li = float(self.kernel.log_integrand(np.array([complex(self.c, t)])).real[0])
        with np.errstate(under="ignore", over="ignore"):
            return np.exp(li + self.c * self.lxs)


def _trapezoid_line(kernel, lxs, c, lo, hi, policy) -> np.ndarray:
    """Integral over Re s = c for a block of log-arguments sharing the abscissa."""
    rate = kernel.decay_rate
    if rate <= 0:
        raise NonConvergenceError("integrand does not decay along the contour")
    sums = _LineSums(kernel, c, lxs)
    dist = min(c - lo, hi - c)
    T = policy.truncation or _initial_truncation(kernel, c)
    h = policy.step or min(0.5 * dist, math.pi / (np.max(np.abs(lxs)) + 1.0), T / 8.0, 0.5)
    n = max(int(math.ceil(T / h)), 8)
    T = n * h

    re0, abs0 = sums(np.array([0.0]))
    re_s, abs_s = sums(h * np.arange(1, n + 1))
    S = 0.5 * re0 + re_s
    A = 0.5 * abs0 + abs_s
    estimate = h / math.pi * S
    halvings = 0
    while True:
        mids = h * (np.arange(1, n + 1) - 0.5)
        re_m, abs_m = sums(mids)
        S = S + re_m
        A = A + abs_m
        h *= 0.5
        n *= 2
        new = h / math.pi * S
        floor = 64.0 * _EPS * h / math.pi * A
        tol = np.maximum(np.maximum(policy.tolerance, policy.rel_tolerance * np.abs(new)), floor)
        converged = np.all(np.abs(new - estimate) <= tol)
        estimate = new
        if converged:
            tail = 2.0 * sums.envelope(T) / (math.pi * rate)
            if np.all(tail <= tol):
                return estimate
            if 2.0 * T > policy.max_truncation:
                raise NonConvergenceError("contour truncation cap reached before the tail bound was met")
            # extend the line to 2T on the current grid
            re_x, abs_x = sums(h * np.arange(n + 1, 2 * n + 1))
            S = S + re_x
            A = A + abs_x
            n *= 2
            T *= 2.0
            estimate = h / math.pi * S
            continue
        halvings += 1
        if halvings > policy.max_halvings:
            raise NonConvergenceError("trapezoidal refinement did not converge")


def _eval_log_args(kernel: GammaRatioKernel, lxs: np.ndarray, policy: ContourPolicy) -> np.ndarray:
    lo, hi = valid_strip(kernel)
    out = np.empty(lxs.size)
    if policy.abscissa is not None:
        c = _choose_abscissa(kernel, float(np.median(lxs)), policy, lo, hi)
        return _trapezoid_line(kernel, lxs, c, lo, hi, policy)
    # arguments are binned in log space and each bin shares a saddle abscissa
    bins = np.floor(lxs / 0.5)
    for b in np.unique(bins):
        idx = np.nonzero(bins == b)[0]
        c = _saddle(kernel, float(np.mean(lxs[idx])), lo, hi)
        out[idx] = _trapezoid_line(kernel, lxs[idx], c, lo, hi, policy)
    return out


def eval_contour_many(kernel: GammaRatioKernel, xs, policy: ContourPolicy | None = None) -> np.ndarray:
    """Vectorised :func:`eval_contour` over an array of positive arguments."""
    xs = np.asarray(xs, dtype=float)
    if np.any(~(xs > 0)) or np.any(~np.isfinite(xs)):
        raise DomainError("Mellin-Barnes argument must be positive and finite")
    flat = xs.ravel()
    lxs = kernel.argument_exponent_sign * np.log(flat)
    return _eval_log_args(kernel, lxs, policy or DEFAULT_POLICY).reshape(xs.shape)


def eval_contour(kernel: GammaRatioKernel, x: float, policy: ContourPolicy | None = None) -> float:
    """Numerical value of the kernel's Mellin-Barnes integral at ``x > 0``."""
    return float(eval_contour_many(kernel, np.array([float(x)]), policy)[0])


@dataclass(frozen=True)
class PoleClassification:
    collided: bool
    offenders: tuple[tuple[float, float], ...] = ()

    @property
    def generic(self) -> bool:
        return not self.collided


def pole_collision(kernel: GammaRatioKernel, tol: float = COLLISION_TOL) -> PoleClassification:
    """Flag left-pole parameters that differ by an integer (double or higher poles)."""
    vals = kernel.num_plus
    bad = []
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            d = abs(vals[i] - vals[j])
            if abs(d - round(d)) <= tol:
                bad.append((vals[i], vals[j]))
    return PoleClassification(bool(bad), tuple(bad))


def _residue_term(kernel: GammaRatioKernel, i: int, k: int, lx: float) -> float:
    """Residue of the integrand at s = -a_i - k (simple pole)."""
    a = kernel.num_plus[i]
    s = -a - k
    logabs = kernel.log_prefactor + s * lx - math.lgamma(k + 1.0)
    sign = -1.0 if k % 2 else 1.0
    others = np.array([v for j, v in enumerate(kernel.num_plus) if j != i])
    parts = (
        (others + s, 1.0),
        (np.asarray(kernel.num_minus) - s, 1.0),
        (np.asarray(kernel.den_plus) + s, -1.0),
        (np.asarray(kernel.den_minus) - s, -1.0),
    )
    for args, power in parts:
        if args.size == 0:
            continue
        la, sg = log_gamma_real(args)
        if power < 0 and np.any(sg == 0):
            return 0.0
        logabs += power * float(la.sum())
        sign *= float(np.prod(sg))
    if kernel.cdf_factor:
        logabs -= math.log(abs(s))
        sign *= 1.0 if -s > 0 else -1.0
    return sign * math.exp(logabs)


def _series_regime(kernel: GammaRatioKernel, lx: float) -> None:
    growth = (len(kernel.num_minus) + len(kernel.den_plus)
              - len(kernel.num_plus) - len(kernel.den_minus))
    if growth > 0 or (growth == 0 and lx <= 0.0):
        raise DivergenceError("left residue series does not converge for this argument")


def eval_residues(
    kernel: GammaRatioKernel,
    x: float,
    max_terms: int | None = None,
    tol: float = 1e-17,
) -> float:
    """Sum of residues at the left poles, nearest the contour first.

    With ``max_terms=None`` the sum runs until three consecutive terms are
    below ``tol`` (and every pole family is past its peak); an explicit
    ``max_terms`` truncates the series, so ``max_terms=1`` reproduces the
    dominant simple-pole term.

    Near ``x = 1`` the terms grow polynomially before the geometric factor
    wins and the sum cancels.  When the rounding error implied by the
    largest terms exceeds ``RESIDUE_ROUNDING_LIMIT`` a
    :class:`CancellationError` is raised; use :func:`eval_contour` there.
    """
    if not x > 0:
        raise DomainError("Mellin-Barnes argument must be positive")
    if not kernel.num_plus:
        return 0.0
    classification = pole_collision(kernel)
    if classification.collided:
        raise PoleCollisionError(f"integer-spaced left poles: {classification.offenders}")
    lx = kernel.argument_exponent_sign * math.log(x)
    _series_regime(kernel, lx)
    cap = max_terms if max_terms is not None else 200_000
    heap = [(a, i, 0) for i, a in enumerate(kernel.num_plus)]
    heapq.heapify(heap)
    last = [math.inf] * len(kernel.num_plus)
    falling = [False] * len(kernel.num_plus)
    terms = []
    magnitude = 0.0
    small_run = 0
    for _ in range(cap):
        depth, i, k = heapq.heappop(heap)
        term = _residue_term(kernel, i, k, lx)
        terms.append(term)
        magnitude += abs(term)
        falling[i] = abs(term) <= last[i]
        last[i] = abs(term)
        small_run = small_run + 1 if abs(term) < tol else 0
        if small_run >= 3 and all(falling) and max(last) < tol:
            return _checked_sum(terms, magnitude)
        heapq.heappush(heap, (depth + 1.0, i, k + 1))
    if max_terms is not None:
        return _checked_sum(terms, magnitude)
    raise DivergenceError("residue series did not reach the tolerance within the term cap")


def _checked_sum(terms: list[float], magnitude: float) -> float:
    # each term carries a few ulps from the log-gamma sums
    rounding = 32.0 * _EPS * magnitude
    if rounding > RESIDUE_ROUNDING_LIMIT:
        raise CancellationError(
            f"residue terms up to {max(map(abs, terms)):.3g} cancel; "
            f"rounding error ~{rounding:.1g} exceeds {RESIDUE_ROUNDING_LIMIT:g}")
    return math.fsum(terms)


class LeadingTerm(NamedTuple):
    value: float
    exponent: float
    order: int


def _circle_residue(kernel: GammaRatioKernel, s0: float, lx: float, order: int) -> float:
    """Residue at s0 by trapezoidal integration around a small circle."""
    others = [a for a in kernel.num_plus if abs(a + s0) > COLLISION_TOL]
    dist = 1.0
    if others:
        dist = min(dist, min(a + s0 for a in others))
    if kernel.num_minus:
        dist = min(dist, min(kernel.num_minus) - s0)
    if kernel.cdf_factor:
        dist = min(dist, -s0)
    rho = 0.5 * dist
    if lx != 0.0:
        rho = min(rho, order / abs(lx))
    n = 256
    theta = 2.0 * math.pi * np.arange(n) / n
    w = rho * np.exp(1j * theta)
    logv = kernel.log_integrand(s0 + w) + w * lx + np.log(w)
    ref = float(np.max(logv.real))
    total = np.mean(np.exp(logv - ref))
    return float(total.real) * math.exp(ref + s0 * lx)


def leading_term(kernel: GammaRatioKernel, x: float, allow_multiple: bool = False) -> LeadingTerm:
    """Residue at the dominant left pole s = -min(num_plus).

    This is the first term of the small-argument (large-``x``) expansion
    and carries the power ``x^(-exponent)``.  When several parameters share
    the minimum the pole has higher order and the term includes powers of
    ``log x``; that case raises :class:`PoleTieError` unless
    ``allow_multiple`` is set.
    """
    if not x > 0:
        raise DomainError("Mellin-Barnes argument must be positive")
    if not kernel.num_plus:
        raise DomainError("kernel has no left poles")
    a_min = min(kernel.num_plus)
    order = sum(1 for a in kernel.num_plus if abs(a - a_min) <= COLLISION_TOL)
    lx = kernel.argument_exponent_sign * math.log(x)
    if order == 1:
        i = kernel.num_plus.index(a_min)
        return LeadingTerm(_residue_term(kernel, i, 0, lx), a_min, 1)
    if not allow_multiple:
        raise PoleTieError(f"{order} pole families share the dominant pole at s = {-a_min}")
    return LeadingTerm(_circle_residue(kernel, -a_min, lx, order), a_min, order)
