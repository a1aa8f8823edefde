import math

import mpmath as mp
import numpy as np
import pytest

from fratio.errors import CancellationError, DivergenceError, DomainError, PoleCollisionError, PoleTieError
from fratio.mellin import (
    ContourPolicy,
    GammaRatioKernel,
    eval_contour,
    eval_contour_many,
    eval_residues,
    leading_term,
    pole_collision,
    valid_strip,
)

mp.mp.dps = 30


def line_oracle(k: GammaRatioKernel, x: float) -> float:
    """The integral by mpmath quadrature on the vertical line through the strip centre."""
    lo, hi = valid_strip(k)
    lo = max(lo, hi - 2.0)
    hi = min(hi, lo + 4.0)
    c = mp.mpf(0.5 * (lo + hi))
    lx = k.argument_exponent_sign * mp.log(x)

    def g(t):
        s = c + 1j * t
        v = mp.exp(k.log_prefactor + s * lx)
        for a in k.num_plus:
            v *= mp.gamma(a + s)
        for b in k.num_minus:
            v *= mp.gamma(b - s)
        for a in k.den_plus:
            v /= mp.gamma(a + s)
        for b in k.den_minus:
            v /= mp.gamma(b - s)
        if k.cdf_factor:
            v *= -1 / s
        return v

    return float(mp.re(mp.quad(g, [-mp.inf, -10, 0, 10, mp.inf])) / (2 * mp.pi))


KERNELS = [
    GammaRatioKernel((1.3,), (2.1,)),
    GammaRatioKernel((0.7, 2.2), (1.9, 3.4)),
    GammaRatioKernel((0.7, 2.2), (1.9, 3.4), cdf_factor=True),
    GammaRatioKernel((1.5, 2.5, 3.3), (1.1, 4.2, 2.6), log_prefactor=-1.2),
    GammaRatioKernel((0.0, 2.5), (1.5,)),
    GammaRatioKernel((1.2,), (2.0,), den_plus=(3.1,)),
    GammaRatioKernel((1.2, 0.8), (2.0,), den_minus=(2.7,)),
    GammaRatioKernel((1.3,), (2.1,), argument_exponent_sign=-1),
]


@pytest.mark.parametrize("kernel", KERNELS)
@pytest.mark.parametrize("x", [0.05, 0.7, 1.0, 3.0, 40.0])
def test_contour_matches_quadrature_oracle(kernel, x):
    want = line_oracle(kernel, x)
    got = eval_contour(kernel, x)
    assert got == pytest.approx(want, rel=1e-10, abs=1e-14)


def test_oracle_reproduces_known_meijer_g():
    # G^{1,1}_{1,1}(x | 1-a ; b) = Gamma(a+b) x^b / (1+x)^(a+b)
    k = GammaRatioKernel((2.0,), (3.0,))
    x = 0.4
    want = math.gamma(5.0) * (1 / x) ** 2 / (1 + 1 / x) ** 5
    assert line_oracle(k, x) == pytest.approx(want, rel=1e-12)
    assert eval_contour(k, x) == pytest.approx(want, rel=1e-12)


def test_midpoint_policy_agrees_with_saddle():
    k = KERNELS[3]
    xs = np.array([0.2, 1.0, 5.0])
    a = eval_contour_many(k, xs)
    b = eval_contour_many(k, xs, ContourPolicy(abscissa="midpoint"))
    assert np.allclose(a, b, rtol=1e-10, atol=1e-15)


def test_batch_equals_scalar_calls():
    k = KERNELS[2]
    xs = np.geomspace(1e-3, 1e3, 17)
    batch = eval_contour_many(k, xs)
    single = np.array([eval_contour(k, x) for x in xs])
    assert np.allclose(batch, single, rtol=1e-12, atol=0)


def test_saddle_keeps_relative_accuracy_in_deep_tail():
    # gamma(m) * gamma(m_s) * F cdf kernel of a single F variate, far into the lower tail
    m, ms = 3.0, 4.0
    k = GammaRatioKernel((m,), (ms,), cdf_factor=True,
                         log_prefactor=-math.lgamma(m) - math.lgamma(ms))
    x = 1e8
    want = line_oracle(k, x)
    assert eval_contour(k, x) == pytest.approx(want, rel=1e-10)


def test_valid_strip():
    assert valid_strip(KERNELS[1]) == (-0.7, 1.9)
    lo, hi = valid_strip(KERNELS[2])
    assert (lo, hi) == (-0.7, 0.0)


@pytest.mark.parametrize("kernel", [
    GammaRatioKernel((-0.5,), (0.2,)),
    GammaRatioKernel((1.0,), (-1.0,)),
])
def test_empty_strip_raises(kernel):
    with pytest.raises(DomainError):
        eval_contour(kernel, 1.0)


def test_nonpositive_argument_raises():
    with pytest.raises(DomainError):
        eval_contour(KERNELS[0], 0.0)
    with pytest.raises(DomainError):
        eval_residues(KERNELS[0], -1.0)


def _random_generic_kernels(count, seed=3):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, 4))
        plus = tuple(rng.uniform(0.6, 6.0, n))
        minus = tuple(rng.uniform(1.1, 8.0, n))
        k = GammaRatioKernel(plus, minus, cdf_factor=bool(rng.integers(0, 2)),
                             log_prefactor=-sum(math.lgamma(v) for v in plus + minus))
        if pole_collision(k).generic:
            out.append(k)
    return out


@pytest.mark.parametrize("kernel", _random_generic_kernels(25))
@pytest.mark.parametrize("x", [100.0, 300.0, 5000.0])
def test_residues_match_contour(kernel, x):
    assert abs(eval_residues(kernel, x) - eval_contour(kernel, x)) <= 1e-8


@pytest.mark.parametrize("kernel", _random_generic_kernels(25, seed=5))
@pytest.mark.parametrize("x", [2.0, 5.0, 15.0])
def test_residues_either_agree_or_refuse(kernel, x):
    try:
        val = eval_residues(kernel, x)
    except CancellationError:
        return
    assert abs(val - eval_contour(kernel, x)) <= 1e-8


def test_residue_cancellation_is_reported():
    k = GammaRatioKernel((0.9, 2.3, 4.15), (6.2, 7.1, 5.3),
                         log_prefactor=-sum(math.lgamma(v) for v in (0.9, 2.3, 4.15, 6.2, 7.1, 5.3)))
    with pytest.raises(CancellationError):
        eval_residues(k, 2.0)


def test_residue_series_diverges_where_expected():
    with pytest.raises(DivergenceError):
        eval_residues(GammaRatioKernel((1.3,), (2.1,)), 0.5)


def test_pole_collision_detection():
    assert pole_collision(GammaRatioKernel((2.0, 2.0), (3.0, 3.0))).collided
    assert pole_collision(GammaRatioKernel((1.5, 3.5), (3.0,))).collided
    assert pole_collision(GammaRatioKernel((1.5, 3.2), (3.0,))).generic
    with pytest.raises(PoleCollisionError):
        eval_residues(GammaRatioKernel((2.0, 2.0), (3.0, 3.0)), 5.0)


def test_collided_kernel_still_evaluates_on_contour():
    k = GammaRatioKernel((2.0, 2.0), (3.0, 3.0), cdf_factor=True)
    assert eval_contour(k, 4.0) == pytest.approx(line_oracle(k, 4.0), rel=1e-10)


def test_leading_term_simple_pole_is_first_residue():
    k = GammaRatioKernel((1.3, 2.9), (2.1, 3.3))
    lead = leading_term(k, 1e6)
    assert lead.exponent == 1.3 and lead.order == 1
    assert lead.value == pytest.approx(eval_residues(k, 1e6, max_terms=1), rel=1e-14)
    assert lead.value == pytest.approx(eval_contour(k, 1e6), rel=1e-4)


def test_leading_term_double_pole():
    k = GammaRatioKernel((2.0, 2.0), (3.0, 3.0))
    with pytest.raises(PoleTieError):
        leading_term(k, 1e8)
    lead = leading_term(k, 1e8, allow_multiple=True)
    assert lead.order == 2
    # residue of a double pole carries log x; compare with the exact value
    assert lead.value == pytest.approx(eval_contour(k, 1e8), rel=1e-5)
