import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from dephasing_discrimination.errors import ConvergenceError, ValidationError
from dephasing_discrimination.numerics import (QuadratureSpec, check_hermitian, child_rng,
                                               frobenius_norm, hermitian_eigenvalues,
                                               integrate_periodic, mc_expectation,
                                               minimize_scalar, sign_change_points, trace_norm)


@pytest.mark.parametrize("f, expected", [
    (lambda x: np.cos(x) ** 2, math.pi),
    (lambda x: np.exp(np.cos(x)), 2 * math.pi * special.i0(1.0)),
    (lambda x: x**4, 2 * math.pi**5 / 5),
])
def test_integrate_smooth(f, expected):
    assert integrate_periodic(f) == pytest.approx(expected, abs=1e-11)


def test_integrate_with_kinks_and_breakpoints():
    spec = QuadratureSpec(abs_tol=1e-12, breakpoints=(0.0,))
    assert integrate_periodic(lambda x: np.abs(np.sin(x)), spec) == pytest.approx(4, abs=1e-11)


def test_integrate_kink_without_breakpoint_still_converges():
    assert integrate_periodic(lambda x: np.abs(x - 0.3)) == pytest.approx(
        0.5 * ((math.pi - 0.3) ** 2 + (math.pi + 0.3) ** 2), abs=1e-10)


def test_integrate_array_and_complex_valued():
    k = np.arange(4)
    out = integrate_periodic(lambda x: np.exp(1j * x[:, None] * k[None, :]) * np.exp(np.cos(x))[:, None])
    # int e^{cos x} e^{ikx} = 2 pi I_k(1)
    assert np.allclose(out, 2 * math.pi * special.iv(k, 1.0), atol=1e-11)


def test_integrate_constant_return_broadcasts():
    assert integrate_periodic(lambda x: 1.0) == pytest.approx(2 * math.pi)


def test_integrate_custom_interval_and_error_estimate():
    value, err = integrate_periodic(np.sin, interval=(0.0, math.pi), full_output=True)
    assert value == pytest.approx(2.0, abs=1e-12)
    assert 0 <= err < 1e-10


def test_integrate_budget_exhausted():
    spec = QuadratureSpec(abs_tol=1e-14, max_subdivisions=3)
    with pytest.raises(ConvergenceError) as info:
        integrate_periodic(lambda x: np.abs(np.sin(7.3 * x)) ** 0.5, spec)
    assert info.value.estimate is not None
    assert info.value.residual > 0


def test_integrate_rejects_nonfinite():
    with pytest.raises(ValidationError, match="not finite"):
        integrate_periodic(lambda x: np.where(x > 1, np.nan, x))


def test_quadrature_spec_validation():
    with pytest.raises(ValidationError):
        QuadratureSpec(abs_tol=0)
    with pytest.raises(ValidationError):
        QuadratureSpec(max_subdivisions=-1)
    spec = QuadratureSpec().with_breakpoints([1.0, -1.0])
    assert spec.breakpoints == (-1.0, 1.0)


def test_sign_change_points():
    roots = sign_change_points(lambda x: np.cos(x))
    assert np.allclose(roots, [-math.pi / 2, math.pi / 2], atol=1e-13)
    assert len(sign_change_points(lambda x: 1.0 + 0 * x)) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_trace_norm_is_sum_of_singular_values(d, seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    H = G + G.conj().T
    assert trace_norm(H) == pytest.approx(np.linalg.svd(H, compute_uv=False).sum(), rel=1e-12)
    assert frobenius_norm(H) == pytest.approx(np.linalg.norm(H), rel=1e-12)
    assert np.all(np.diff(hermitian_eigenvalues(H)) >= 0)


def test_check_hermitian():
    with pytest.raises(ValidationError):
        check_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        check_hermitian(np.ones((2, 3)))
    check_hermitian(np.array([[1, 1j], [-1j, 2]]))


def test_minimize_scalar_interior_and_boundary():
    x, v = minimize_scalar(lambda s: (s - 0.3) ** 2 + 1, 0, 1)
    assert x == pytest.approx(0.3, abs=1e-8) and v == pytest.approx(1)
    x, v = minimize_scalar(lambda s: s, 0, 1)
    assert x == pytest.approx(0, abs=1e-9)


def test_child_rng_is_reproducible_and_independent():
    a = child_rng(7, 3).random(5)
    assert np.array_equal(a, child_rng(7, 3).random(5))
    assert not np.array_equal(a, child_rng(7, 4).random(5))
    assert not np.array_equal(a, child_rng(8, 3).random(5))
    with pytest.raises(ValidationError):
        child_rng(-1, 0)
    with pytest.raises(ValidationError):
        child_rng(2**64, 0)


def _uniform(rng, size):
    return rng.random(size)


def test_mc_constant_is_exact():
    est = mc_expectation(_uniform, lambda x: np.full(x.shape, 0.25), 1000, 0)
    assert est.value == 0.25 and est.std_error == 0.0


def test_mc_mean_and_error_scale():
    est = mc_expectation(_uniform, lambda x: x, 200_000, 1)
    assert abs(est.value - 0.5) < 4 * est.std_error
    assert est.std_error == pytest.approx(math.sqrt(1 / 12 / 200_000), rel=0.02)
    again = mc_expectation(_uniform, lambda x: x, 200_000, 1)
    assert again.value == est.value


def test_mc_reproducible_with_small_chunks():
    a = mc_expectation(_uniform, lambda x: x**2, 5000, 3, chunk_size=1000)
    b = mc_expectation(_uniform, lambda x: x**2, 5000, 3, chunk_size=1000)
    assert a.value == b.value


def test_mc_rejects_small_sample_and_nonfinite():
    with pytest.raises(ValidationError):
        mc_expectation(_uniform, lambda x: x, 10, 0)
    with pytest.raises(ValidationError, match="draw"):
        mc_expectation(_uniform, lambda x: np.where(x > 0.5, np.inf, x), 1000, 0)
