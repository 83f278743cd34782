import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dephasing_discrimination.bounds import exact_unconstrained
from dephasing_discrimination.dephasing import apply_channel
from dephasing_discrimination.discrimination import (DiscriminationProblem, PovmElement, delta,
                                                     delta_trace_norms, entangled_delta_norm,
                                                     helstrom_error, povm_response,
                                                     povm_response_oracle,
                                                     product_probe_delta_norms,
                                                     random_density_matrix, random_povm_element,
                                                     random_pure_vector)
from dephasing_discrimination.errors import ValidationError
from dephasing_discrimination.numerics import trace_norm
from dephasing_discrimination.states import DensityMatrix, QubitProbe, qubit_probe_vector

from oracles import dense_kron_power

P = DiscriminationProblem(0.1, 1.0, 0.5)


def test_problem_defaults_and_validation():
    p = DiscriminationProblem(0.2, 0.4, 0.3)
    assert p.q2 == pytest.approx(0.7)
    assert p.equal_priors().q1 == 0.5
    assert p.as_dict() == {"gamma1": 0.2, "gamma2": 0.4, "q1": 0.3, "q2": p.q2}
    assert p.coefficients(0) == pytest.approx(0.3 - 0.7)
    with pytest.raises(ValidationError):
        DiscriminationProblem(-0.1, 1.0)
    with pytest.raises(ValidationError):
        DiscriminationProblem(0.1, 1.0, 1.2)
    with pytest.raises(ValidationError):
        DiscriminationProblem(0.1, 1.0, 0.5, 0.6)


def test_povm_element_validation():
    with pytest.raises(ValidationError):
        PovmElement(2 * np.eye(2))
    with pytest.raises(ValidationError):
        PovmElement(np.array([[0, 1], [0, 0]]))
    assert PovmElement(0.5 * np.eye(3)).dim == 3


def test_delta_matches_channel_outputs():
    rho = random_density_matrix(6, np.random.default_rng(0))
    ref = 0.5 * apply_channel(0.1, rho).entries - 0.5 * apply_channel(1.0, rho).entries
    assert np.allclose(delta(P, rho), ref, atol=1e-15)


def test_delta_multimode():
    rng = np.random.default_rng(1)
    a, b = random_density_matrix(3, rng), random_density_matrix(3, rng)
    D = delta(P, a.kron(b))
    ref = (0.5 * np.kron(apply_channel(0.1, a).entries, apply_channel(0.1, b).entries)
           - 0.5 * np.kron(apply_channel(1.0, a).entries, apply_channel(1.0, b).entries))
    assert np.allclose(D, ref, atol=1e-15)


def test_batched_trace_norms():
    rng = np.random.default_rng(2)
    vecs = np.array([random_pure_vector(7, rng) for _ in range(9)])
    got = delta_trace_norms(P, vecs)
    ref = [trace_norm(delta(P, DensityMatrix.from_vector(v))) for v in vecs]
    assert np.allclose(got, ref, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.floats(0.0, 1.0), st.integers(0, 2**32 - 1))
def test_helstrom_error_range(d, q1, seed):
    p = DiscriminationProblem(0.3, 1.7, q1)
    rho = random_density_matrix(d, np.random.default_rng(seed))
    err = helstrom_error(p, rho)
    assert 0 <= err <= min(p.q1, p.q2) + 1e-15


def test_helstrom_identical_channels():
    rho = random_density_matrix(4, np.random.default_rng(3))
    assert helstrom_error(DiscriminationProblem(0.5, 0.5, 0.5), rho) == pytest.approx(0.5)


@pytest.mark.parametrize("d, gamma, seed", [(2, 0.1, 0), (5, 0.8, 1), (8, 2.5, 2)])
def test_povm_response_matches_phase_average(d, gamma, seed):
    rng = np.random.default_rng(seed)
    pi = random_povm_element(d, rng)
    rho = random_density_matrix(d, rng)
    assert povm_response(pi, gamma, rho) == pytest.approx(povm_response_oracle(pi, gamma, rho),
                                                           abs=1e-10)
    assert povm_response_oracle(pi, 0.0, rho) == pytest.approx(povm_response(pi, 0.0, rho))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.floats(0.01, 4.0), st.integers(0, 2**32 - 1))
def test_povm_response_positive_for_full_rank_inputs(d, gamma, seed):
    rng = np.random.default_rng(seed)
    pi = random_povm_element(d, rng)
    rho = random_density_matrix(d, rng)
    v = povm_response(pi, gamma, rho)
    assert v >= -1e-10
    if np.trace(pi.entries).real > 1e-6:
        assert v > 1e-8


def test_povm_shape_mismatch():
    with pytest.raises(ValidationError):
        povm_response(PovmElement(np.eye(2) / 2), 0.1, random_density_matrix(3, np.random.default_rng(0)))


def test_entangled_delta_norm_on_product_state_reduces():
    rng = np.random.default_rng(4)
    a, b = random_density_matrix(4, rng), random_density_matrix(4, rng)
    assert entangled_delta_norm(P, a.kron(b)) == pytest.approx(trace_norm(delta(P, b)), abs=1e-13)
    with pytest.raises(ValidationError):
        entangled_delta_norm(P, a)


def test_maximally_entangled_below_unconstrained_optimum():
    d = 6
    psi = np.eye(d).ravel() / math.sqrt(d)
    v = entangled_delta_norm(P, DensityMatrix.from_vector(psi, modes=2))
    assert v <= exact_unconstrained(P).value + 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_entangled_states_below_unconstrained_optimum(seed):
    psi = random_pure_vector(36, np.random.default_rng(seed))
    v = entangled_delta_norm(P, DensityMatrix.from_vector(psi, modes=2))
    assert v <= exact_unconstrained(P).value + 1e-6


@pytest.mark.parametrize("n", [1, 2, 3])
def test_product_probe_norms_match_dense_evaluation(n):
    probe = QubitProbe(2, 0.35)
    psi = qubit_probe_vector(probe, 3)
    rho = DensityMatrix.from_vector(dense_kron_power(psi[:, None], n).ravel(), modes=n)
    ref = trace_norm(delta(P, rho))
    assert product_probe_delta_norms(P, [2], [0.35], n)[0] == pytest.approx(ref, abs=1e-13)


def test_product_probe_validation():
    with pytest.raises(ValidationError):
        product_probe_delta_norms(P, [0], [0.3], 2)
    with pytest.raises(ValidationError):
        product_probe_delta_norms(P, [1, 2], [0.3], 2)
