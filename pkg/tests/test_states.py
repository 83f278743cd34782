import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dephasing_discrimination.errors import ValidationError
from dephasing_discrimination.states import (ENERGY_TOL, DensityMatrix, EnergyBudget, QubitProbe,
                                             mean_energy, qubit_probe_state, qubit_probe_vector,
                                             sample_constrained_state,
                                             sample_constrained_vectors, uniform_probe,
                                             uniform_probe_vector, vector_energies)


def test_density_matrix_validation():
    with pytest.raises(ValidationError, match="square"):
        DensityMatrix(np.ones((2, 3)))
    with pytest.raises(ValidationError, match="Hermitian"):
        DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(ValidationError, match="trace"):
        DensityMatrix(np.eye(2))
    with pytest.raises(ValidationError, match="positive"):
        DensityMatrix(np.array([[1.5, 0], [0, -0.5]]))
    with pytest.raises(ValidationError, match="power"):
        DensityMatrix(np.eye(3) / 3, modes=2)


def test_from_vector_normalizes():
    rho = DensityMatrix.from_vector([1, 1j])
    assert np.allclose(rho.entries, [[0.5, -0.5j], [0.5j, 0.5]])
    with pytest.raises(ValidationError):
        DensityMatrix.from_vector([0, 0])


def test_kron_and_multimode_energy():
    a = qubit_probe_state(QubitProbe(1, 0.3), 3)
    b = uniform_probe(2, 3)
    ab = a.kron(b)
    assert ab.modes == 2 and ab.dim == 3 and ab.size == 9
    assert mean_energy(ab) == pytest.approx(0.3 + 1.0)


def test_probe_validation():
    with pytest.raises(ValidationError):
        QubitProbe(0, 0.5)
    with pytest.raises(ValidationError):
        QubitProbe(1, 1.5)
    with pytest.raises(ValidationError):
        qubit_probe_vector(QubitProbe(3, 0.5), 3)
    with pytest.raises(ValidationError):
        uniform_probe(4, 4)
    with pytest.raises(ValidationError):
        EnergyBudget(-0.1)


@pytest.mark.parametrize("m, r", [(1, 0.5), (3, 0.2), (7, 1.0)])
def test_qubit_probe_energy(m, r):
    p = QubitProbe(m, r)
    assert p.r_0 == pytest.approx(1 - r)
    rho = qubit_probe_state(p, m + 1)
    assert mean_energy(rho) == pytest.approx(m * r)
    psi = qubit_probe_vector(p, m + 1)
    assert np.allclose(np.outer(psi, psi.conj()), rho.entries)


@pytest.mark.parametrize("E", [0.5, 1.0, 2.0, 3.75, 12.0])
def test_uniform_probe_fits_budget(E):
    M = EnergyBudget(E).levels
    rho = uniform_probe(M, M + 1)
    assert mean_energy(rho) == pytest.approx(M / 2)
    assert mean_energy(rho) <= E + ENERGY_TOL
    assert vector_energies(uniform_probe_vector(M, M + 3))[0] == pytest.approx(M / 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 10), st.floats(0.05, 6.0), st.sampled_from(["qubit_family", "mixed"]),
       st.integers(0, 2**32 - 1))
def test_samples_respect_budget(dim, E, strategy, seed):
    v = sample_constrained_vectors(dim, EnergyBudget(E), 20, strategy, seed)
    assert v.shape == (20, dim)
    assert np.allclose(np.linalg.norm(v, axis=1), 1)
    assert vector_energies(v).max() <= E + ENERGY_TOL


def test_sampling_reproducible_and_seed_sensitive():
    a = sample_constrained_vectors(8, 2.0, 50, "mixed", 11)
    assert np.array_equal(a, sample_constrained_vectors(8, 2.0, 50, "mixed", 11))
    assert not np.array_equal(a, sample_constrained_vectors(8, 2.0, 50, "mixed", 12))
    # draw i depends only on (seed, i)
    assert np.array_equal(a[:10], sample_constrained_vectors(8, 2.0, 10, "mixed", 11))


def test_mixed_includes_uniform_probe():
    v = sample_constrained_vectors(8, 2.0, 5, "mixed", 0)
    assert np.allclose(v[0], uniform_probe_vector(4, 8))
    v = sample_constrained_vectors(3, 6.0, 2, "mixed", 0)
    assert np.allclose(v[0], uniform_probe_vector(2, 3))


def test_zero_energy_gives_vacuum():
    v = sample_constrained_vectors(5, 0.0, 4, "rejection", 0)
    assert np.array_equal(np.abs(v), np.tile([1, 0, 0, 0, 0], (4, 1)))
    rho = sample_constrained_state(5, 0.0)
    assert rho.entries[0, 0] == 1


def test_rejection_reports_infeasible_budget():
    with pytest.raises(ValidationError, match="qubit_family"):
        sample_constrained_vectors(32, 0.01, 1, "rejection", 0)


def test_rejection_sampling_works_when_feasible():
    v = sample_constrained_vectors(4, 1.0, 30, "rejection", 5)
    assert vector_energies(v).max() <= 1.0


def test_unknown_strategy():
    with pytest.raises(ValidationError):
        sample_constrained_vectors(4, 1.0, 3, "sobol", 0)
    with pytest.raises(ValidationError):
        sample_constrained_vectors(1, 1.0, 3, "mixed", 0)


def test_single_state_sampler():
    rho = sample_constrained_state(6, 1.5, "qubit_family", 3)
    assert mean_energy(rho) <= 1.5 + ENERGY_TOL
    assert math.isclose(np.trace(rho.entries).real, 1.0)
