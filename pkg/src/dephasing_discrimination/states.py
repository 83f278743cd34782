"""Probe states in a truncated Fock basis and energy-constrained sampling."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ValidationError
from .numerics import child_rng

__all__ = [
    "DensityMatrix",
    "QubitProbe",
    "EnergyBudget",
    "ENERGY_TOL",
    "qubit_probe_state",
    "qubit_probe_vector",
    "uniform_probe",
    "uniform_probe_vector",
    "mean_energy",
    "vector_energies",
    "sample_constrained_state",
    "sample_constrained_vectors",
]

#: Slack on the energy constraint that absorbs rounding in closed-form probes.
ENERGY_TOL = 1e-12
MAX_REJECTION_ATTEMPTS = 100_000
STRATEGIES = ("rejection", "qubit_family", "mixed")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on ``modes`` modes.

    ``entries`` has side ``dim**modes``; multimode indices follow ``numpy.kron``
    order (mode 0 slowest).
    """

    entries: np.ndarray
    modes: int = 1

    def __post_init__(self):
        A = np.asarray(self.entries, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError(f"density matrix must be square, got {A.shape}")
        if self.modes < 1:
            raise ValidationError("modes must be >= 1")
        d = _mode_dim(A.shape[0], self.modes)
        if np.abs(A - A.conj().T).max() > 1e-12:
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(A).real
        if abs(tr - 1) > 1e-12:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(A)[0] < -1e-10:
            raise ValidationError("density matrix is not positive semidefinite")
        object.__setattr__(self, "entries", A)
        object.__setattr__(self, "_dim", d)

    @classmethod
    def _trusted(cls, entries, modes=1):
        # skip validation for outputs of maps known to preserve the invariants
        obj = object.__new__(cls)
        A = np.asarray(entries, dtype=complex)
        object.__setattr__(obj, "entries", A)
        object.__setattr__(obj, "modes", modes)
        object.__setattr__(obj, "_dim", _mode_dim(A.shape[0], modes))
        return obj

    @classmethod
    def from_vector(cls, psi, modes=1):
        psi = np.asarray(psi, dtype=complex).ravel()
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ValidationError("zero vector is not a state")
        psi = psi / nrm
        return cls(np.outer(psi, psi.conj()), modes=modes)

    @property
    def dim(self):
        """Per-mode truncation dimension."""
        return self._dim

    @property
    def size(self):
        return self.entries.shape[0]

    def kron(self, other):
        return DensityMatrix._trusted(np.kron(self.entries, other.entries),
                                      modes=self.modes + other.modes)


def _mode_dim(size, modes):
    d = int(round(size ** (1.0 / modes)))
    if d**modes != size:
        raise ValidationError(f"size {size} is not a {modes}-th power")
    return d


@dataclass(frozen=True)
class QubitProbe:
    """Superposition of vacuum and Fock level ``m`` with excited population ``r_m``."""

    m: int
    r_m: float

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError(f"excited level must be >= 1, got {self.m}")
        if not 0 <= self.r_m <= 1:
            raise ValidationError(f"excited population must be in [0, 1], got {self.r_m}")

    @property
    def r_0(self):
        return 1.0 - self.r_m


@dataclass(frozen=True)
class EnergyBudget:
    E: float

    def __post_init__(self):
        if not self.E >= 0:
            raise ValidationError(f"energy budget must be >= 0, got {self.E}")

    @property
    def levels(self):
        """``floor(2E)``, the top Fock level of the flat probe that fits the budget."""
        return int(math.floor(2 * self.E))


def _budget(b):
    return b if isinstance(b, EnergyBudget) else EnergyBudget(float(b))


def qubit_probe_vector(p, dim):
    if dim <= p.m:
        raise ValidationError(f"dimension {dim} cannot hold level {p.m}")
    psi = np.zeros(dim, dtype=complex)
    psi[0] = math.sqrt(p.r_0)
    psi[p.m] = math.sqrt(p.r_m)
    return psi


def qubit_probe_state(p, dim):
    """Pure state ``sqrt(r_0)|0> + sqrt(r_m)|m>`` as a density matrix."""
    if dim <= p.m:
        raise ValidationError(f"dimension {dim} cannot hold level {p.m}")
    d = np.zeros((dim, dim))
    c = math.sqrt(p.r_0 * p.r_m)
    d[0, 0], d[p.m, p.m] = p.r_0, p.r_m
    d[0, p.m] = d[p.m, 0] = c
    return DensityMatrix._trusted(d)


def uniform_probe_vector(M, dim):
    if dim < M + 1:
        raise ValidationError(f"dimension {dim} cannot hold levels 0..{M}")
    psi = np.zeros(dim, dtype=complex)
    psi[:M + 1] = 1.0 / math.sqrt(M + 1)
    return psi


def uniform_probe(M, dim):
    """Projector onto the equal superposition of Fock levels ``0..M``."""
    if M < 0 or dim < M + 1:
        raise ValidationError(f"dimension {dim} cannot hold levels 0..{M}")
    d = np.zeros((dim, dim))
    d[:M + 1, :M + 1] = 1.0 / (M + 1)
    return DensityMatrix._trusted(d)


def mean_energy(rho):
    """Expected total photon number, summed over modes."""
    pops = np.real(np.diag(rho.entries))
    if rho.modes == 1:
        n = np.arange(rho.dim)
    else:
        digits = np.unravel_index(np.arange(rho.size), (rho.dim,) * rho.modes)
        n = np.sum(digits, axis=0)
    return max(math.fsum(n * pops), 0.0)


def vector_energies(vectors):
    """Photon-number expectation of each row of a ``(count, dim)`` array of unit vectors."""
    v = np.atleast_2d(vectors)
    return (np.abs(v) ** 2) @ np.arange(v.shape[1])


def _haar_vector(rng, dim, E):
    """Complex-normal amplitudes, rejected until the energy fits the budget."""
    levels = np.arange(dim)
    block = 256
    tried = 0
    while tried < MAX_REJECTION_ATTEMPTS:
        z = rng.standard_normal((block, dim)) + 1j * rng.standard_normal((block, dim))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        energies = (np.abs(z) ** 2) @ levels
        hit = np.flatnonzero(energies <= E)
        if hit.size:
            return z[hit[0]]
        tried += block
    raise ValidationError(
        f"rejection sampling found no state with energy <= {E} in dimension {dim} after "
        f"{MAX_REJECTION_ATTEMPTS} attempts; use strategy 'qubit_family' or 'mixed'")


def _qubit_vector(rng, dim, E):
    while True:
        m = int(rng.integers(1, dim))
        r = min(1.0, E / m) * rng.random()
        psi = qubit_probe_vector(QubitProbe(m, r), dim)
        if vector_energies(psi)[0] <= E:
            return psi


def _draw(rng, dim, E, strategy):
    if strategy == "rejection":
        return _haar_vector(rng, dim, E)
    if strategy == "qubit_family":
        return _qubit_vector(rng, dim, E)
    if rng.random() < 0.5:
        return _haar_vector(rng, dim, E)
    return _qubit_vector(rng, dim, E)


def _check_strategy(strategy, dim):
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if dim < 2:
        raise ValidationError("sampling needs dim >= 2")


def sample_constrained_vectors(dim, budget, count, strategy="mixed", seed=0):
    """Draw ``count`` pure states with mean photon number at most ``budget.E``.

    Draw ``i`` uses the child stream ``(seed, i)``. With ``strategy='mixed'``
    each draw is a fair coin between a rejection-sampled random state and a
    random qubit probe, and row 0 is replaced by the flat probe on levels
    ``0..min(floor(2E), dim - 1)`` when ``E >= 1/2``.

    Returns
    -------
    ndarray, shape (count, dim)
        Unit state vectors.
    """
    budget = _budget(budget)
    _check_strategy(strategy, dim)
    out = np.zeros((count, dim), dtype=complex)
    if budget.E == 0:
        out[:, 0] = 1.0
        return out
    start = 0
    if strategy == "mixed" and budget.E >= 0.5 and count:
        out[0] = uniform_probe_vector(min(budget.levels, dim - 1), dim)
        start = 1
    for i in range(start, count):
        out[i] = _draw(child_rng(seed, i), dim, budget.E, strategy)
    return out


def sample_constrained_state(dim, budget, strategy="mixed", seed=0):
    """One random pure state obeying the energy budget, as a density matrix."""
    budget = _budget(budget)
    _check_strategy(strategy, dim)
    if budget.E == 0:
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
    else:
        psi = _draw(child_rng(seed, 0), dim, budget.E, strategy)
    return DensityMatrix(np.outer(psi, psi.conj()))
