"""Two-hypothesis discrimination functionals for dephasing channels.

``delta(problem, rho)`` is the prior-weighted output difference
``q1 N_g1(rho) - q2 N_g2(rho)``; its trace norm fixes the Helstrom error.
"""

from dataclasses import dataclass
import math

import numpy as np

from .dephasing import (apply_tensor_channel, coherence_factors, tensor_coherence_factors,
                        wrapped_pdf)
from .errors import ValidationError
from .numerics import QuadratureSpec, integrate_periodic, trace_norm
from .states import DensityMatrix

__all__ = [
    "DiscriminationProblem",
    "PovmElement",
    "random_povm_element",
    "random_density_matrix",
    "random_pure_vector",
    "delta",
    "delta_trace_norms",
    "helstrom_error",
    "povm_response",
    "povm_response_oracle",
    "entangled_delta_norm",
    "product_probe_delta_norms",
]


@dataclass(frozen=True)
class DiscriminationProblem:
    """Channels ``N_gamma1`` and ``N_gamma2`` with prior probabilities ``q1`` and ``q2``.

    ``q2`` defaults to ``1 - q1``.
    """

    gamma1: float
    gamma2: float
    q1: float = 0.5
    q2: float = None

    def __post_init__(self):
        q2 = 1.0 - self.q1 if self.q2 is None else self.q2
        object.__setattr__(self, "q2", float(q2))
        for g in (self.gamma1, self.gamma2):
            if not (g >= 0 and math.isfinite(g)):
                raise ValidationError(f"dephasing rates must be finite and >= 0, got {g}")
        if not (0 <= self.q1 <= 1 and 0 <= self.q2 <= 1):
            raise ValidationError("priors must lie in [0, 1]")
        if abs(self.q1 + self.q2 - 1) > 1e-12:
            raise ValidationError(f"priors must sum to 1, got {self.q1} + {self.q2}")

    def coefficients(self, k):
        """``q1 exp(-gamma1 k^2/2) - q2 exp(-gamma2 k^2/2)``."""
        k = np.asarray(k, dtype=float)
        return self.q1 * np.exp(-0.5 * self.gamma1 * k * k) - self.q2 * np.exp(-0.5 * self.gamma2 * k * k)

    def equal_priors(self):
        return DiscriminationProblem(self.gamma1, self.gamma2, 0.5, 0.5)

    def as_dict(self):
        return {"gamma1": self.gamma1, "gamma2": self.gamma2, "q1": self.q1, "q2": self.q2}


@dataclass(frozen=True, eq=False)
class PovmElement:
    """Effect operator with ``0 <= Pi <= I``."""

    entries: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.entries, dtype=complex)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValidationError("POVM element must be square")
        if np.abs(P - P.conj().T).max(initial=0.0) > 1e-12:
            raise ValidationError("POVM element is not Hermitian")
        ev = np.linalg.eigvalsh(P)
        if ev[0] < -1e-10 or ev[-1] > 1 + 1e-10:
            raise ValidationError("POVM element must satisfy 0 <= Pi <= I")
        object.__setattr__(self, "entries", P)

    @property
    def dim(self):
        return self.entries.shape[0]


def random_povm_element(dim, rng):
    """``u G^+G / lambda_max(G^+G)`` for complex Ginibre ``G`` and ``u ~ U[0, 1]``."""
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    P = G.conj().T @ G
    P = 0.5 * (P + P.conj().T)
    P /= np.linalg.eigvalsh(P)[-1]
    return PovmElement(rng.random() * P)


def random_density_matrix(dim, rng, rank=None):
    """Induced-measure random state; full rank when ``rank`` is None."""
    rank = rank or 2 * dim
    G = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def random_pure_vector(dim, rng):
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def delta(problem, rho):
    """``q1 N_g1(rho) - q2 N_g2(rho)``; every mode of ``rho`` passes through the channel."""
    if rho.modes == 1:
        mask = (problem.q1 * coherence_factors(problem.gamma1, rho.dim)
                - problem.q2 * coherence_factors(problem.gamma2, rho.dim))
        return mask * rho.entries
    out1 = apply_tensor_channel(problem.gamma1, rho).entries
    out2 = apply_tensor_channel(problem.gamma2, rho).entries
    return problem.q1 * out1 - problem.q2 * out2


def delta_trace_norms(problem, vectors):
    """``||delta(|psi><psi|)||_1`` for each row of a ``(count, dim)`` array of unit vectors."""
    v = np.atleast_2d(vectors)
    dim = v.shape[1]
    mask = (problem.q1 * coherence_factors(problem.gamma1, dim)
            - problem.q2 * coherence_factors(problem.gamma2, dim))
    out = np.empty(v.shape[0])
    step = 4096
    for s in range(0, v.shape[0], step):
        blk = v[s:s + step]
        D = blk[:, :, None] * blk.conj()[:, None, :] * mask
        out[s:s + step] = np.abs(np.linalg.eigvalsh(D)).sum(axis=1)
    return out


def helstrom_error(problem, rho):
    """Minimum error probability ``(1 - ||q1 N1(rho) - q2 N2(rho)||_1) / 2``."""
    p = 0.5 * (1.0 - trace_norm(delta(problem, rho)))
    return min(max(p, 0.0), min(problem.q1, problem.q2))


def _check_pair(pi, rho):
    if pi.dim != rho.size:
        raise ValidationError(f"POVM dimension {pi.dim} does not match state size {rho.size}")


def povm_response(pi, gamma, rho):
    """Outcome probability ``Tr(Pi N_gamma(rho))`` for a single-mode state."""
    _check_pair(pi, rho)
    out = coherence_factors(gamma, rho.dim) * rho.entries
    return float(np.real(np.sum(pi.entries.T * out)))


def povm_response_oracle(pi, gamma, rho, spec=None):
    """``int p_gamma(theta) Tr(U Pi U^+ rho) dtheta`` by quadrature over the phase."""
    _check_pair(pi, rho)
    if gamma == 0:
        return float(np.real(np.sum(pi.entries.T * rho.entries)))
    spec = spec or QuadratureSpec(abs_tol=1e-13)
    n = np.arange(rho.dim)
    # Tr(U Pi U^+ rho) = sum_{mn} Pi_mn rho_nm exp(i (m - n) theta)
    kern = pi.entries * rho.entries.T
    diff = n[:, None] - n[None, :]

    def f(theta):
        ph = np.exp(1j * theta[:, None, None] * diff[None])
        tr = np.real((ph * kern[None]).sum(axis=(1, 2)))
        return wrapped_pdf(gamma, theta) * tr

    return float(integrate_periodic(f, spec))


def entangled_delta_norm(problem, rho_ab):
    """``||q1 (id x N1)(rho) - q2 (id x N2)(rho)||_1`` on a two-mode state."""
    if rho_ab.modes != 2:
        raise ValidationError(f"expected a bipartite state, got {rho_ab.modes} modes")
    d = rho_ab.dim
    mask = (problem.q1 * tensor_coherence_factors([0.0, problem.gamma1], d)
            - problem.q2 * tensor_coherence_factors([0.0, problem.gamma2], d))
    return trace_norm(mask * rho_ab.entries)


def _batch_kron_power(B, n):
    P = np.ones((B.shape[0], 1, 1))
    for _ in range(n):
        k = P.shape[1] * B.shape[1]
        P = (P[:, :, None, :, None] * B[:, None, :, None, :]).reshape(B.shape[0], k, k)
    return P


def product_probe_delta_norms(problem, levels, populations, n):
    """``||q1 N1(psi)^{(x)n} - q2 N2(psi)^{(x)n}||_1`` for qubit probes ``psi`` on ``{|0>, |m>}``.

    Each output copy lives on the span of ``|0>`` and ``|m>``, so the n-fold
    difference is evaluated exactly as a ``2^n x 2^n`` matrix.
    """
    m = np.atleast_1d(np.asarray(levels, dtype=float))
    r = np.atleast_1d(np.asarray(populations, dtype=float))
    if m.shape != r.shape:
        raise ValidationError("levels and populations must have the same shape")
    if np.any(m < 1) or np.any((r < 0) | (r > 1)):
        raise ValidationError("need levels >= 1 and populations in [0, 1]")
    c = np.sqrt(r * (1 - r))

    def blocks(gamma):
        B = np.empty((m.size, 2, 2))
        B[:, 0, 0] = 1 - r
        B[:, 1, 1] = r
        B[:, 0, 1] = B[:, 1, 0] = c * np.exp(-0.5 * gamma * m * m)
        return B

    D = (problem.q1 * _batch_kron_power(blocks(problem.gamma1), n)
         - problem.q2 * _batch_kron_power(blocks(problem.gamma2), n))
    return np.abs(np.linalg.eigvalsh(D)).sum(axis=1)
