"""Multilevel Toeplitz matrices and their spectral averages.

Flat index convention: level 1 varies fastest,
``flat = i_1 + M i_2 + ... + M^{n-1} i_n``. For a tensor power built with
``numpy.kron`` the *last* factor varies fastest, so
``kron(T_n, ..., T_1)`` matches coefficients ``f(k_1, ..., k_n) = prod_l t_l(k_l)``.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from .bounds import product_l1_distance
from .dephasing import fourier_coefficient
from .discrimination import DiscriminationProblem
from .errors import BudgetError, ValidationError

__all__ = [
    "MAX_ORDER",
    "MultiIndexCoefficients",
    "MultilevelToeplitz",
    "build_multilevel",
    "multi_index_matrix",
    "tensor_diff_coeffs",
    "tensor_power_difference",
    "dephasing_difference_coeffs",
    "szego_functional",
    "szego_limit",
]

#: Largest matrix side (M**n) accepted for dense eigen work.
MAX_ORDER = 4096


@dataclass(frozen=True)
class MultiIndexCoefficients:
    """Coefficients ``f(k_1, ..., k_n)`` for nonnegative lags ``k_l < M``.

    ``coeff_fn`` is called with ``n`` broadcastable integer arrays.
    """

    levels: int
    coeff_fn: Callable
    M: int

    def __post_init__(self):
        if self.levels < 1 or self.M < 1:
            raise ValidationError("levels and M must be >= 1")

    def table(self):
        """Array of shape ``(M,) * levels`` with ``table[k_1, ..., k_n] = f(k_1, ..., k_n)``."""
        ks = np.indices((self.M,) * self.levels)
        return np.broadcast_to(np.asarray(self.coeff_fn(*ks), dtype=float),
                               (self.M,) * self.levels).copy()


@dataclass(frozen=True, eq=False)
class MultilevelToeplitz:
    n: int
    M: int
    matrix: np.ndarray


def _check_size(n, M):
    if M**n > MAX_ORDER:
        raise BudgetError(f"multilevel size M^n = {M**n} exceeds the cap {MAX_ORDER}")


def _assemble(table):
    # block Toeplitz over the slowest level, recursing into the faster ones
    if table.ndim == 1:
        return linalg.toeplitz(table)
    blocks = [_assemble(table[..., k]) for k in range(table.shape[-1])]
    M = len(blocks)
    return np.block([[blocks[abs(i - j)] for j in range(M)] for i in range(M)])


def build_multilevel(coeffs):
    """Assemble the n-level Toeplitz matrix by recursion on the number of levels."""
    _check_size(coeffs.levels, coeffs.M)
    mat = _assemble(coeffs.table())
    return MultilevelToeplitz(coeffs.levels, coeffs.M, mat)


def multi_index_matrix(coeffs):
    """Direct entry rule ``[T]_{ij} = f(|i_1 - j_1|, ..., |i_n - j_n|)``.

    Independent of :func:`build_multilevel`; used to cross-check it.
    """
    n, M = coeffs.levels, coeffs.M
    _check_size(n, M)
    flat = np.arange(M**n)
    digits = [(flat // M**l) % M for l in range(n)]
    lags = [np.abs(d[:, None] - d[None, :]) for d in digits]
    return coeffs.table()[tuple(lags)]


def tensor_diff_coeffs(t1, t2, n, M, w1=1.0, w2=1.0):
    """Coefficients ``w1 prod_l t1(k_l) - w2 prod_l t2(k_l)`` of ``w1 T(t1)^{(x)n} - w2 T(t2)^{(x)n}``."""
    c1 = np.array([t1(k) for k in range(M)], dtype=float)
    c2 = np.array([t2(k) for k in range(M)], dtype=float)

    def f(*ks):
        p1 = np.ones(np.broadcast(*ks).shape)
        p2 = np.ones_like(p1)
        for k in ks:
            p1 = p1 * c1[k]
            p2 = p2 * c2[k]
        return w1 * p1 - w2 * p2

    return MultiIndexCoefficients(n, f, M)


def tensor_power_difference(t1, t2, n, M, w1=1.0, w2=1.0):
    """``w1 T_M(t1)^{(x)n} - w2 T_M(t2)^{(x)n}`` by explicit Kronecker products."""
    _check_size(n, M)
    T1 = linalg.toeplitz([t1(k) for k in range(M)])
    T2 = linalg.toeplitz([t2(k) for k in range(M)])
    P1 = P2 = np.ones((1, 1))
    for _ in range(n):
        P1 = np.kron(P1, T1)
        P2 = np.kron(P2, T2)
    return w1 * P1 - w2 * P2


def dephasing_difference_coeffs(problem, n, M):
    """Multi-index coefficients of ``q1 T(p_g1)^{(x)n} - q2 T(p_g2)^{(x)n}``."""
    return tensor_diff_coeffs(lambda k: fourier_coefficient(problem.gamma1, k),
                              lambda k: fourier_coefficient(problem.gamma2, k),
                              n, M, problem.q1, problem.q2)


def szego_functional(T, F):
    """Spectral average ``sum_j F(lambda_j) / M^n`` of a symmetric multilevel matrix."""
    lam = np.linalg.eigvalsh(T.matrix)
    return float(np.sum(F(lam))) / T.M**T.n


def szego_limit(symbols, q1, q2, n, spec=None, samples=10**6, seed=0):
    """Limit of ``szego_functional(., abs)`` for the dephasing difference symbol.

    With the symbol normalized as ``(2 pi)^n`` times the product density, the
    limit is ``int |q1 prod p_g1 - q2 prod p_g2|`` over ``[-pi, pi]^n``; it is
    evaluated by tensor quadrature for ``n <= 3`` and by mixture Monte Carlo
    otherwise.
    """
    g1, g2 = (getattr(s, "gamma", s) for s in symbols)
    problem = DiscriminationProblem(float(g1), float(g2), q1, q2)
    method = "tensor_quadrature" if n <= 3 else "mc_mixture"
    value, _ = product_l1_distance(problem, n, method, samples, seed, spec)
    return float(value)
