import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dephasing_discrimination.dephasing import WrappedNormalSymbol
from dephasing_discrimination.discrimination import DiscriminationProblem
from dephasing_discrimination.errors import BudgetError, ValidationError
from dephasing_discrimination.multilevel import (MultiIndexCoefficients, build_multilevel,
                                                 dephasing_difference_coeffs,
                                                 multi_index_matrix, szego_functional,
                                                 szego_limit, tensor_diff_coeffs,
                                                 tensor_power_difference)

# Reference 3-level layout with M = 2; entry "abc" stands for f_{a,b,c}, whose
# last subscript belongs to the fastest level.
DISPLAYED = """
000 001 010 011 100 101 110 111
001 000 011 010 101 100 111 110
010 011 000 001 110 111 100 101
011 010 001 000 111 110 101 100
100 101 110 111 000 001 010 011
101 100 111 110 001 000 011 010
110 111 100 101 010 011 000 001
111 110 101 100 011 010 001 000
"""


def _labels(k1, k2, k3):
    # encode f(k1, k2, k3) as the displayed label k3 k2 k1
    return 100 * k3 + 10 * k2 + k1


def test_displayed_three_level_pattern():
    expected = np.array([[int(x) for x in row.split()] for row in DISPLAYED.strip().splitlines()])
    c = MultiIndexCoefficients(3, _labels, 2)
    assert np.array_equal(build_multilevel(c).matrix, expected)
    assert np.array_equal(multi_index_matrix(c), expected)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("M", [2, 3, 4])
def test_tensor_difference_is_multilevel(n, M):
    rng = np.random.default_rng(10 * n + M)
    a, b = rng.random(M), rng.random(M)
    t1, t2 = (lambda k: a[k]), (lambda k: b[k])
    ref = tensor_power_difference(t1, t2, n, M)
    c = tensor_diff_coeffs(t1, t2, n, M)
    assert np.abs(build_multilevel(c).matrix - ref).max() <= 1e-14
    assert np.abs(multi_index_matrix(c) - ref).max() <= 1e-14


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_construction_paths_agree(n, M, seed):
    if M**n > 4096:
        return
    table = np.random.default_rng(seed).random((M,) * n)
    c = MultiIndexCoefficients(n, lambda *ks: table[ks], M)
    T = build_multilevel(c).matrix
    assert np.array_equal(T, multi_index_matrix(c))
    assert np.array_equal(T, T.T)


def test_one_level_is_plain_toeplitz():
    c = MultiIndexCoefficients(1, lambda k: 1.0 / (1 + k), 4)
    T = build_multilevel(c).matrix
    assert T[0, 3] == 0.25 and T[2, 1] == 0.5


def test_size_cap_and_validation():
    with pytest.raises(BudgetError):
        build_multilevel(MultiIndexCoefficients(2, lambda a, b: a + b, 65))
    with pytest.raises(ValidationError):
        MultiIndexCoefficients(0, lambda: 0, 2)


def test_szego_functional_single_level():
    T = build_multilevel(MultiIndexCoefficients(1, lambda k: (k == 0) * 2.0, 5))
    assert szego_functional(T, np.abs) == pytest.approx(2.0)


def test_two_level_szego_section_near_limit():
    p = DiscriminationProblem(0.1, 1.0, 0.5)
    limit = szego_limit((0.1, 1.0), 0.5, 0.5, 2)
    rels = []
    for M in (10, 20, 40):
        T = build_multilevel(dephasing_difference_coeffs(p, 2, M))
        rels.append(abs(szego_functional(T, np.abs) - limit) / limit)
    assert rels[0] > rels[1] > rels[2]
    assert rels[2] < 0.03


def test_szego_limit_accepts_symbols():
    a = szego_limit((WrappedNormalSymbol(0.1), WrappedNormalSymbol(1.0)), 0.5, 0.5, 1)
    assert a == pytest.approx(0.50328307101, abs=1e-10)
