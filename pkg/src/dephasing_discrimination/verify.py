"""Executable property checks grouped into suites.

Each check reports a signed margin: nonnegative means the property holds.
Failures are returned, never raised.
"""

from dataclasses import dataclass
import math

import numpy as np

from .bounds import (exact_unconstrained, frobenius_bound, multishot_bound, multishot_exact,
                     perr_upper, projector_bound, qubit_bound)
from .dephasing import apply_channel, apply_channel_rotation_oracle
from .discrimination import (DiscriminationProblem, entangled_delta_norm, povm_response,
                             random_density_matrix, random_povm_element, random_pure_vector)
from .multilevel import (build_multilevel, dephasing_difference_coeffs, multi_index_matrix,
                         szego_functional, szego_limit, tensor_diff_coeffs,
                         tensor_power_difference)
from .numerics import child_rng
from .states import DensityMatrix

__all__ = ["Check", "SUITES", "run_suite"]

SUITES = ("channel", "bounds", "multilevel", "entanglement", "unambiguous")


@dataclass(frozen=True)
class Check:
    name: str
    margin: float
    detail: str = ""

    @property
    def passed(self):
        return bool(self.margin >= 0)

    def as_row(self):
        return {"check": self.name, "passed": int(self.passed), "margin": self.margin,
                "detail": self.detail}


def _below(name, measured, limit, detail=""):
    return Check(name, float(limit - measured), detail or f"measured {measured:.3e} <= {limit:.1e}")


def channel_suite(seed=0, trials=20, max_dim=32):
    rng = child_rng(seed, 0)
    semi = trace = pos = oracle = 0.0
    for t in range(trials):
        d = int(rng.integers(2, max_dim + 1))
        rho = random_density_matrix(d, rng)
        a, b = rng.uniform(0.01, 2.0, size=2)
        ab = apply_channel(a, apply_channel(b, rho)).entries
        semi = max(semi, np.abs(ab - apply_channel(a + b, rho).entries).max())
        out = apply_channel(a, rho).entries
        trace = max(trace, abs(np.trace(out).real - 1))
        pos = max(pos, -np.linalg.eigvalsh(out)[0])
        if t < 5:
            # the quadrature oracle is the slow path; a handful of draws is enough
            ref = apply_channel_rotation_oracle(a, rho).entries
            oracle = max(oracle, np.abs(ref - out).max())
    return [
        _below("semigroup", semi, 1e-12),
        _below("trace_preservation", trace, 1e-12),
        _below("positivity", pos, 1e-10),
        _below("rotation_oracle_agreement", oracle, 1e-8),
    ]


def bounds_suite(gamma1=0.1, gamma2=1.0, q1=0.5):
    p = DiscriminationProblem(gamma1, gamma2, q1)
    exact = exact_unconstrained(p).value
    worst_order = math.inf
    for E in np.arange(0.5, 12.0 + 1e-9, 0.5):
        qub = qubit_bound(p, E).value
        proj = projector_bound(p, E).value
        frob = frobenius_bound(p, E).value
        worst_order = min(worst_order, proj - frob, exact - proj, exact - qub)
    checks = [Check("ordering_frobenius_projector_exact", worst_order + 1e-9,
                    f"min margin {worst_order:.3e} over E in [0.5, 12]")]
    deg = DiscriminationProblem(gamma1, gamma1, 0.5)
    vals = [exact_unconstrained(deg).value, qubit_bound(deg, 2).value,
            projector_bound(deg, 2).value, frobenius_bound(deg, 2).value,
            multishot_exact(deg, 3).value, multishot_bound(deg, 2, 3).value]
    checks.append(_below("degenerate_collapse", max(vals), 1e-9))
    for n in (3, 5):
        worst = math.inf
        method = "tensor_quadrature" if n <= 3 else "mc_mixture"
        rep = multishot_exact(p, n, method=method, samples=200_000)
        for E in (0.5, 2.0, 6.0, 12.0):
            worst = min(worst, rep.value - 3 * rep.estimator_error
                        - multishot_bound(p, E, n).value)
        checks.append(Check(f"multishot_bound_below_exact_n{n}", worst, f"min gap {worst:.3e}"))
    ns = np.arange(1, 11)
    logs = np.array([math.log(perr_upper(p, 2.0, int(n)).value) for n in ns])
    coef = np.polyfit(ns, logs, 1)
    resid = np.abs(np.polyval(coef, ns) - logs).max()
    checks.append(_below("perr_log_linear", resid, 1e-10))
    return checks


def multilevel_suite(seed=0, gamma1=0.1, gamma2=1.0, q1=0.5):
    rng = child_rng(seed, 1)
    worst = 0.0
    for n in (2, 3):
        for M in (2, 3, 4):
            a, b = rng.random(M), rng.random(M)
            t1, t2 = (lambda k, a=a: a[k]), (lambda k, b=b: b[k])
            c = tensor_diff_coeffs(t1, t2, n, M, 0.3, 0.7)
            ref = tensor_power_difference(t1, t2, n, M, 0.3, 0.7)
            worst = max(worst, np.abs(build_multilevel(c).matrix - ref).max(),
                        np.abs(multi_index_matrix(c) - ref).max())
    p = DiscriminationProblem(gamma1, gamma2, q1)
    section = szego_functional(build_multilevel(dephasing_difference_coeffs(p, 2, 40)), np.abs)
    limit = szego_limit((gamma1, gamma2), p.q1, p.q2, 2)
    rel = abs(section - limit) / limit
    return [_below("tensor_difference_equality", worst, 1e-14),
            _below("two_level_szego_M40", rel, 0.05, f"relative error {rel:.4f}")]


def entanglement_suite(seed=0, trials=100, dim=6, gamma1=0.1, gamma2=1.0, q1=0.5):
    p = DiscriminationProblem(gamma1, gamma2, q1)
    ceiling = exact_unconstrained(p).value
    worst = -math.inf
    for t in range(trials):
        psi = random_pure_vector(dim * dim, child_rng(seed, 100 + t))
        rho = DensityMatrix(np.outer(psi, psi.conj()), modes=2)
        worst = max(worst, entangled_delta_norm(p, rho))
    return [_below("side_entanglement_ceiling", worst, ceiling + 1e-6,
                   f"max {worst:.6f} vs unconstrained {ceiling:.6f}")]


def unambiguous_suite(seed=0, trials=500, max_dim=8):
    rng = child_rng(seed, 2)
    low = math.inf
    strict = math.inf
    for _ in range(trials):
        d = int(rng.integers(2, max_dim + 1))
        pi = random_povm_element(d, rng)
        rho = random_density_matrix(d, rng)
        gamma = rng.uniform(0.01, 3.0)
        v = povm_response(pi, gamma, rho)
        low = min(low, v)
        if np.trace(pi.entries).real > 1e-6:
            strict = min(strict, v)
    return [Check("response_nonnegative", low + 1e-10, f"min response {low:.3e}"),
            Check("response_strictly_positive", strict - 1e-8, f"min response {strict:.3e}")]


_RUNNERS = {
    "channel": channel_suite,
    "bounds": bounds_suite,
    "multilevel": multilevel_suite,
    "entanglement": entanglement_suite,
    "unambiguous": unambiguous_suite,
}


def run_suite(name, **kwargs):
    """Run one suite by name and return its list of :class:`Check`."""
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    return _RUNNERS[name](**kwargs)
