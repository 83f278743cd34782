"""Optimal values and lower bounds on the distinguishability ``max ||Delta||_1``.

Single shot:

* :func:`exact_unconstrained` - L1 distance of the two wrapped normal densities.
* :func:`szego_section_value` - flat-probe value on a finite Toeplitz section,
  converging to the exact value.
* :func:`qubit_bound`, :func:`projector_bound`, :func:`frobenius_bound` -
  energy-constrained lower bounds from qubit and flat probes.

Many shots:

* :func:`multishot_exact` - L1 distance of the n-fold product densities.
* :func:`multishot_bound`, :func:`perr_upper` - fidelity-based lower bound on the
  n-shot distinguishability and the matching error-probability decay.
* :func:`chernoff_rank2` - Chernoff-type error bound for a two-level probe.
"""

from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np
from scipy import linalg

from .dephasing import wrapped_cdf, wrapped_logpdf, wrapped_pdf
from .errors import BudgetError, DomainError, ValidationError
from .numerics import (QuadratureSpec, frobenius_norm, integrate_periodic, mc_expectation,
                       minimize_scalar, sign_change_points, trace_norm)
from .states import EnergyBudget, QubitProbe

__all__ = [
    "BoundReport",
    "ShotCount",
    "KINDS",
    "exact_unconstrained",
    "product_l1_distance",
    "szego_section_value",
    "difference_section",
    "section_bound",
    "qubit_term",
    "m_ext",
    "qubit_bound",
    "projector_bound",
    "frobenius_bound",
    "multishot_exact",
    "multishot_alpha",
    "multishot_bound",
    "perr_upper",
    "chernoff_quantity",
    "chernoff_rank2",
]

KINDS = ("exact_unconstrained", "qubit", "projector", "frobenius", "multishot_exact",
         "multishot_bound", "perr_upper", "chernoff")

_SCAN_POINTS = 4096
_ROOT_STEPS = 8
# default absolute tolerance of the nested quadrature by dimension
_TENSOR_TOL = {1: 1e-12, 2: 1e-10, 3: 1e-7}
_E_LOW_SCAN_FLOOR = 16
CHERNOFF_EPS = 1e-14


@dataclass(frozen=True)
class ShotCount:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"shot count must be an integer >= 1, got {self.n}")


def _shots(n):
    return (n if isinstance(n, ShotCount) else ShotCount(n)).n


def _budget(b):
    return b if isinstance(b, EnergyBudget) else EnergyBudget(float(b))


@dataclass
class BoundReport:
    """Value of one bound or exact quantity plus how it was obtained."""

    kind: str
    value: float
    params: dict
    argmax_m: Optional[int] = None
    alpha: Optional[float] = None
    estimator_error: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown bound kind {self.kind!r}")
        if self.value < 0:
            raise ValidationError(f"{self.kind} value must be >= 0, got {self.value}")
        if self.kind == "multishot_bound" and not 0 <= self.alpha <= 1:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")

    def as_row(self):
        """Flat mapping of the report, suitable for a CSV/JSON row."""
        row = {"kind": self.kind, "value": self.value}
        row.update(self.params)
        for name in ("argmax_m", "alpha", "estimator_error"):
            v = getattr(self, name)
            if v is not None:
                row[name] = v
        row.update(self.extras)
        return row


def _params(problem, **more):
    p = problem.as_dict()
    p.update({k: v for k, v in more.items() if v is not None})
    return p


# --- single shot, no energy constraint -------------------------------------------------

def exact_unconstrained(problem, spec=None):
    """``int |q1 p_g1 - q2 p_g2| dtheta`` over ``[-pi, pi]``.

    The sign changes of the integrand are located first and used as quadrature
    breakpoints, so every panel sees a smooth function.
    """
    spec = spec or QuadratureSpec(abs_tol=1e-12)
    q1, q2, g1, g2 = problem.q1, problem.q2, problem.gamma1, problem.gamma2
    params = _params(problem)
    if g1 == g2:
        return BoundReport("exact_unconstrained", abs(q1 - q2), params, estimator_error=0.0)
    if g1 == 0 or g2 == 0:
        # a delta density is mutually singular with any wrapped normal
        return BoundReport("exact_unconstrained", q1 + q2, params, estimator_error=0.0)

    def g(x):
        return q1 * wrapped_pdf(g1, x) - q2 * wrapped_pdf(g2, x)

    roots = sign_change_points(g, _SCAN_POINTS)
    value, err = integrate_periodic(lambda x: np.abs(g(x)), spec.with_breakpoints(roots),
                                    full_output=True)
    return BoundReport("exact_unconstrained", float(value), params, estimator_error=err,
                       extras={"sign_changes": len(roots)})


# --- n-fold product densities ----------------------------------------------------------

class _AbsDifference:
    """Vectorized ``int |a p1(x) - b p2(x)| dx`` for arrays of weights ``a``, ``b``.

    The integrand changes sign where the log-likelihood ratio
    ``log p1 - log p2`` crosses ``log(b / a)``. The ratio is tabulated once on a
    grid and split into monotone runs, so each run holds at most one crossing,
    bracketed by binary search and refined by vectorized bisection. Between
    crossings the integral is exact through the wrapped normal CDFs.
    """

    def __init__(self, g1, g2, n_scan=_SCAN_POINTS):
        self.g1, self.g2 = g1, g2
        self.grid = np.linspace(-math.pi, math.pi, n_scan)
        self.lr = wrapped_logpdf(g1, self.grid) - wrapped_logpdf(g2, self.grid)
        step = np.sign(np.diff(self.lr))
        for i in range(1, step.size):
            if step[i] == 0:
                step[i] = step[i - 1]
        cuts = np.flatnonzero(step[1:] != step[:-1]) + 1
        bounds = np.concatenate([[0], cuts, [n_scan - 1]])
        self.runs = [(int(i), int(j), step[i] >= 0) for i, j in zip(bounds[:-1], bounds[1:])]

    def _log_ratio(self, x):
        return wrapped_logpdf(self.g1, x) - wrapped_logpdf(self.g2, x)

    def _brackets(self, c):
        rows, cells = [], []
        for i, j, rising in self.runs:
            seg = self.lr[i:j + 1]
            lo_v, hi_v = (seg[0], seg[-1]) if rising else (seg[-1], seg[0])
            hit = (c > lo_v) & (c < hi_v) | (c == seg[-1])
            r = np.flatnonzero(hit)
            if not r.size:
                continue
            if rising:
                k = np.searchsorted(seg, c[r], side="left") - 1
            else:
                k = np.searchsorted(seg[::-1], c[r], side="left") - 1
                k = seg.size - 2 - k
            rows.append(r)
            cells.append(i + np.clip(k, 0, seg.size - 2))
        if not rows:
            return np.zeros(0, int), np.zeros(0, int)
        rows, cells = np.concatenate(rows), np.concatenate(cells)
        order = np.lexsort((cells, rows))
        return rows[order], cells[order]

    @staticmethod
    def _illinois_step(lo, hi, flo, fhi, x, fx):
        # keep the sub-bracket with the sign change; halve the stale end's value
        left = np.sign(fx) == np.sign(flo)
        hi_n = np.where(left, hi, x)
        fhi_n = np.where(left, 0.5 * fhi, fx)
        lo_n = np.where(left, x, lo)
        flo_n = np.where(left, fx, 0.5 * flo)
        return lo_n, hi_n, flo_n, fhi_n

    def _refine(self, lo, hi, c, flo, fhi):
        # Illinois regula falsi inside grid cells of width ~1e-3: the root error
        # enters the integral only at second order, so a few steps suffice
        x = lo
        for _ in range(_ROOT_STEPS):
            denom = fhi - flo
            x = np.where(denom != 0, lo - flo * (hi - lo) / np.where(denom != 0, denom, 1), lo)
            x = np.clip(x, np.minimum(lo, hi), np.maximum(lo, hi))
            fx = self._log_ratio(x) - c
            done = fx == 0
            lo, hi, flo, fhi = self._illinois_step(lo, hi, flo, fhi, x, fx)
            lo = np.where(done, x, lo)
            hi = np.where(done, x, hi)
        return x

    def __call__(self, a, b):
        a = np.asarray(a, dtype=float).ravel()
        b = np.asarray(b, dtype=float).ravel()
        with np.errstate(divide="ignore"):
            c = np.log(b) - np.log(a)
        c = np.where(np.isnan(c), np.inf, c)
        rows, cells = self._brackets(c)
        lo = self.grid[cells]
        hi = self.grid[cells + 1]
        cr = c[rows]
        roots = self._refine(lo, hi, cr, self.lr[cells] - cr, self.lr[cells + 1] - cr)

        counts = np.bincount(rows, minlength=a.size)
        width = int(counts.max(initial=0)) + 2
        pts = np.full((a.size, width), math.pi)
        pts[:, 0] = -math.pi
        if rows.size:
            start = np.concatenate([[0], np.cumsum(counts)[:-1]])
            pos = np.arange(rows.size) - start[rows]
            pts[rows, 1 + pos] = roots
        H = a[:, None] * wrapped_cdf(self.g1, pts) - b[:, None] * wrapped_cdf(self.g2, pts)
        return np.abs(np.diff(H, axis=1)).sum(axis=1)


def _tensor_l1(problem, n, spec):
    # every outer integrand is even in its variable: integrate over [0, pi] and double
    q1, q2, g1, g2 = problem.q1, problem.q2, problem.gamma1, problem.gamma2
    inner = _AbsDifference(g1, g2)
    half = (0.0, math.pi)
    if n == 1:
        return float(inner([q1], [q2])[0]), 0.0

    def level2(x, w1=q1, w2=q2):
        return inner(w1 * wrapped_pdf(g1, x), w2 * wrapped_pdf(g2, x))

    if n == 2:
        value, err = integrate_periodic(level2, spec, interval=half, full_output=True)
        return 2 * value, 2 * err

    middle_spec = QuadratureSpec(abs_tol=spec.abs_tol / 10, max_subdivisions=spec.max_subdivisions)
    errs = []

    def level3(x):
        # one vector-valued middle integral shared by all outer nodes
        w1 = q1 * wrapped_pdf(g1, x)
        w2 = q2 * wrapped_pdf(g2, x)

        def middle(y):
            a = np.outer(wrapped_pdf(g1, y), w1)
            b = np.outer(wrapped_pdf(g2, y), w2)
            return inner(a, b).reshape(a.shape)

        v, e = integrate_periodic(middle, middle_spec, interval=half, full_output=True)
        errs.append(2 * e)
        return 2 * v

    value, err = integrate_periodic(level3, spec, interval=half, full_output=True)
    return 2 * value, 2 * err + (max(errs) * 2 * math.pi if errs else 0.0)


def _mixture_sampler(problem, n):
    q1, g1, g2 = problem.q1, problem.gamma1, problem.gamma2

    def sample(rng, size):
        first = rng.random(size) < q1
        scale = np.where(first, math.sqrt(g1), math.sqrt(g2))
        theta = rng.standard_normal((size, n)) * scale[:, None]
        return np.mod(theta + math.pi, 2 * math.pi) - math.pi

    return sample


def _mixture_ratio(problem):
    lq1 = math.log(problem.q1) if problem.q1 > 0 else -math.inf
    lq2 = math.log(problem.q2) if problem.q2 > 0 else -math.inf

    def h(theta):
        lf = lq1 + wrapped_logpdf(problem.gamma1, theta).sum(axis=1)
        lg = lq2 + wrapped_logpdf(problem.gamma2, theta).sum(axis=1)
        # |f - g| / (f + g) with f = e^lf, g = e^lg
        return np.abs(np.tanh(0.5 * (lf - lg)))

    return h


def product_l1_distance(problem, n, method="tensor_quadrature", samples=10**6, seed=0,
                        spec=None):
    """``int |q1 prod p_g1(theta_k) - q2 prod p_g2(theta_k)|`` over ``[-pi, pi]^n``.

    ``tensor_quadrature`` nests adaptive quadrature over the outer coordinates
    around an exact root-isolated inner integral (n <= 3).
    ``mc_mixture`` averages ``|f - g| / (f + g)`` over draws from ``f + g``.

    Returns
    -------
    (value, error) : tuple of float
        ``error`` is the quadrature error estimate or the Monte Carlo standard error.
    """
    n = _shots(n)
    q1, q2, g1, g2 = problem.q1, problem.q2, problem.gamma1, problem.gamma2
    if g1 == g2:
        return abs(q1 - q2), 0.0
    if g1 == 0 or g2 == 0:
        return q1 + q2, 0.0
    if method == "tensor_quadrature":
        if n > 3:
            raise BudgetError(f"tensor quadrature supports n <= 3, got n = {n}; use mc_mixture")
        return _tensor_l1(problem, n, spec or QuadratureSpec(abs_tol=_TENSOR_TOL[n]))
    if method == "mc_mixture":
        est = mc_expectation(_mixture_sampler(problem, n), _mixture_ratio(problem), samples, seed)
        return est.value, est.std_error
    raise ValidationError(f"unknown method {method!r}")


def multishot_exact(problem, shots, method="tensor_quadrature", samples=10**6, seed=0,
                    spec=None):
    """Optimal n-shot distinguishability without an energy constraint."""
    n = _shots(shots)
    value, err = product_l1_distance(problem, n, method, samples, seed, spec)
    extras = {"method": method}
    if method == "mc_mixture":
        extras.update(samples=samples, seed=seed)
    return BoundReport("multishot_exact", float(value), _params(problem, n=n),
                       estimator_error=float(err), extras=extras)


# --- finite Toeplitz sections ----------------------------------------------------------

def difference_section(problem, size):
    """``size x size`` Toeplitz section with entries ``q1 e^{-g1 k^2/2} - q2 e^{-g2 k^2/2}``."""
    return linalg.toeplitz(problem.coefficients(np.arange(size)))


def szego_section_value(problem, M):
    """``||P_M T(q1 p1 - q2 p2) P_M||_1 / M``, the flat-probe value on ``M`` levels."""
    if M < 1:
        raise ValidationError(f"section size must be >= 1, got {M}")
    return trace_norm(difference_section(problem, M)) / M


def section_bound(problem, levels):
    """Trace and Frobenius norms of the flat probe on Fock levels ``0..levels``, normalized."""
    S = difference_section(problem, levels + 1)
    return trace_norm(S) / (levels + 1), frobenius_norm(S) / (levels + 1)


# --- energy-constrained single-shot bounds ---------------------------------------------

def qubit_term(problem, m):
    """``|q1 e^{-m^2 g1/2} - q2 e^{-m^2 g2/2}|``."""
    return np.abs(problem.coefficients(m))


def m_ext(problem):
    """Nearest-integer stationary point of the qubit term, or None when undefined."""
    q1, q2, g1, g2 = problem.q1, problem.q2, problem.gamma1, problem.gamma2
    if g1 == g2 or min(q1, q2, g1, g2) <= 0:
        return None
    arg = 2 * (math.log(q1 * g1) - math.log(q2 * g2)) / (g1 - g2)
    if not (math.isfinite(arg) and arg > 0):
        return None
    return int(math.floor(math.sqrt(arg) + 0.5))


def _qubit_values(problem, E, ms):
    ms = np.asarray(ms, dtype=float)
    if E >= 0.5:
        return qubit_term(problem, ms)
    r = E / ms
    return 2 * np.sqrt(r * (1 - r)) * qubit_term(problem, ms)


def qubit_bound(problem, budget):
    """Best qubit probe ``sqrt(1-r)|0> + sqrt(r)|m>`` under the energy budget.

    For ``E >= 1/2`` every ``m`` in ``[1, floor(2E)]`` is scanned with ``r = 1/2``;
    for ``E < 1/2`` the population is ``r = E/m`` and ``m`` runs to
    ``max(m_ext + 2, 16)``. The value at the stationary/border candidate set
    alone is reported in ``extras['candidate_value']``.
    """
    E = _budget(budget).E
    if not E > 0:
        raise DomainError("qubit_bound needs E > 0")
    me = m_ext(problem)
    if E >= 0.5:
        top = int(math.floor(2 * E))
        candidates = {1, top}
        if me is not None and 1 <= me <= top:
            candidates.add(me)
    else:
        top = max((me or 0) + 2, _E_LOW_SCAN_FLOOR)
        candidates = {1} | ({me} if me is not None and me >= 1 else set())
    ms = np.arange(1, top + 1)
    vals = _qubit_values(problem, E, ms)
    i = int(np.argmax(vals))
    cand = sorted(candidates)
    cand_val = float(np.max(_qubit_values(problem, E, cand)))
    return BoundReport("qubit", float(vals[i]), _params(problem, E=E), argmax_m=int(ms[i]),
                       extras={"m_ext": me, "candidate_value": cand_val, "scan_max_m": int(top)})


def _levels_for(E, name):
    if E < 0.5:
        raise DomainError(f"{name} is defined for E >= 1/2 (got E = {E}); use qubit_bound")
    return int(math.floor(2 * E))


def projector_bound(problem, budget):
    """Flat probe on levels ``0..floor(2E)``: normalized trace norm of the section."""
    E = _budget(budget).E
    M = _levels_for(E, "projector_bound")
    value = trace_norm(difference_section(problem, M + 1)) / (M + 1)
    return BoundReport("projector", value, _params(problem, E=E), extras={"levels": M})


def frobenius_bound(problem, budget):
    """Frobenius-norm relaxation of :func:`projector_bound`.

    ``extras['first_row_sum_value']`` evaluates the alternative first-row sum
    ``sqrt(sum_{k=1}^{M} (M - k) d_k^2) / (M + 1)`` for comparison.
    """
    E = _budget(budget).E
    M = _levels_for(E, "frobenius_bound")
    d = problem.coefficients(np.arange(M + 1))
    value = frobenius_norm(difference_section(problem, M + 1)) / (M + 1)
    k = np.arange(1, M + 1)
    alt = math.sqrt(float(np.sum((M - k) * d[1:] ** 2))) / (M + 1)
    return BoundReport("frobenius", value, _params(problem, E=E),
                       extras={"levels": M, "first_row_sum_value": alt})


# --- multi-shot bounds -----------------------------------------------------------------

def multishot_alpha(problem, budget):
    """Squared single-shot trace distance ``alpha`` of the best structured probe.

    Equal weights 1/2 are used inside the one-shot quantity: for ``E >= 1/2``
    ``alpha = (||P (T1 - T2) P||_1 / (2 (floor(2E)+1)))^2``; for ``E < 1/2``
    ``alpha = (E/m)(1 - E/m) |e^{-m^2 g1/2} - e^{-m^2 g2/2}|^2`` at the best ``m``.

    Returns ``(alpha, m)`` with ``m`` None in the first regime.
    """
    E = _budget(budget).E
    if not E > 0:
        raise DomainError("multishot bounds need E > 0")
    even = problem.equal_priors()
    if E >= 0.5:
        M = int(math.floor(2 * E))
        S = linalg.toeplitz(np.exp(-0.5 * problem.gamma1 * np.arange(M + 1) ** 2)
                            - np.exp(-0.5 * problem.gamma2 * np.arange(M + 1) ** 2))
        a = 0.25 * (trace_norm(S) / (M + 1)) ** 2
        return min(max(a, 0.0), 1.0), None
    rep = qubit_bound(even, E)
    m = rep.argmax_m
    r = E / m
    diff = math.exp(-0.5 * m * m * problem.gamma1) - math.exp(-0.5 * m * m * problem.gamma2)
    return min(max(r * (1 - r) * diff * diff, 0.0), 1.0), m


def multishot_bound(problem, budget, shots):
    """``1 - 2 sqrt(q1 q2) (1 - alpha)^{n/2}``, a lower bound on the constrained n-shot optimum."""
    n = _shots(shots)
    E = _budget(budget).E
    alpha, m = multishot_alpha(problem, E)
    pref = 2 * math.sqrt(problem.q1 * problem.q2)
    value = max(1.0 - pref * (1.0 - alpha) ** (n / 2), 0.0)
    return BoundReport("multishot_bound", value, _params(problem, E=E, n=n), argmax_m=m,
                       alpha=alpha, extras={"prefactor": pref, "alpha_weights": 0.5})


def perr_upper(problem, budget, shots):
    """Error-probability bound ``(1 - alpha)^{n/2} / 2``."""
    n = _shots(shots)
    E = _budget(budget).E
    alpha, m = multishot_alpha(problem, E)
    rate = 0.5 * math.log1p(-alpha) if alpha < 1 else -math.inf
    return BoundReport("perr_upper", 0.5 * (1 - alpha) ** (n / 2), _params(problem, E=E, n=n),
                       argmax_m=m, alpha=alpha, extras={"log_rate": rate})


# --- Chernoff quantity -----------------------------------------------------------------

def chernoff_quantity(A, B, eps=CHERNOFF_EPS):
    """``min_{s in [0,1]} Tr(A^s B^{1-s})`` for positive semidefinite ``A``, ``B``.

    Eigenvalues below ``eps`` are raised to ``eps`` so that ``0^0`` never occurs.

    Returns
    -------
    (Q, s_star, regularized)
    """
    a, U = np.linalg.eigh(A)
    b, V = np.linalg.eigh(B)
    regularized = bool((a < eps).any() or (b < eps).any())
    a = np.maximum(a, eps)
    b = np.maximum(b, eps)
    overlap = np.abs(U.conj().T @ V) ** 2
    la, lb = np.log(a), np.log(b)

    def tr(s):
        return float((np.exp(s * la)[:, None] * overlap * np.exp((1 - s) * lb)[None, :]).sum())

    s_star, Q = minimize_scalar(tr, 0.0, 1.0, tol=1e-12)
    return Q, s_star, regularized


def chernoff_rank2(problem, probe, shots):
    """``exp(n ln Q(q1 N1(rho), q2 N2(rho))) / 2`` for a probe on ``{|0>, |m>}``.

    Both outputs stay inside the span of ``|0>`` and ``|m>``, so ``Q`` is computed
    from 2x2 blocks.
    """
    n = _shots(shots)
    if not isinstance(probe, QubitProbe):
        raise ValidationError("chernoff_rank2 needs a QubitProbe")
    r0, rm, m = probe.r_0, probe.r_m, probe.m
    c = math.sqrt(r0 * rm)

    def block(gamma):
        off = c * math.exp(-0.5 * gamma * m * m)
        return np.array([[r0, off], [off, rm]])

    Q, s_star, reg = chernoff_quantity(problem.q1 * block(problem.gamma1),
                                       problem.q2 * block(problem.gamma2))
    value = 0.5 * math.exp(n * math.log(Q))
    # same quantity between the unweighted outputs, for comparison with error bounds
    # whose priors enter once rather than n times
    q_states, _, _ = chernoff_quantity(block(problem.gamma1), block(problem.gamma2))
    return BoundReport("chernoff", value, _params(problem, n=n), argmax_m=m,
                       extras={"Q": Q, "s_star": s_star, "r_m": rm, "state_Q": q_states,
                               "regularized": reg, "regularization_eps": CHERNOFF_EPS})
