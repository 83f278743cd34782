"""Numerical substrate: periodic quadrature, root isolation, Hermitian spectra,
matrix norms, scalar minimization and seeded Monte Carlo estimation.

Functions that integrate over the circle take *vectorized* callables: ``f(x)``
receives a 1-D array of abscissae and returns an array whose leading axis
matches ``x`` (trailing axes are allowed, e.g. for matrix-valued integrands).
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, ValidationError

__all__ = [
    "QuadratureSpec",
    "McEstimate",
    "integrate_periodic",
    "sign_change_points",
    "check_hermitian",
    "hermitian_eigenvalues",
    "trace_norm",
    "frobenius_norm",
    "minimize_scalar",
    "child_rng",
    "mc_expectation",
]

_GL_ORDER = 20
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)
_EPS = np.finfo(float).eps
SEED_LIMIT = 2**64


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy contract for :func:`integrate_periodic`.

    Parameters
    ----------
    abs_tol : float
        Target absolute error on the integral.
    max_subdivisions : int
        Number of panel splits allowed before giving up.
    breakpoints : tuple of float
        Known non-smooth points inside ``[-pi, pi]``; panels never straddle them.
    """

    abs_tol: float = 1e-12
    max_subdivisions: int = 50_000
    breakpoints: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValidationError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_subdivisions < 0:
            raise ValidationError("max_subdivisions must be nonnegative")
        bp = tuple(float(b) for b in self.breakpoints)
        if any(b < -math.pi or b > math.pi for b in bp):
            raise ValidationError("breakpoints must lie in [-pi, pi]")
        object.__setattr__(self, "breakpoints", tuple(sorted(bp)))

    def with_breakpoints(self, breakpoints):
        return QuadratureSpec(self.abs_tol, self.max_subdivisions, tuple(breakpoints))


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    samples: int
    seed: int

    def __post_init__(self):
        if self.std_error < 0 or self.samples < 1:
            raise ValidationError("McEstimate requires std_error >= 0 and samples >= 1")


def _evaluate(f, x):
    fx = np.asarray(f(x))
    if fx.ndim == 0:
        fx = np.full(x.shape, fx, dtype=fx.dtype)
    if fx.shape[:1] != x.shape:
        raise ValidationError(
            f"integrand returned shape {fx.shape} for {x.shape[0]} abscissae")
    if not np.all(np.isfinite(fx)):
        bad = np.flatnonzero(~np.isfinite(fx.reshape(len(x), -1)).all(axis=1))[0]
        raise ValidationError(f"integrand is not finite at x={x[bad]!r}")
    return fx


def _panel_rule(f, a, b):
    """Gauss-Legendre estimates on each panel [a_i, b_i] and on its two halves.

    Returns whole-panel integrals, half-panel sums, and the integral of |f|
    on the halves (used as a roundoff floor).
    """
    p = len(a)
    mid = 0.5 * (a + b)
    lo = np.concatenate([a, a, mid])
    hi = np.concatenate([b, mid, b])
    half = 0.5 * (hi - lo)
    x = (lo[:, None] + half[:, None] * (_GL_NODES[None, :] + 1.0)).ravel()
    fx = _evaluate(f, x)
    fx = fx.reshape((3 * p, _GL_ORDER) + fx.shape[1:])
    w = (half[:, None] * _GL_WEIGHTS[None, :]).reshape((3 * p, _GL_ORDER) + (1,) * (fx.ndim - 2))
    integrals = (w * fx).sum(axis=1)
    mags = (w * np.abs(fx)).sum(axis=1)
    whole = integrals[:p]
    halves = integrals[p:2 * p] + integrals[2 * p:]
    mag = mags[p:2 * p] + mags[2 * p:]
    return whole, halves, mag


def integrate_periodic(f, spec=None, interval=(-math.pi, math.pi), full_output=False):
    """Adaptive composite Gauss-Legendre quadrature on ``[-pi, pi]``.

    Panels are bounded by the interval ends and ``spec.breakpoints`` and are
    bisected until the difference between the one-panel and two-half-panel
    estimates falls below the panel's share of ``spec.abs_tol``.

    Parameters
    ----------
    f : callable
        Vectorized integrand.
    spec : QuadratureSpec, optional
    interval : (float, float)
        Integration range; defaults to the full circle.
    full_output : bool
        If true, return ``(value, error_estimate)``.

    Raises
    ------
    ConvergenceError
        When more than ``spec.max_subdivisions`` splits are needed.
    """
    spec = spec or QuadratureSpec()
    lo, hi = interval
    edges = [lo] + [x for x in spec.breakpoints if lo < x < hi] + [hi]
    a = np.array(edges[:-1], dtype=float)
    b = np.array(edges[1:], dtype=float)
    keep = b > a
    a, b = a[keep], b[keep]
    total = hi - lo

    value = 0.0
    error = 0.0
    splits = 0
    while a.size:
        whole, halves, mag = _panel_rule(f, a, b)
        diff = np.abs(whole - halves)
        magn = mag
        if diff.ndim > 1:
            axes = tuple(range(1, diff.ndim))
            diff = diff.max(axis=axes)
            magn = mag.max(axis=axes)
        local_tol = np.maximum(spec.abs_tol * (b - a) / total, 50 * _EPS * magn)
        ok = diff <= local_tol
        value = value + halves[ok].sum(axis=0)
        error += float(diff[ok].sum())
        bad = ~ok
        splits += int(bad.sum())
        if splits > spec.max_subdivisions:
            best = value + halves[bad].sum(axis=0)
            residual = error + float(diff[bad].sum())
            raise ConvergenceError(
                f"quadrature did not converge within {spec.max_subdivisions} subdivisions "
                f"(residual {residual:.3g})", estimate=best, residual=residual)
        mid = 0.5 * (a[bad] + b[bad])
        a, b = np.concatenate([a[bad], mid]), np.concatenate([mid, b[bad]])

    if full_output:
        return value, error
    return value


def sign_change_points(g, n_scan=4096, interval=(-math.pi, math.pi), xtol=1e-15):
    """Locate the sign changes of a vectorized function on an interval.

    The interval is scanned on ``n_scan`` equispaced points; each bracketed sign
    change is refined to ``xtol`` with Brent's method. Grid points where ``g``
    vanishes exactly are returned as roots as well.
    """
    lo, hi = interval
    x = np.linspace(lo, hi, n_scan)
    gx = np.asarray(g(x), dtype=float)
    s = np.sign(gx)
    roots = list(x[1:-1][s[1:-1] == 0])
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)

    def scalar(t):
        return float(np.asarray(g(np.array([t])))[0])

    for i in idx:
        roots.append(optimize.brentq(scalar, x[i], x[i + 1], xtol=xtol, rtol=4 * _EPS))
    return sorted(roots)


def check_hermitian(A, rtol=1e-12):
    """Return ``A`` as a square ndarray, raising if it is not Hermitian within ``rtol``."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {A.shape}")
    scale = np.abs(A).max() if A.size else 0.0
    if scale and np.abs(A - A.conj().T).max() > rtol * scale:
        raise ValidationError("matrix is not Hermitian within tolerance")
    return A


def hermitian_eigenvalues(A):
    """Ascending real eigenvalues of a Hermitian matrix."""
    return np.linalg.eigvalsh(check_hermitian(A))


def trace_norm(A):
    """Schatten-1 norm of a Hermitian matrix, the sum of absolute eigenvalues."""
    return float(np.abs(hermitian_eigenvalues(A)).sum())


def frobenius_norm(A):
    return float(np.linalg.norm(np.asarray(A), "fro"))


def minimize_scalar(g, a, b, tol=1e-10, grid=1001):
    """Minimize a scalar function on ``[a, b]``.

    A uniform scan of ``grid`` points guards against non-convex ``g``; the best
    grid cell is then refined with bounded Brent. Returns ``(argmin, min)``.
    """
    if not a < b:
        raise ValidationError(f"need a < b, got [{a}, {b}]")
    xs = np.linspace(a, b, grid)
    vals = np.array([g(x) for x in xs], dtype=float)
    i = int(np.argmin(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    left, right = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
    res = optimize.minimize_scalar(g, bounds=(left, right), method="bounded",
                                   options={"xatol": tol})
    if res.success and res.fun < best_v:
        best_x, best_v = float(res.x), float(res.fun)
    return best_x, best_v


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def child_rng(seed, index):
    """Generator for sub-task ``index`` of top-level task ``seed``.

    The stream depends only on ``(seed, index)``, so chunks may be drawn in
    any order or in parallel.
    """
    return np.random.default_rng(np.random.SeedSequence([_check_seed(seed), int(index)]))


def mc_expectation(sampler, h, samples, seed, chunk_size=1 << 16):
    """Monte Carlo mean of ``h`` over draws from ``sampler``.

    Parameters
    ----------
    sampler : callable
        ``sampler(rng, size)`` returns ``size`` points stacked along axis 0.
    h : callable
        Vectorized over the leading axis of the sampler output.
    samples : int
        Total number of draws, at least 100.
    seed : int
        64-bit seed; chunk ``i`` draws from ``child_rng(seed, i)``.

    Returns
    -------
    McEstimate
    """
    if samples < 100:
        raise ValidationError(f"mc_expectation needs at least 100 samples, got {samples}")
    seed = _check_seed(seed)
    shift = None
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk = 0
    while done < samples:
        size = min(chunk_size, samples - done)
        pts = sampler(child_rng(seed, chunk), size)
        hv = np.asarray(h(pts), dtype=float).reshape(size)
        bad = np.flatnonzero(~np.isfinite(hv))
        if bad.size:
            j = bad[0]
            raise ValidationError(
                f"non-finite integrand value {hv[j]!r} at draw {done + j} "
                f"(chunk {chunk}), point {pts[j]!r}")
        if shift is None:
            shift = hv[0]
        d = hv - shift
        total += math.fsum(d)
        total_sq += math.fsum(d * d)
        done += size
        chunk += 1
    mean_d = total / samples
    var = max(total_sq - total * mean_d, 0.0) / (samples - 1)
    return McEstimate(value=float(shift + mean_d), std_error=math.sqrt(var / samples),
                      samples=samples, seed=seed)
