"""The bosonic dephasing channel in a truncated Fock basis.

Coherence ``rho[m, n]`` is damped by ``exp(-gamma (m - n)**2 / 2)``. The
damping factors are the Fourier coefficients of the wrapped normal density on
``[-pi, pi]``, so the channel acts as a Hadamard product with a Toeplitz matrix.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import linalg, special

from .errors import DeltaDistributionError, ValidationError
from .numerics import QuadratureSpec, integrate_periodic
from .states import DensityMatrix

__all__ = [
    "WrappedNormalSymbol",
    "ToeplitzBlock",
    "DephasingChannel",
    "wrapped_pdf",
    "wrapped_logpdf",
    "wrapped_cdf",
    "fourier_coefficient",
    "toeplitz_block",
    "coherence_factors",
    "tensor_coherence_factors",
    "apply_channel",
    "apply_channel_rotation_oracle",
    "apply_tensor_channel",
]

_TAIL = 1e-16
_LOG_INV_TAIL = math.log(1.0 / _TAIL)
# below this rate the Gaussian wrap-sum converges fastest, above it the Fourier series
_SERIES_SWITCH = 1.0


@dataclass(frozen=True)
class WrappedNormalSymbol:
    gamma: float

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ValidationError(f"dephasing rate must be finite and >= 0, got {self.gamma}")


def _symbol(s):
    return s if isinstance(s, WrappedNormalSymbol) else WrappedNormalSymbol(float(s))


def _wrap_terms(gamma, theta):
    reach = np.max(np.abs(theta), initial=0.0) + math.sqrt(2 * gamma * _LOG_INV_TAIL)
    return int(math.ceil(reach / (2 * math.pi)))


def _fourier_terms(gamma):
    return int(math.floor(math.sqrt(2 * _LOG_INV_TAIL / gamma))) + 1


def wrapped_pdf(symbol, theta):
    """Wrapped normal density with variance parameter ``gamma`` on ``[-pi, pi]``.

    Uses the Gaussian image sum for ``gamma < 1`` and the cosine series
    ``(1 + 2 sum_k exp(-gamma k^2/2) cos(k theta)) / (2 pi)`` otherwise.
    Vectorized in ``theta``.
    """
    gamma = _symbol(symbol).gamma
    if gamma == 0:
        raise DeltaDistributionError("gamma = 0 is a delta density; use the identity channel")
    th = np.asarray(theta, dtype=float)
    if gamma < _SERIES_SWITCH:
        K = _wrap_terms(gamma, th)
        k = np.arange(-K, K + 1)
        z = th[..., None] + 2 * math.pi * k
        out = np.exp(-z * z / (2 * gamma)).sum(axis=-1) / math.sqrt(2 * math.pi * gamma)
    else:
        k = np.arange(1, _fourier_terms(gamma) + 1)
        c = np.exp(-0.5 * gamma * k * k)
        out = (1.0 + 2.0 * (c * np.cos(th[..., None] * k)).sum(axis=-1)) / (2 * math.pi)
    return out


def wrapped_logpdf(symbol, theta):
    """Logarithm of :func:`wrapped_pdf`, stable deep in the tails for small ``gamma``."""
    gamma = _symbol(symbol).gamma
    if gamma == 0:
        raise DeltaDistributionError("gamma = 0 is a delta density; use the identity channel")
    th = np.asarray(theta, dtype=float)
    if gamma >= _SERIES_SWITCH:
        return np.log(wrapped_pdf(gamma, th))
    K = _wrap_terms(gamma, th)
    k = np.arange(-K, K + 1)
    z = th[..., None] + 2 * math.pi * k
    return special.logsumexp(-z * z / (2 * gamma), axis=-1) - 0.5 * math.log(2 * math.pi * gamma)


def wrapped_cdf(symbol, theta):
    """Probability mass of ``[-pi, theta]`` under the wrapped normal density."""
    gamma = _symbol(symbol).gamma
    if gamma == 0:
        raise DeltaDistributionError("gamma = 0 is a delta density; use the identity channel")
    th = np.asarray(theta, dtype=float)
    if gamma < _SERIES_SWITCH:
        K = _wrap_terms(gamma, np.array([math.pi])) + 1
        k = 2 * math.pi * np.arange(-K, K + 1)
        s = math.sqrt(gamma)
        upper = special.ndtr((th[..., None] + k) / s)
        lower = special.ndtr((k - math.pi) / s)
        return (upper - lower).sum(axis=-1)
    k = np.arange(1, _fourier_terms(gamma) + 1)
    c = np.exp(-0.5 * gamma * k * k) / k
    return (th + math.pi) / (2 * math.pi) + (c * np.sin(th[..., None] * k)).sum(axis=-1) / math.pi


def fourier_coefficient(symbol, k):
    """``exp(-gamma k^2 / 2)``, the k-th Fourier coefficient of the density."""
    gamma = _symbol(symbol).gamma
    k = np.asarray(k, dtype=float)
    out = np.exp(-0.5 * gamma * k * k)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ToeplitzBlock:
    """Finite symmetric Toeplitz section, stored by its first column."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float).ravel()
        if c.size < 1:
            raise ValidationError("Toeplitz block needs at least one coefficient")
        object.__setattr__(self, "coefficients", c)

    @property
    def dim(self):
        return self.coefficients.size

    def matrix(self):
        return linalg.toeplitz(self.coefficients)


def toeplitz_block(coeff_fn, M):
    """Section ``[T]_{mn} = coeff_fn(|m - n|)`` of size ``M``."""
    if M < 1:
        raise ValidationError(f"Toeplitz size must be >= 1, got {M}")
    return ToeplitzBlock(np.array([coeff_fn(k) for k in range(M)], dtype=float))


@dataclass(frozen=True)
class DephasingChannel:
    symbol: WrappedNormalSymbol

    @classmethod
    def from_gamma(cls, gamma):
        return cls(WrappedNormalSymbol(float(gamma)))

    @property
    def gamma(self):
        return self.symbol.gamma


def _channel(c):
    return c if isinstance(c, DephasingChannel) else DephasingChannel.from_gamma(c)


def coherence_factors(gamma, dim):
    """Matrix ``exp(-gamma (m - n)^2 / 2)`` for ``m, n < dim``."""
    k = np.arange(dim)
    d = k[:, None] - k[None, :]
    return np.exp(-0.5 * gamma * d * d)


def tensor_coherence_factors(gammas, dim):
    """Damping for a product of per-mode channels on ``dim**len(gammas)`` levels.

    Mode 0 is the slowest-varying index (``numpy.kron`` order). A rate of 0
    leaves that mode untouched.
    """
    n = len(gammas)
    digits = np.unravel_index(np.arange(dim**n), (dim,) * n)
    expo = np.zeros((dim**n, dim**n))
    for g, d in zip(gammas, digits):
        if g:
            diff = d[:, None] - d[None, :]
            expo -= 0.5 * g * diff * diff
    return np.exp(expo)


def apply_channel(channel, rho):
    """Single-mode channel output as a Hadamard product."""
    channel = _channel(channel)
    if rho.modes != 1:
        raise ValidationError("apply_channel acts on one mode; use apply_tensor_channel")
    if channel.gamma == 0:
        return rho
    out = rho.entries * coherence_factors(channel.gamma, rho.dim)
    return DensityMatrix._trusted(out, modes=1)


def apply_channel_rotation_oracle(channel, rho, spec=None):
    """Channel output as the phase-rotation average ``int p(theta) U^+ rho U dtheta``.

    Independent of the closed-form damping factors; used to cross-check
    :func:`apply_channel`.
    """
    channel = _channel(channel)
    if channel.gamma == 0:
        return rho
    spec = spec or QuadratureSpec(abs_tol=1e-13)
    n = np.arange(rho.dim)
    entries = rho.entries

    def f(theta):
        phase = np.exp(-1j * theta[:, None] * n[None, :])
        rotated = phase[:, :, None] * entries[None, :, :] * phase.conj()[:, None, :]
        return wrapped_pdf(channel.symbol, theta)[:, None, None] * rotated

    out = integrate_periodic(f, spec)
    return DensityMatrix._trusted(out, modes=rho.modes)


def apply_tensor_channel(channel, rho_n, modes=None, identity_modes=()):
    """Apply the channel to every mode of ``rho_n`` except ``identity_modes``.

    Parameters
    ----------
    channel : DephasingChannel or float
    rho_n : DensityMatrix
        State on ``rho_n.modes`` modes of per-mode dimension ``rho_n.dim``.
    modes : int, optional
        Expected mode count; a mismatch raises ``ValidationError``.
    identity_modes : iterable of int
        Zero-based modes left untouched, e.g. ``(0,)`` for ``id (x) N``.
    """
    channel = _channel(channel)
    if modes is not None and modes != rho_n.modes:
        raise ValidationError(f"state has {rho_n.modes} modes, expected {modes}")
    identity_modes = set(identity_modes)
    if any(not 0 <= j < rho_n.modes for j in identity_modes):
        raise ValidationError("identity_modes index out of range")
    gammas = [0.0 if j in identity_modes else channel.gamma for j in range(rho_n.modes)]
    out = rho_n.entries * tensor_coherence_factors(gammas, rho_n.dim)
    return DensityMatrix._trusted(out, modes=rho_n.modes)
