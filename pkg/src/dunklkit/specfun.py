"""Log-gamma, beta and normalized Bessel functions.

The normalized Bessel function is

    j_nu(z) = Gamma(nu + 1) * sum_n (-1)^n / (n! Gamma(nu + n + 1)) * (z / 2)^(2n),

an even entire function with j_nu(0) = 1.  Small arguments use the power
series with compensated summation; larger ones go through ``scipy.special``
(the series loses about log10(e^|z|) digits to cancellation on the real axis).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import BesselRangeError, DomainError

__all__ = [
    "SERIES_RADIUS",
    "MAX_ARGUMENT",
    "NormalizedBesselOrder",
    "ln_gamma",
    "gamma",
    "beta",
    "normalized_bessel",
    "bessel_series",
]

#: Arguments with |z| <= SERIES_RADIUS are summed from the power series.
SERIES_RADIUS = 8.0
#: Documented evaluation range; larger |z| raises BesselRangeError.
MAX_ARGUMENT = 1.0e5
# exp(709) is the largest finite double
_MAX_IMAG_UNSCALED = 700.0


class NormalizedBesselOrder(float):
    """Order nu of a normalized Bessel function; requires nu > -1."""

    def __new__(cls, nu: float):
        nu = float(nu)
        if not nu > -1.0:
            raise DomainError(f"Bessel order must exceed -1, got {nu}")
        return super().__new__(cls, nu)


def _as_output(value, like):
    if np.ndim(like) == 0:
        return value.item() if isinstance(value, np.ndarray) else value
    return value


def ln_gamma(u):
    """Natural log of the gamma function for u > 0 (scalar or array)."""
    arr = np.asarray(u, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("ln_gamma requires strictly positive arguments")
    if arr.ndim == 0:
        return math.lgamma(float(arr))
    return special.gammaln(arr)


def gamma(u):
    """Gamma function for u > 0, computed as exp(ln_gamma(u))."""
    return np.exp(ln_gamma(u)) if np.ndim(u) else math.exp(ln_gamma(u))


def beta(a, b):
    """Beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b) for a, b > 0."""
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(~(a_arr > 0)) or np.any(~(b_arr > 0)):
        raise DomainError("beta requires strictly positive arguments")
    out = np.exp(ln_gamma(a_arr) + ln_gamma(b_arr) - ln_gamma(a_arr + b_arr))
    return float(out) if out.ndim == 0 else out


def bessel_series(nu: float, z, tol: float = 1e-17, max_terms: int = 500):
    """Sum the normalized Bessel series with Kahan compensation.

    Returns ``(value, terms, last_term)`` where ``terms`` is the number of
    series terms added and ``last_term`` the modulus of the last one, per
    element.  Summation stops once every term satisfies
    ``|term| < tol * |partial sum|``.
    """
    nu = NormalizedBesselOrder(nu)
    z = np.asarray(z)
    dtype = complex if np.iscomplexobj(z) else float
    q = -((z.astype(dtype) / 2.0) ** 2)
    total = np.ones(z.shape, dtype=dtype)
    comp = np.zeros(z.shape, dtype=dtype)
    term = np.ones(z.shape, dtype=dtype)
    terms = np.ones(z.shape, dtype=int)
    last = np.ones(z.shape, dtype=float)
    active = np.ones(z.shape, dtype=bool)
    for n in range(1, max_terms):
        if not active.any():
            break
        term = term * q / (n * (nu + n))
        # Kahan step on the still-active entries
        y = np.where(active, term - comp, 0)
        t = total + y
        comp = np.where(active, (t - total) - y, comp)
        total = np.where(active, t, total)
        terms = terms + active
        mag = np.abs(term)
        last = np.where(active, mag, last)
        active &= ~((mag < tol * np.abs(total)) | (mag < 1e-300))
    else:
        if active.any():
            raise BesselRangeError("Bessel series did not converge")
    return total, terms, last


def _series_horner(nu: float, z: np.ndarray) -> np.ndarray:
    # fixed-length Horner form of the series; the length is taken from the
    # largest |z| so that the first omitted term is below 1e-17
    q = -((z / 2.0) ** 2)
    qmax = float(np.max(np.abs(q))) if q.size else 0.0
    coefs = [1.0]
    n = 0
    while True:
        n += 1
        coefs.append(coefs[-1] / (n * (nu + n)))
        if coefs[-1] * qmax ** n < 1e-17 * max(1.0, coefs[-2] * qmax ** (n - 1)) or n > 400:
            break
    acc = np.full(z.shape, coefs[-1], dtype=q.dtype)
    for a in reversed(coefs[:-1]):
        acc = acc * q + a
    return acc


def _bessel_large(nu: float, z: np.ndarray, scaled: bool) -> np.ndarray:
    # evenness: move to Re z >= 0, away from the branch cut of (z/2)^-nu
    w = np.where(np.real(z) < 0, -z, z)
    pref = math.exp(math.lgamma(nu + 1.0))
    n_half = nu - 0.5
    if not np.iscomplexobj(w) and n_half == round(n_half) and n_half >= -1:
        # half-integer order: closed forms through spherical Bessel functions
        n = int(round(n_half))
        if n == -1:
            return np.cos(w)
        scale = pref * 2.0 ** (n + 1) / math.sqrt(math.pi)
        return scale * w ** (-n) * special.spherical_jn(n, w)
    if np.iscomplexobj(w):
        core = special.jve(nu, w)
        if not scaled:
            core = core * np.exp(np.abs(w.imag))
    else:
        core = special.jv(nu, w)
    return pref * (w / 2.0) ** (-nu) * core


def normalized_bessel(nu: float, z, scaled: bool = False):
    """Evaluate j_nu(z) for real or complex z.

    Args:
        nu: order, nu > -1.
        z: scalar or array argument; real input gives real output.
        scaled: if true return j_nu(z) * exp(-|Im z|), which stays bounded
            for large imaginary parts.

    Raises:
        BesselRangeError: |z| exceeds ``MAX_ARGUMENT``, or the unscaled value
            would overflow.
    """
    nu = NormalizedBesselOrder(nu)
    z_arr = np.asarray(z)
    if not np.iscomplexobj(z_arr):
        z_arr = z_arr.astype(float)
    mag = np.abs(z_arr)
    if np.any(mag > MAX_ARGUMENT) or np.any(~np.isfinite(mag)):
        raise BesselRangeError(f"|z| beyond documented range {MAX_ARGUMENT:g}")
    if np.iscomplexobj(z_arr) and not scaled and np.any(np.abs(z_arr.imag) > _MAX_IMAG_UNSCALED):
        raise BesselRangeError("imaginary part too large; use scaled=True")
    flat = z_arr.reshape(-1)
    out = np.empty(flat.shape, dtype=flat.dtype)
    small = np.abs(flat) <= SERIES_RADIUS
    if small.any():
        val = _series_horner(float(nu), flat[small])
        if scaled and np.iscomplexobj(flat):
            val = val * np.exp(-np.abs(flat[small].imag))
        out[small] = val
    if (~small).any():
        out[~small] = _bessel_large(float(nu), flat[~small], scaled)
    return _as_output(out.reshape(z_arr.shape), z)
