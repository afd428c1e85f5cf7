"""Signed translation kernel of the one-dimensional Dunkl theory.

For k > 0 and x, y != 0 the translation measure has the density

    gamma(x, y, z) = d * sigma(x, y, z) * rho(|x|, |y|, |z|) * 1[| |x|-|y| | <= |z| <= |x|+|y|]

against ``|z|**(2k) dz``, with

    d     = Gamma(k+1/2) / (sqrt(pi) Gamma(k))
    sigma = (z+x+y)(z+x-y)(z-x+y) / (2xyz)
    rho   = {c^2-(a-b)^2}^(k-1) {(a+b)^2-c^2}^(k-1) / (2abc)^(2k-1).

Writing c = sqrt(a^2 + b^2 - 2ab cos(theta)) turns the measure of each sign of
z into ``(d/2) sigma(x, y, +-c) sin(theta)**(2k-1) dtheta``, which removes the
k < 1 endpoint singularities of rho; translations and the theta form of the
total variation integrate in that variable.  The direct route integrates in z
with tanh-sinh nodes and serves as an independent cross-check.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dunkl1d import Grid1D, Multiplicity1D, SampledFunction
from .errors import DeltaMeasure, DomainError, SingularPointError
from .quadrature import QuadratureRule, integrate, tanh_sinh
from .specfun import ln_gamma

__all__ = [
    "KernelFactors",
    "SignedKernelSample",
    "KernelScan",
    "kernel_constant",
    "sigma_factor",
    "rho_factor",
    "gamma_density",
    "kernel_sample",
    "kernel_scan",
    "translate",
    "translation_mass",
    "total_variation_direct",
    "total_variation_theta",
    "total_variation",
    "sharp_constant",
    "lp_norm_bound",
]

#: Scalar integrals (total variation, mass); tight enough for rel. 1e-9 results.
SCALAR_RULE = QuadratureRule(rel_tol=1e-11, abs_tol=1e-15)
#: Translations; tight enough for rel. 1e-7 operator identities.
OPERATOR_RULE = QuadratureRule(rel_tol=1e-10, abs_tol=1e-14)
#: The direct z-route of the total variation.
DIRECT_RULE = QuadratureRule(scheme="tanh-sinh", rel_tol=1e-11, abs_tol=1e-15)


def kernel_constant(k: float) -> float:
    """d = Gamma(k+1/2) / (sqrt(pi) Gamma(k)) for k > 0."""
    k = float(k)
    if not k > 0:
        raise DomainError("the translation density needs k > 0")
    return math.exp(ln_gamma(k + 0.5) - ln_gamma(k)) / math.sqrt(math.pi)


@dataclass(frozen=True)
class KernelFactors:
    """Multiplicity k > 0 together with the normalizing constant d."""

    k: float

    def __post_init__(self):
        if not float(self.k) > 0:
            raise DomainError("the translation density needs k > 0")

    @property
    def d(self) -> float:
        return kernel_constant(self.k)


def sigma_factor(x, y, z):
    """(z+x+y)(z+x-y)(z-x+y) / (2xyz) for nonzero x, y, z."""
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    if np.any(x == 0) or np.any(y == 0) or np.any(z == 0):
        raise DomainError("sigma is undefined when an argument vanishes")
    out = (z + (x + y)) * (z + (x - y)) * (z - (x - y)) / (2.0 * x * y * z)
    return out.item() if out.ndim == 0 else out


def _heron(a, b, c):
    # (a+b+c)(-a+b+c)(a-b+c)(a+b-c) = {c^2-(a-b)^2}{(a+b)^2-c^2}, evaluated on
    # the sorted sides (p >= q >= r) in the cancellation-free arrangement
    s = np.sort(np.stack([a, b, c]), axis=0)
    r, q, p = s[0], s[1], s[2]
    return (p + (q + r)) * (r - (p - q)) * (r + (p - q)) * (p + (q - r))


def rho_factor(k: float, a, b, c):
    """{c^2-(a-b)^2}^(k-1) {(a+b)^2-c^2}^(k-1) / (2abc)^(2k-1).

    Returns 0 for c outside [|a-b|, a+b].  The value is symmetric in (a, b, c).

    Raises:
        SingularPointError: c sits on an endpoint of the interval and k < 1.
    """
    k = float(Multiplicity1D(k))
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
    if np.any(a <= 0) or np.any(b <= 0) or np.any(c <= 0):
        raise DomainError("rho needs positive arguments")
    prod = _heron(a, b, c)
    inside = (c >= np.abs(a - b)) & (c <= a + b) & (prod >= 0)
    if k < 1 and np.any(inside & (prod == 0)):
        raise SingularPointError("rho is singular at the interval endpoints when k < 1")
    with np.errstate(divide="ignore"):
        val = np.where(inside, np.abs(prod) ** (k - 1.0), 0.0) / (2.0 * a * b * c) ** (2.0 * k - 1.0)
    out = np.where(inside, val, 0.0)
    return out.item() if out.ndim == 0 else out


def gamma_density(k: float, x, y, z):
    """Density of the translation measure against |z|**(2k) dz.

    Raises:
        DeltaMeasure: x or y is zero; the measure is the point mass at the
            other argument.
        SingularPointError: the density is unbounded at z (support endpoint
            with k < 1, or z = 0 when |x| = |y|).
    """
    k = float(k)
    d = kernel_constant(k)
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    if np.any(x == 0):
        raise DeltaMeasure(float(y.flat[int(np.argmax(x == 0))]))
    if np.any(y == 0):
        raise DeltaMeasure(float(x.flat[int(np.argmax(y == 0))]))
    a, b = np.abs(x), np.abs(y)
    zero = z == 0
    if np.any(zero & (a == b)):
        raise SingularPointError("the density has no value at z = 0 when |x| = |y|")
    zs = np.where(zero, 1.0, z)
    inside = (~zero) & (np.abs(zs) >= np.abs(a - b)) & (np.abs(zs) <= a + b)
    zi = np.where(inside, zs, a + b)
    vals = d * sigma_factor(x, y, zi) * rho_factor(k, a, b, np.abs(zi))
    out = np.where(inside, vals, 0.0)
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class SignedKernelSample:
    """One point value of the density and of density times |z|**(2k)."""

    x: float
    y: float
    z: float
    density: float
    weighted_density: float


def kernel_sample(k: float, x: float, y: float, z: float) -> SignedKernelSample:
    g = float(gamma_density(k, x, y, z))
    return SignedKernelSample(float(x), float(y), float(z), g, g * abs(z) ** (2.0 * k))


@dataclass
class KernelScan:
    """Density along a z-grid; singular nodes hold NaN."""

    k: float
    x: float
    y: float
    z: np.ndarray
    gamma: np.ndarray
    weighted_gamma: np.ndarray

    def to_csv(self, target=None) -> str | None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["z", "gamma", "weighted_gamma"])
        for row in zip(self.z, self.gamma, self.weighted_gamma):
            writer.writerow([repr(float(v)) for v in row])
        if target is None:
            return buf.getvalue()
        Path(target).write_text(buf.getvalue())
        return None

    @staticmethod
    def read_csv(source) -> dict[str, np.ndarray]:
        text = Path(source).read_text() if not hasattr(source, "read") else source.read()
        rows = list(csv.DictReader(io.StringIO(text)))
        return {key: np.array([float(r[key]) for r in rows]) for key in ("z", "gamma", "weighted_gamma")}


def kernel_scan(k: float, x: float, y: float, z_grid=None) -> KernelScan:
    """Sample the density on ``z_grid`` (default: 2000 nodes on [-(|x|+|y|), |x|+|y|]).

    The default node count is even so that z = 0 is never a node.
    """
    if z_grid is None:
        span = abs(x) + abs(y)
        z_grid = Grid1D(-span, span, 2000)
    z = Grid1D.coerce(z_grid).nodes
    gam = np.empty_like(z)
    for i, zi in enumerate(z):
        try:
            gam[i] = gamma_density(k, x, y, zi)
        except SingularPointError:
            gam[i] = np.nan
    return KernelScan(float(k), float(x), float(y), z, gam, gam * np.abs(z) ** (2.0 * k))


# -- integrals in the theta variable -------------------------------------------


def _sinc(t):
    return np.where(t > 0, np.sin(t) / np.where(t > 0, t, 1.0), 1.0)


def _theta_integral(k: float, a, b, integrand, rule: QuadratureRule):
    """int_0^pi integrand(c(theta)) sin(theta)^(2k-1) dtheta.

    [0, pi] is split at pi/2 and each half is written as a distance t to its
    endpoint, so both endpoint factors t^(2k-1) go into Gauss-Jacobi weights;
    the half at theta = 0, where c can approach |a-b| = 0 steeply, is graded.
    """
    p = 2.0 * k - 1.0
    gl = QuadratureRule(rel_tol=rule.rel_tol, abs_tol=rule.abs_tol, panels=4)

    def lower(t):
        c = np.sqrt((a - b) ** 2 + 4.0 * a * b * np.sin(0.5 * t) ** 2)
        return integrand(np.maximum(c, np.finfo(float).tiny)) * _sinc(t) ** p

    def upper(t):
        c = np.sqrt((a + b) ** 2 - 4.0 * a * b * np.sin(0.5 * t) ** 2)
        return integrand(c) * _sinc(t) ** p

    half = 0.5 * math.pi
    return (integrate(lower, 0.0, half, gl, left_power=p, graded=True)
            + integrate(upper, 0.0, half, gl, left_power=p))


def _sigma_pair(x, y, c):
    sp = (c + x + y) * (c + x - y) * (c - x + y) / (2.0 * x * y * c)
    sm = (-c + x + y) * (-c + x - y) * (-c - x + y) / (-2.0 * x * y * c)
    return sp, sm


def _theta_measure(k: float, x: float, y: float, reducer, rule: QuadratureRule):
    """Integrate ``reducer(sigma(x, y, c), sigma(x, y, -c))`` against (d/2) sin^(2k-1) dtheta."""
    d = kernel_constant(k)
    return 0.5 * d * _theta_integral(k, abs(x), abs(y),
                                     lambda c: reducer(*_sigma_pair(x, y, c)), rule)


def translation_mass(k: float, x: float, y: float, rule: QuadratureRule | None = None) -> float:
    """Total signed mass of the translation measure (equal to 1), by the theta route."""
    if x == 0 or y == 0:
        return 1.0
    return float(_theta_measure(float(k), float(x), float(y), lambda sp, sm: sp + sm,
                                rule or SCALAR_RULE))


def translate(k: float, x: float, f: SampledFunction, y_grid=None,
              rule: QuadratureRule | None = None) -> SampledFunction:
    """tau_x f on ``y_grid`` (default: the grid of f).

    The result evaluates tau_x f lazily off its grid.  k = 0 is the ordinary
    shift f(x + y), the point-mass limit of the measures.

    Raises:
        DomainError: f is only known on a grid that does not cover
            [-(|x|+Y), |x|+Y], Y = max |y|.
    """
    k = float(Multiplicity1D(k))
    x = float(x)
    rule = rule or OPERATOR_RULE
    y_grid = f.grid if y_grid is None else Grid1D.coerce(y_grid)
    if x == 0.0:
        if y_grid == f.grid:
            return SampledFunction(y_grid, f.values.copy(), f.declared_support_radius,
                                   evaluator=f.evaluator)
        return SampledFunction.from_callable(f, y_grid)
    reach = abs(x) + y_grid.extent
    covered = f.grid.start <= -reach and f.grid.stop >= reach
    known_zero = (f.declared_support_radius is not None
                  and f.declared_support_radius <= min(-f.grid.start, f.grid.stop))
    if not (covered or known_zero or f.evaluator is not None):
        raise DomainError(f"f must be known on [-{reach}, {reach}] to translate by {x}")

    def evaluate(ys):
        ys = np.asarray(ys, dtype=float)
        flat = ys.reshape(-1)
        if k == 0.0:
            return f(flat + x).reshape(ys.shape)
        out = np.empty(flat.shape, dtype=complex)
        zero = flat == 0.0
        if zero.any():
            out[zero] = f(np.array([x]))[0]
        ny = flat[~zero]
        if ny.size:
            out[~zero] = _translate_values(k, x, ny, f, rule)
        return out.reshape(ys.shape)

    return SampledFunction(y_grid, evaluate(y_grid.nodes), evaluator=evaluate)


def _translate_values(k, x, ys, f, rule):
    d = kernel_constant(k)
    yc = ys[:, None]

    def inner(c):
        sp, sm = _sigma_pair(x, yc, c)
        return sp * f(c) + sm * f(-c)

    return 0.5 * d * _theta_integral(k, abs(x), np.abs(yc), inner, rule)


# -- total variation ---------------------------------------------------------


def _canonical(x: float, y: float) -> tuple[float, float]:
    # TV(x, y) = TV(y, x) = TV(-x, -y): reduce to 0 < x <= |y|
    if x == 0 or y == 0:
        raise DomainError("total variation needs x, y != 0 (point mass otherwise)")
    if abs(x) > abs(y):
        x, y = y, x
    if x < 0:
        x, y = -x, -y
    return x, y


def _shifted(c, dl, dr, t, lo, hi):
    # c + t without cancellation when -t is an interval end
    if t == -lo:
        return dl
    if t == -hi:
        return -dr
    return c + t


def total_variation_direct(k: float, x: float, y: float, rule: QuadratureRule | None = None,
                           signed: bool = False) -> float:
    """Integral of |gamma(x, y, z)| |z|^(2k) dz over both support intervals.

    Integrates in z with tanh-sinh nodes; rho is evaluated from the node's
    distances to the interval ends so the k < 1 singularities are resolved.
    With ``signed`` the integrand is gamma itself (total mass, equal to 1).
    """
    k = float(k)
    d = kernel_constant(k)
    rule = rule or DIRECT_RULE
    x, y = _canonical(float(x), float(y))
    a, b = x, abs(y)
    lo, hi = b - a, a + b
    total = 0.0
    for sign in (1.0, -1.0):

        def fn(c, dl, dr, sign=sign):
            z = sign * c
            # each factor z + t is +-(c - lo), +-(c - hi) or a sum of positives
            num = sign * _shifted(c, dl, dr, sign * (x + y), lo, hi)
            num = num * sign * _shifted(c, dl, dr, sign * (x - y), lo, hi)
            num = num * sign * _shifted(c, dl, dr, -sign * (x - y), lo, hi)
            sig = num / (2.0 * x * y * z)
            # rho * c^(2k) in logs: the factors underflow separately near c = 0
            log_prod = np.log(dl) + np.log(2.0 * lo + dl) + np.log(dr) + np.log(2.0 * hi - dr)
            log_w = (k - 1.0) * log_prod - (2.0 * k - 1.0) * math.log(2.0 * a * b) + np.log(c)
            g = d * sig * np.exp(log_w)
            return g if signed else np.abs(g)

        total += tanh_sinh(fn, lo, hi, rule)
    return float(total)


def _tv_halves(k: float, s: float, rule: QuadratureRule) -> float:
    # (1 - cos t) / sqrt(1 + s^2 - 2 s cos t) in cancellation-free form, split at
    # pi/2; the lower half carries the near-singularity at t = 0 when s ~ 1
    p = 2.0 * k - 1.0
    gl = QuadratureRule(rel_tol=rule.rel_tol, abs_tol=rule.abs_tol, panels=4)

    def lower(t):
        s2 = np.sin(0.5 * t) ** 2
        sinc = np.where(t > 0, np.sin(t) / np.where(t > 0, t, 1.0), 1.0)
        return 2.0 * s2 * sinc**p / np.sqrt((1.0 - s) ** 2 + 4.0 * s * s2)

    def upper(u):
        # t = pi - u
        c2 = np.cos(0.5 * u) ** 2
        sinc = np.where(u > 0, np.sin(u) / np.where(u > 0, u, 1.0), 1.0)
        return 2.0 * c2 * sinc**p / np.sqrt((1.0 + s) ** 2 - 4.0 * s * np.sin(0.5 * u) ** 2)

    half = 0.5 * math.pi
    low = integrate(lower, 0.0, half, gl, left_power=p, graded=True)
    up = integrate(upper, 0.0, half, gl, left_power=p)
    return float(low + up)


def total_variation_theta(k: float, s: float, rule: QuadratureRule | None = None) -> float:
    """F(s) = d (1+s) int_0^pi (1 - cos t) sin^(2k-1) t / sqrt(1 + s^2 - 2 s cos t) dt.

    F(s) is the total variation of the translation measure for 0 < x <= y with
    s = y / x.

    Raises:
        DomainError: s < 1 (normalize by symmetry first) or k <= 0.
    """
    k = float(k)
    s = float(s)
    if not s >= 1.0:
        raise DomainError("F(s) is defined for s >= 1; reduce (x, y) by symmetry first")
    d = kernel_constant(k)
    return d * (1.0 + s) * _tv_halves(k, s, rule or SCALAR_RULE)


def total_variation(k: float, x: float, y: float, method: str = "theta",
                    rule: QuadratureRule | None = None) -> float:
    """Total variation of the translation measure for any nonzero x, y.

    ``method="theta"`` uses F(|y|/|x|) when xy > 0 and the theta-route mass
    integral of the (then nonnegative) measure when xy < 0; ``"direct"``
    integrates |gamma| in z.  k = 0 gives 1 (a point mass).
    """
    if float(k) == 0.0:
        return 1.0
    if method == "direct":
        return total_variation_direct(k, x, y, rule)
    if method != "theta":
        raise DomainError(f"unknown method {method!r}")
    x, y = _canonical(float(x), float(y))
    if y > 0:
        return total_variation_theta(k, y / x, rule)
    return float(_theta_measure(float(k), x, y, lambda sp, sm: np.abs(sp) + np.abs(sm),
                                rule or SCALAR_RULE))


# -- sharp constants -------------------------------------------------------------


def sharp_constant(k: float) -> float:
    """A_k = sqrt(2) Gamma(k+1/2)^2 / (Gamma(k+1/4) Gamma(k+3/4)).

    A_0 = 1, A_k increases strictly and tends to sqrt(2) from below.
    """
    k = float(Multiplicity1D(k))
    return math.sqrt(2.0) * math.exp(
        2.0 * ln_gamma(k + 0.5) - ln_gamma(k + 0.25) - ln_gamma(k + 0.75)
    )


def lp_norm_bound(k: float, p: float) -> float:
    """Bound A_k^(2|1/p - 1/2|) on the L^p operator norm of a translation, p in [1, inf]."""
    p = float(p)
    if not p >= 1.0:
        raise DomainError("p must lie in [1, inf]")
    return sharp_constant(k) ** (2.0 * abs(1.0 / p - 0.5))
