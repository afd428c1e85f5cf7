"""Numerical checks of exponential type for transforms of compactly supported functions.

For f supported in [-R, R] the transform extends to an entire function with
|h(xi)| <= C_M (1 + |xi|)^(-M) e^(R |Im xi|).  Along the imaginary axis the
growth rate d log|h(it)| / dt approaches R from below; finite windows are
biased low by the polynomial prefactor, roughly like R - const / sqrt(t), so
the default range reaches t R = 1500.

In the product case Z2^2 with f a tensor bump on the rectangle
[-R1, R1] x [-R2, R2] the rate along i t v is the support function of the
rectangle, R1 |v1| + R2 |v2|.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dunkl1d import Grid1D, SampledFunction, dunkl_kernel_complex, dunkl_transform, transform_constant
from .errors import DomainError
from .quadrature import QuadratureRule, integrate
from .rootgeom import polar_gauge, root_system, support_function
from .specfun import MAX_ARGUMENT

__all__ = [
    "DecayReport",
    "bump_function",
    "transform_on_vertical_line",
    "gauge_decay_check_2d",
    "rectangle_gauge",
    "real_axis_decay",
    "fit_rate",
    "DEFAULT_TYPE_REACH",
]

#: Default t-range reaches t * (exponential type) = DEFAULT_TYPE_REACH.
DEFAULT_TYPE_REACH = 1500.0
DEFAULT_SAMPLES = 61
_LINE_RULE = QuadratureRule(rel_tol=1e-10, abs_tol=1e-300)


def bump_function(R: float, grid=None) -> SampledFunction:
    """exp(-1/(1 - (x/R)^2)) on |x| < R, zero elsewhere, with declared radius R."""
    R = float(R)
    if not R > 0:
        raise DomainError("support radius must be positive")
    grid = Grid1D(-R, R, 201) if grid is None else Grid1D.coerce(grid)
    if grid.start > -R or grid.stop < R:
        raise DomainError("grid must cover [-R, R]")

    def bump(x):
        x = np.asarray(x, dtype=float)
        t = x / R
        inside = np.abs(t) < 1.0
        out = np.zeros(x.shape)
        out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
        return out

    return SampledFunction.from_callable(bump, grid, declared_support_radius=R)


def fit_rate(t, log_mod) -> float:
    """Least-squares slope of log|h| against t over the upper half of the samples.

    With fewer than four samples all of them are used.
    """
    t = np.asarray(t, dtype=float)
    log_mod = np.asarray(log_mod, dtype=float)
    if len(t) < 2:
        raise DomainError("a rate needs at least two samples")
    half = len(t) // 2 if len(t) >= 4 else 0
    slope, _ = np.polyfit(t[half:], log_mod[half:], 1)
    return float(slope)


@dataclass
class DecayReport:
    """Sampled log-moduli along a ray and the fitted exponential rate."""

    direction: tuple[float, ...]
    t_samples: list[float]
    log_moduli: list[float]
    fitted_rate: float
    gauge_value: float
    polynomial_order_checked: int = 3
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.fitted_rate / self.gauge_value

    def window_rates(self, windows: int = 4) -> list[float]:
        """Rates fitted on the upper halves of growing prefixes of the samples."""
        n = len(self.t_samples)
        out = []
        for w in range(1, windows + 1):
            m = max(4, n * w // windows)
            out.append(fit_rate(self.t_samples[:m], self.log_moduli[:m]))
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": "1",
            "direction": list(self.direction),
            "gauge_value": self.gauge_value,
            "fitted_rate": self.fitted_rate,
            "ratio": self.ratio,
            "polynomial_order_checked": self.polynomial_order_checked,
            "samples": [{"t": t, "log_modulus": v} for t, v in zip(self.t_samples, self.log_moduli)],
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _default_t(type_value: float, n: int = DEFAULT_SAMPLES) -> np.ndarray:
    return np.linspace(0.0, DEFAULT_TYPE_REACH / type_value, n)


def _clip_to_domain(t, R: float, xi0: float = 0.0) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    ok = np.hypot(np.abs(t), abs(xi0)) * R <= MAX_ARGUMENT
    if not ok.all():
        warnings.warn(f"dropping {int((~ok).sum())} samples beyond the Bessel range", RuntimeWarning)
    return t[ok]


def _log_modulus_on_line(k: float, f: SampledFunction, xi0: float, t: np.ndarray,
                         rule: QuadratureRule) -> np.ndarray:
    # log |h(xi0 + i t)| = t R + log |int f(x) E_s(lam, x) e^{|t|(|x| - R)} |x|^{2k} dx| - log c
    # with lam = -i (xi0 + i t) = t - i xi0 and E_s the kernel scaled by e^{-|t||x|}
    R = f.declared_support_radius
    c = transform_constant(k)
    out = np.empty(len(t))
    for i, ti in enumerate(t):
        lam = ti - 1j * xi0

        def fn(x, ti=ti, lam=lam):
            gp, gm = f.pair(x)
            damp = np.exp(abs(ti) * (x - R))
            ep = dunkl_kernel_complex(k, lam, x, scaled=True)
            em = dunkl_kernel_complex(k, lam, -x, scaled=True)
            val = (gp * ep + gm * em) * damp
            return np.stack([val.real, val.imag])

        # the mass concentrates within ~1/sqrt(t) of the support edge
        panels = max(1, math.ceil(math.sqrt(abs(ti) * R + 1.0)))
        re, im = integrate(fn, 0.0, R, rule, left_power=2.0 * k, min_panels=panels)
        out[i] = abs(ti) * R + math.log(math.hypot(re, im)) - math.log(c)
    return out


def transform_on_vertical_line(k: float, f: SampledFunction, xi0: float = 0.0, t_list=None,
                               rule: QuadratureRule | None = None) -> DecayReport:
    """Growth of |Df(xi0 + i t)| for f with a declared support radius R.

    The default t-range is [0, 1500 / R].  The gauge value reported is R.

    Raises:
        DomainError: f has no declared support radius.
    """
    R = f.declared_support_radius
    if R is None:
        raise DomainError("f needs a declared support radius")
    t = _default_t(R) if t_list is None else np.asarray(t_list, dtype=float)
    t = _clip_to_domain(t, R, xi0)
    logs = _log_modulus_on_line(float(k), f, float(xi0), t, rule or _LINE_RULE)
    return DecayReport((1.0,), t.tolist(), logs.tolist(), fit_rate(t, logs), float(R),
                       extra={"k": float(k), "support_radius": float(R), "xi0": float(xi0)})


def rectangle_gauge(radii, v) -> float:
    """Exponential type of the rectangle prod [-R_j, R_j] in direction v.

    The rectangle is the orbit hull of (R_1, R_2) under Z2^2, so the type is its
    support function; the bisection on the polar set gives the same number.
    """
    rs = root_system("A1xA1")
    return support_function(rs, radii, v)


def gauge_decay_check_2d(pk, radii, v, t_list=None, rule: QuadratureRule | None = None,
                         grid_nodes: int = 201) -> DecayReport:
    """Growth of the transform of a tensor bump on a rectangle along i t v.

    The transform factorizes, so log|h(i t v)| is the sum of the 1D
    log-moduli at t v_j.  The default t-range makes the smallest nonzero
    factor type t |v_j| R_j reach 1500.
    """
    ks = tuple(float(k) for k in getattr(pk, "ks", pk))
    radii = tuple(float(r) for r in radii)
    v = np.asarray(v, dtype=float)
    if len(ks) != 2 or len(radii) != 2 or v.shape != (2,):
        raise DomainError("the rectangle check is two-dimensional")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise DomainError("direction must be a unit vector")
    chi = rectangle_gauge(radii, v)
    active = [abs(v[j]) * radii[j] for j in range(2) if v[j] != 0]
    t = _default_t(min(active)) if t_list is None else np.asarray(t_list, dtype=float)
    t = _clip_to_domain(t, max(radii))
    rule = rule or _LINE_RULE
    logs = np.zeros(len(t))
    for j in range(2):
        f = bump_function(radii[j], (-radii[j], radii[j], grid_nodes))
        tj = t * abs(v[j])
        logs += _log_modulus_on_line(ks[j], f, 0.0, tj, rule)
    check = polar_gauge(root_system("A1xA1"), radii, v)
    return DecayReport(tuple(v.tolist()), t.tolist(), logs.tolist(), fit_rate(t, logs), chi,
                       extra={"k": list(ks), "radii": list(radii), "gauge_by_polar_bisection": check})


def real_axis_decay(k: float, f: SampledFunction, M: int = 3, xi_max: float = 200.0,
                    count: int = 2001, rule: QuadratureRule | None = None) -> dict:
    """Sample (1 + |xi|)^M |Df(xi)| on [0, xi_max].

    Reported as bounded when the maximum over the upper half of the range does
    not exceed the maximum over the lower half.
    """
    h = dunkl_transform(k, f, (0.0, xi_max, count), rule)
    xi = h.nodes
    weighted = (1.0 + xi) ** M * np.abs(h.values)
    half = xi <= xi_max / 2
    lower, upper = float(weighted[half].max()), float(weighted[~half].max())
    return {"M": M, "xi_max": xi_max, "max_lower_half": lower, "max_upper_half": upper,
            "bounded": bool(np.all(np.isfinite(weighted)) and upper <= lower)}
