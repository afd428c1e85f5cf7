"""Product case G = Z2^N: tensor kernels, translation densities and the mollified probe.

Everything factorizes over coordinates: the kernel, the weight
``prod |x_j|**(2 k_j)``, the translation density and the transform constant
``c = prod c_j``.

The mollified kernel is

    gamma_eps(x, y, z) = (1/c^2) int m(eps xi) E(i xi, x) E(i xi, y) E(-i xi, z) w(xi) dxi

with ``m = c * Dh`` the transform of a compactly supported bump h of unit
weighted mass, so that m(0) = 1 and gamma_eps tends to the translation measure
as eps -> 0.  For a radial h, m depends on |xi| only and is a Hankel transform
of order lam = sum k_j + N/2 - 1.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.interpolate import CubicSpline

from . import translate1d
from .dunkl1d import Grid1D, dunkl_kernel, dunkl_kernel_complex, transform_constant
from .errors import DomainError
from .quadrature import QuadratureRule, composite_rule, integrate
from .rootgeom import root_system, support_region_contains
from .specfun import normalized_bessel

__all__ = [
    "ProductMultiplicity",
    "MollifierSpec",
    "ProbeResult",
    "product_kernel",
    "product_kernel_complex",
    "product_translation_density",
    "product_total_variation",
    "product_lp_bound",
    "product_support_indicator",
    "region_indicator",
    "gamma_eps_probe",
]


@dataclass(frozen=True)
class ProductMultiplicity:
    """Per-coordinate multiplicities k_1, ..., k_N >= 0."""

    ks: tuple[float, ...]

    def __post_init__(self):
        ks = tuple(float(k) for k in np.atleast_1d(self.ks))
        if not ks or any(not k >= 0 for k in ks):
            raise DomainError("product multiplicities must be nonnegative")
        object.__setattr__(self, "ks", ks)

    @property
    def dimension(self) -> int:
        return len(self.ks)

    @property
    def hankel_order(self) -> float:
        """lam = sum k_j + N/2 - 1, the order of the radial transform."""
        return sum(self.ks) + self.dimension / 2.0 - 1.0

    @property
    def transform_constant(self) -> float:
        return float(np.prod([transform_constant(k) for k in self.ks]))

    def weight(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.prod([np.abs(x[..., j]) ** (2.0 * k) for j, k in enumerate(self.ks)], axis=0)


def _coerce(pk) -> ProductMultiplicity:
    return pk if isinstance(pk, ProductMultiplicity) else ProductMultiplicity(tuple(pk))


def product_kernel(pk, xi, x) -> complex:
    """E_N(i xi, x) = prod_j E(i xi_j, x_j)."""
    pk = _coerce(pk)
    xi = np.asarray(xi, dtype=float)
    x = np.asarray(x, dtype=float)
    out = 1.0 + 0j
    for j, k in enumerate(pk.ks):
        out = out * dunkl_kernel(k, xi[..., j], x[..., j])
    return out


def product_kernel_complex(pk, lam, x, scaled: bool = False):
    """Entire extension prod_j E(lam_j, x_j) for complex lam."""
    pk = _coerce(pk)
    lam = np.asarray(lam, dtype=complex)
    x = np.asarray(x, dtype=float)
    out = 1.0 + 0j
    for j, k in enumerate(pk.ks):
        out = out * dunkl_kernel_complex(k, lam[..., j], x[..., j], scaled=scaled)
    return out


def product_translation_density(pk, x, y, z):
    """prod_j gamma(x_j, y_j, z_j) against prod_j |z_j|^(2 k_j) dz.

    Raises:
        DeltaMeasure: some x_j or y_j vanishes (that factor is a point mass).
    """
    pk = _coerce(pk)
    z = np.asarray(z, dtype=float)
    out = 1.0
    for j, k in enumerate(pk.ks):
        out = out * translate1d.gamma_density(k, x[j], y[j], z[..., j])
    return out


def product_total_variation(pk, x, y, method: str = "theta") -> float:
    """Total variation of the product measure: the product of the 1D values."""
    pk = _coerce(pk)
    return float(np.prod([translate1d.total_variation(k, x[j], y[j], method)
                          for j, k in enumerate(pk.ks)]))


def product_lp_bound(pk, p: float) -> float:
    """prod_j A_{k_j}^(2|1/p - 1/2|); equals A_k^(2|1/p - 1/2| N) for equal k."""
    pk = _coerce(pk)
    return float(np.prod([translate1d.lp_norm_bound(k, p) for k in pk.ks]))


def product_support_indicator(x, y, z1, z2) -> np.ndarray:
    """Exact support of the product measure on the tensor grid z1 x z2."""
    masks = []
    for j, zj in enumerate((np.asarray(z1, float), np.asarray(z2, float))):
        a, b = abs(x[j]), abs(y[j])
        masks.append((np.abs(zj) >= abs(a - b) - 1e-12) & (np.abs(zj) <= a + b + 1e-12))
    return masks[0][:, None] & masks[1][None, :]


def region_indicator(x, y, z1, z2, root: str = "A1xA1") -> np.ndarray:
    """Refined support region of the root-system predicate on the grid z1 x z2."""
    rs = root_system(root)
    return np.array([[support_region_contains(rs, x, y, (a, b)) for b in z2] for a in z1])


# -- mollifier ---------------------------------------------------------------------


def _bump(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    out = np.zeros_like(t)
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


_RADIAL_RULE = QuadratureRule(rel_tol=1e-12, abs_tol=1e-300)


@dataclass(frozen=True)
class MollifierSpec:
    """Bump h of unit weighted mass, dilated by eps.

    The support ball of radius r must fit inside -co(G.u) for the unit vector
    u (default (1, ..., 1)/sqrt(N)), which for Z2^N means r <= min u_j.

    ``profile="radial"`` takes h(x) = c_h exp(-1/(1 - |x/r|^2)); ``"tensor"``
    takes the product of 1D bumps of radius r, for which the multiplier is a
    product of 1D transforms.
    """

    eps: float
    support_radius: float
    pk: ProductMultiplicity
    profile: str = "radial"
    cutoff: float = 1e-6
    u: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (self.eps > 0 and self.support_radius > 0):
            raise DomainError("eps and the support radius must be positive")
        n = _coerce(self.pk).dimension
        u = np.full(n, 1.0 / math.sqrt(n)) if self.u is None else np.asarray(self.u, dtype=float)
        if abs(np.linalg.norm(u) - 1.0) > 1e-12 or np.any(u <= 0):
            raise DomainError("u must be a unit vector in the open positive chamber")
        # the ball of radius r sits inside -co(G.u) iff r <= min |u_j|
        if self.support_radius > float(np.min(u)) + 1e-12:
            raise DomainError("support radius must not exceed the smallest coordinate of u")
        object.__setattr__(self, "u", tuple(float(v) for v in u))
        if self.profile not in ("radial", "tensor"):
            raise DomainError(f"unknown mollifier profile {self.profile!r}")
        object.__setattr__(self, "pk", _coerce(self.pk))

    @cached_property
    def _radial_mass(self) -> float:
        lam = self.pk.hankel_order
        r = self.support_radius
        return float(integrate(lambda s: _bump(s / r), 0.0, r, _RADIAL_RULE, left_power=2 * lam + 1))

    @cached_property
    def normalization(self) -> float:
        """c_h, making int h w = 1."""
        if self.profile == "radial":
            return 1.0 / (_sphere_weight_integral(self.pk.ks) * self._radial_mass)
        r = self.support_radius
        total = 1.0
        for k in self.pk.ks:
            total *= 2.0 * float(integrate(lambda s: _bump(s / r), 0.0, r, _RADIAL_RULE,
                                           left_power=2 * k))
        return 1.0 / total

    def h(self, x) -> np.ndarray:
        """Undilated profile at points x (last axis = coordinates)."""
        x = np.asarray(x, dtype=float)
        r = self.support_radius
        if self.profile == "radial":
            return self.normalization * _bump(np.linalg.norm(x, axis=-1) / r)
        return self.normalization * np.prod(_bump(x / r), axis=-1)

    def _radial_multiplier(self, eta):
        lam = self.pk.hankel_order
        r = self.support_radius
        eta = np.asarray(eta, dtype=float)

        def fn(s):
            return _bump(s / r)[None, :] * normalized_bessel(lam, np.multiply.outer(eta, s))

        panels = max(1, math.ceil(r * float(np.max(eta, initial=0.0)) / 40.0))
        val = integrate(fn, 0.0, r, _RADIAL_RULE, left_power=2 * lam + 1, min_panels=panels)
        return val / self._radial_mass

    def _axis_multiplier(self, k, eta):
        r = self.support_radius
        eta = np.asarray(eta, dtype=float)

        def fn(s):
            return _bump(s / r)[None, :] * normalized_bessel(k - 0.5, np.multiply.outer(eta, s))

        panels = max(1, math.ceil(r * float(np.max(eta, initial=0.0)) / 40.0))
        val = integrate(fn, 0.0, r, _RADIAL_RULE, left_power=2 * k, min_panels=panels)
        mass = integrate(lambda s: _bump(s / r), 0.0, r, _RADIAL_RULE, left_power=2 * k)
        return val / mass

    @cached_property
    def _table(self):
        # tabulate on [0, eta_max] where the envelope first stays below cutoff
        step = 0.25 / self.support_radius
        top = 16.0 / self.support_radius
        while True:
            eta = np.arange(0.0, top + step / 2, step * 0.2)
            if self.profile == "radial":
                vals = self._radial_multiplier(eta)
            else:
                # the slowest single axis sets the truncation
                per_axis = [self._axis_multiplier(k, eta) for k in self.pk.ks]
                vals = per_axis[int(np.argmax([np.abs(v[-1]) for v in per_axis]))]
            env = np.maximum.accumulate(np.abs(vals)[::-1])[::-1]
            below = np.nonzero(env < self.cutoff)[0]
            if below.size:
                stop = int(below[0])
                return eta[: stop + 1], vals[: stop + 1]
            if top > 1e4:
                raise DomainError("multiplier does not decay below the cutoff")
            top *= 2.0

    @property
    def eta_max(self) -> float:
        """|eta| beyond which the multiplier is treated as zero."""
        return float(self._table[0][-1])

    @cached_property
    def _spline(self):
        eta, vals = self._table
        return CubicSpline(eta, vals)

    def multiplier(self, eta) -> np.ndarray:
        """m(eta) = c * Dh(eta) for the radial profile (eta = |xi|, undilated)."""
        if self.profile != "radial":
            raise DomainError("the tensor profile has a per-axis multiplier")
        eta = np.abs(np.asarray(eta, dtype=float))
        return np.where(eta <= self.eta_max, self._spline(np.minimum(eta, self.eta_max)), 0.0)

    def axis_multiplier(self, j: int, eta) -> np.ndarray:
        """Per-axis factor of the tensor-profile multiplier."""
        eta = np.abs(np.asarray(eta, dtype=float))
        return self._axis_multiplier(self.pk.ks[j], eta)


def _sphere_weight_integral(ks) -> float:
    # int_{S^{N-1}} prod |theta_j|^(2k_j) dtheta = 2 prod Gamma(k_j+1/2) / Gamma(sum(k_j+1/2))
    return 2.0 * math.exp(sum(math.lgamma(k + 0.5) for k in ks) - math.lgamma(sum(k + 0.5 for k in ks)))


# -- probe ---------------------------------------------------------------------------


@dataclass
class ProbeResult:
    """gamma_eps on a tensor z-grid together with its mass split."""

    z1: np.ndarray
    z2: np.ndarray
    values: np.ndarray
    x: tuple[float, float]
    y: tuple[float, float]
    ks: tuple[float, float]
    eps: float
    mass_inside: float
    mass_outside: float
    signed_mass: float
    region_vertices: list
    xi_nodes: tuple[int, int] = (0, 0)
    region_mask: np.ndarray | None = field(default=None, repr=False)

    @property
    def outside_fraction(self) -> float:
        return self.mass_outside / (self.mass_inside + self.mass_outside)

    def to_csv(self, target=None) -> str | None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["z1", "z2", "gamma_eps"])
        for i, a in enumerate(self.z1):
            for j, b in enumerate(self.z2):
                writer.writerow([repr(float(a)), repr(float(b)), repr(float(self.values[i, j]))])
        if target is None:
            return buf.getvalue()
        Path(target).write_text(buf.getvalue())
        return None

    def sidecar(self) -> dict:
        return {
            "schema_version": "1",
            "x": list(self.x),
            "y": list(self.y),
            "k": list(self.ks),
            "eps": self.eps,
            "mass_inside": self.mass_inside,
            "mass_outside": self.mass_outside,
            "outside_fraction": self.outside_fraction,
            "signed_mass": self.signed_mass,
            "xi_nodes": list(self.xi_nodes),
            "region_vertices": self.region_vertices,
        }

    def sidecar_json(self) -> str:
        return json.dumps(self.sidecar(), indent=2)


def _axis_factor(k, x, y, xi, z):
    # even part in xi of E(i xi, x) E(i xi, y) E(-i xi, z); shape (len(xi), len(z))
    def parts(t):
        t = np.asarray(t, dtype=float)
        e = normalized_bessel(k - 0.5, t)
        o = t / (2.0 * k + 1.0) * normalized_bessel(k + 0.5, t)
        return e, o

    ex, ox = parts(xi * x)
    ey, oy = parts(xi * y)
    ez, oz = parts(np.multiply.outer(xi, z))
    a = ex * ey - ox * oy
    b = ox * ey + ex * oy
    return a[:, None] * ez + b[:, None] * oz


def _region_vertices(x, y) -> list:
    # the region is a union of axis-parallel rectangles, one per sign quadrant
    lo = [abs(abs(x[j]) - abs(y[j])) for j in range(2)]
    hi = [abs(x[j]) + abs(y[j]) for j in range(2)]
    rects = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            xs = sorted((s1 * lo[0], s1 * hi[0]))
            ys = sorted((s2 * lo[1], s2 * hi[1]))
            rects.append([[xs[0], ys[0]], [xs[1], ys[0]], [xs[1], ys[1]], [xs[0], ys[1]]])
    return rects


def gamma_eps_probe(pk, spec: MollifierSpec, x, y, z_grid, phase_per_panel: float = 60.0,
                    nodes_per_panel: int = 64) -> ProbeResult:
    """Evaluate gamma_eps(x, y, .) on a tensor grid and split its |mass| by the support region.

    ``z_grid`` is a pair of 1D grid specs.  The xi-integral is truncated at
    |xi| = eta_max / eps where the multiplier has decayed below
    ``spec.cutoff``; each axis uses composite Gauss-Legendre panels covering
    at most ``phase_per_panel`` radians of the fastest oscillation.  The mass
    counted as inside lies within eps |u| plus one grid cell of
    the refined support region computed by the root-system predicate.
    """
    pk = _coerce(pk)
    if pk.dimension != 2:
        raise DomainError("the probe is implemented for N = 2")
    if any(k <= 0 for k in pk.ks):
        raise DomainError("the probe needs k_j > 0")
    x = tuple(float(v) for v in x)
    y = tuple(float(v) for v in y)
    g1, g2 = (Grid1D.coerce(g) for g in z_grid)
    z1, z2 = g1.nodes, g2.nodes
    eps = spec.eps
    L = spec.eta_max / eps
    c = pk.transform_constant

    factors, weights, nodes = [], [], []
    for j, (k, zj) in enumerate(zip(pk.ks, (z1, z2))):
        freq = abs(x[j]) + abs(y[j]) + float(np.max(np.abs(zj)))
        panels = max(1, math.ceil(L * freq / phase_per_panel))
        xi, w = composite_rule(0.0, L, panels, nodes_per_panel, left_power=2.0 * k)
        factors.append(_axis_factor(k, x[j], y[j], xi, zj))
        weights.append(w)
        nodes.append(xi)

    left = factors[0] * weights[0][:, None]
    right = factors[1] * weights[1][:, None]
    if spec.profile == "tensor":
        m1 = spec.axis_multiplier(0, eps * nodes[0])
        m2 = spec.axis_multiplier(1, eps * nodes[1])
        # separable multiplier: the xi-integral is a product of 1D integrals
        values = np.outer(m1 @ left, m2 @ right)
    else:
        values = np.zeros((len(z1), len(z2)))
        block = max(1, int(4e6 // len(nodes[1])))
        for start in range(0, len(nodes[0]), block):
            sl = slice(start, start + block)
            eta = eps * np.hypot(nodes[0][sl, None], nodes[1][None, :])
            values += left[sl].T @ (spec.multiplier(eta) @ right)
    values *= 4.0 / c**2

    area = g1.step * g2.step
    wz = pk.weight(np.stack(np.meshgrid(z1, z2, indexing="ij"), axis=-1))
    cell_mass = np.abs(values) * wz * area
    region = region_indicator(x, y, z1, z2, "A1xA1")
    dist = ndimage.distance_transform_edt(~region, sampling=(g1.step, g2.step))
    inside = dist <= eps * float(np.linalg.norm(spec.u)) + math.hypot(g1.step, g2.step)
    return ProbeResult(
        z1=z1, z2=z2, values=values, x=x, y=y, ks=pk.ks, eps=eps,
        mass_inside=float(cell_mass[inside].sum()),
        mass_outside=float(cell_mass[~inside].sum()),
        signed_mass=float((values * wz).sum() * area),
        region_vertices=_region_vertices(x, y),
        xi_nodes=(len(nodes[0]), len(nodes[1])),
        region_mask=region,
    )
