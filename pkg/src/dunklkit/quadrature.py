"""Quadrature rules shared by every integral in the toolkit.

Two schemes are provided:

* composite Gauss-Legendre panels, refined by doubling the panel count.  An
  algebraic endpoint factor ``(x - a)**p`` can be absorbed exactly by a
  Gauss-Jacobi rule on the first panel, and panels can be graded
  geometrically toward ``a`` for integrands with a near-singularity there;
* tanh-sinh (double exponential), refined by halving the step, for
  integrands with endpoint singularities of unknown strength.

Integrands are vectorized: ``fn(nodes)`` returns an array whose last axis runs
over the nodes, so a whole family of integrals (one per spectral node, say) is
computed in one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError, QuadratureError

__all__ = [
    "QuadratureRule",
    "composite_rule",
    "integrate",
    "tanh_sinh",
]

_SCHEMES = ("gauss-legendre", "tanh-sinh")


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature scheme plus refinement and tolerance settings.

    ``panels`` is the starting panel count for Gauss-Legendre refinement; it is
    doubled until two successive estimates agree to
    ``max(abs_tol, rel_tol * |estimate|)``.
    """

    scheme: str = "gauss-legendre"
    panels: int = 1
    abs_tol: float = 1e-15
    rel_tol: float = 1e-11
    nodes_per_panel: int = 64
    max_panels: int = 8192
    max_level: int = 12

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")
        if self.panels < 1 or self.nodes_per_panel < 2:
            raise DomainError("panel count and nodes per panel must be positive")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")

    def with_tolerances(self, abs_tol=None, rel_tol=None) -> "QuadratureRule":
        return QuadratureRule(
            scheme=self.scheme,
            panels=self.panels,
            abs_tol=self.abs_tol if abs_tol is None else abs_tol,
            rel_tol=self.rel_tol if rel_tol is None else rel_tol,
            nodes_per_panel=self.nodes_per_panel,
            max_panels=self.max_panels,
            max_level=self.max_level,
        )


@lru_cache(maxsize=64)
def _jacobi(n: int, power: float):
    """Nodes/weights on [0, 1] for the weight t**power."""
    if power == 0.0:
        t, w = special.roots_legendre(n)
    else:
        t, w = special.roots_jacobi(n, 0.0, power)
    # (1 + t)**p on [-1, 1]  ->  (2 s)**p on [0, 1]
    return (t + 1.0) / 2.0, w / 2.0 ** (power + 1.0)


def _panel_edges(a: float, b: float, panels: int, graded: bool) -> np.ndarray:
    if not graded:
        return np.linspace(a, b, panels + 1)
    levels = panels
    sub = max(1, panels // 8)
    geo = np.concatenate(([0.0], 2.0 ** -np.arange(levels - 1, -1, -1.0)))
    edges = [geo[0]]
    for lo, hi in zip(geo[:-1], geo[1:]):
        edges.extend(np.linspace(lo, hi, sub + 1)[1:])
    return a + (b - a) * np.asarray(edges)


def composite_rule(a: float, b: float, panels: int, n: int = 64, left_power: float = 0.0,
                   graded: bool = False):
    """Composite rule on [a, b] whose weights include ``(x - a)**left_power``.

    The first panel uses Gauss-Jacobi so the power is integrated exactly; the
    remaining panels use Gauss-Legendre with the power folded into the weights.
    """
    if left_power <= -1.0:
        raise DomainError("endpoint power must exceed -1")
    edges = _panel_edges(a, b, panels, graded)
    t_leg, w_leg = _jacobi(n, 0.0)
    nodes, weights = [], []
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        h = hi - lo
        if i == 0 and left_power != 0.0:
            t, w = _jacobi(n, float(left_power))
            nodes.append(lo + h * t)
            weights.append(w * h ** (left_power + 1.0))
        else:
            x = lo + h * t_leg
            wx = w_leg * h
            if left_power != 0.0:
                wx = wx * (x - a) ** left_power
            nodes.append(x)
            weights.append(wx)
    return np.concatenate(nodes), np.concatenate(weights)


def _converged(new, old, rule: QuadratureRule) -> bool:
    diff = np.max(np.abs(np.asarray(new) - np.asarray(old)))
    scale = np.max(np.abs(new))
    return bool(diff <= max(rule.abs_tol, rule.rel_tol * scale))


def integrate(fn, a: float, b: float, rule: QuadratureRule | None = None, *,
              left_power: float = 0.0, graded: bool = False, min_panels: int | None = None,
              full_output: bool = False):
    """Integrate ``fn(x) * (x - a)**left_power`` over [a, b].

    ``fn`` must accept a 1D node array and return values with the nodes on the
    last axis.  Panels are doubled until successive results agree; with
    ``full_output`` the return value is ``(integral, error_estimate, panels)``.

    Raises:
        QuadratureError: tolerance not met within ``rule.max_panels``.
    """
    rule = rule or QuadratureRule()
    if rule.scheme == "tanh-sinh" and left_power == 0.0 and not graded:
        return tanh_sinh(lambda x, dl, dr: fn(x), a, b, rule, full_output=full_output)
    if a == b:
        zero = np.zeros(np.shape(fn(np.array([a])))[:-1])
        out = zero if zero.ndim else 0.0
        return (out, 0.0, 0) if full_output else out
    panels = max(rule.panels, min_panels or 1)
    prev = None
    while panels <= rule.max_panels:
        x, w = composite_rule(a, b, panels, rule.nodes_per_panel, left_power, graded)
        val = np.asarray(fn(x)) @ w
        if prev is not None and _converged(val, prev, rule):
            err = float(np.max(np.abs(val - prev)))
            out = val if np.ndim(val) else float(val)
            return (out, err, panels) if full_output else out
        prev = val
        panels *= 2
    raise QuadratureError(
        f"no convergence on [{a}, {b}] within {rule.max_panels} panels "
        "(grid too coarse or integrand not resolved)"
    )


@lru_cache(maxsize=32)
def _tanh_sinh_table(level: int, t_max: float = 4.5):
    h = 2.0 ** -level
    t = np.arange(-math.ceil(t_max / h), math.ceil(t_max / h) + 1) * h
    u = 0.5 * math.pi * np.sinh(t)
    left = special.expit(2.0 * u)  # position in (0, 1)
    right = special.expit(-2.0 * u)  # 1 - position, without cancellation
    dxdt = 2.0 * left * right * 0.5 * math.pi * np.cosh(t)
    keep = (left > 0) & (right > 0) & (dxdt > 0)
    return left[keep], right[keep], h * dxdt[keep]


def tanh_sinh(fn, a: float, b: float, rule: QuadratureRule | None = None, *,
              full_output: bool = False):
    """Double-exponential quadrature of ``fn`` over [a, b].

    ``fn(x, dl, dr)`` receives the nodes together with their distances to the
    left and right endpoints, computed without cancellation so integrands with
    endpoint singularities can be evaluated accurately.
    """
    rule = rule or QuadratureRule(scheme="tanh-sinh")
    span = b - a
    prev = None
    for level in range(2, rule.max_level + 1):
        s_left, s_right, w = _tanh_sinh_table(level)
        dl = span * s_left
        dr = span * s_right
        x = np.where(s_left <= 0.5, a + dl, b - dr)
        val = np.asarray(fn(x, dl, dr)) @ (span * w)
        if prev is not None and _converged(val, prev, rule):
            err = float(np.max(np.abs(val - prev)))
            out = val if np.ndim(val) else float(val)
            return (out, err, level) if full_output else out
        prev = val
    raise QuadratureError(f"tanh-sinh did not converge on [{a}, {b}]")
