"""Finite reflection groups, chambers, dominance and orbit convex geometry.

A root system is stored as an array of roots in R^N.  The positive roots are
those on which the functional (1, 1/pi, 1/pi^2, ...) is positive, the simple
roots are the extremal rays of the cone they span, and the group is the
closure of the simple reflections under composition.

For a spectral parameter Lam the toolkit works with

* the orbit hull C^Lam = co(G.Lam),
* the polar set C_Lam = {p : <p, g.Lam> <= 1 for all g},
* the gauge chi_Lam, the Minkowski functional of C^Lam.

Membership in C^Lam and C_Lam is decided in the closed positive chamber, where
both reduce to a single comparison with the dominant representative; the
orbit-wide formulations are kept as independent checks.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog, nnls

from .errors import DomainError, UnsupportedOperation

__all__ = [
    "GroupElement",
    "RootSystem",
    "root_system",
    "generate_group",
    "dominant_rep",
    "longest_element",
    "dominance_leq",
    "orbit",
    "orbit_hull_contains",
    "orbit_hull_contains_lp",
    "polar_contains",
    "is_admissible",
    "gauge",
    "polar_gauge",
    "support_function",
    "polar_support_lp",
    "support_shell_contains",
    "support_region_contains",
    "GROUP_LIMIT",
]

#: Closure beyond this many elements means the input is not a finite reflection group.
GROUP_LIMIT = 10_000
MATRIX_TOL = 1e-9
CONE_TOL = 1e-9
_KEY_SCALE = 1e6


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Orthogonal matrix together with a word in the simple reflections."""

    matrix: np.ndarray
    word: tuple[int, ...] = ()

    def __call__(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix @ other.matrix, self.word + other.word)

    def close_to(self, other: "GroupElement", tol: float = MATRIX_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= tol)

    def is_identity(self, tol: float = MATRIX_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - np.eye(len(self.matrix)))) <= tol)

    def order(self) -> int:
        g = self
        for n in range(1, GROUP_LIMIT + 1):
            if g.is_identity():
                return n
            g = g @ self
        raise DomainError("element of infinite order")


def reflection_matrix(alpha) -> np.ndarray:
    """Matrix of x -> x - 2 <alpha, x> / |alpha|^2 alpha."""
    alpha = np.asarray(alpha, dtype=float)
    return np.eye(len(alpha)) - 2.0 * np.outer(alpha, alpha) / (alpha @ alpha)


def _matrix_key(m: np.ndarray) -> tuple:
    return tuple(np.rint(m.reshape(-1) * _KEY_SCALE).astype(np.int64))


def _contains_vector(rows: np.ndarray, v: np.ndarray, tol: float) -> bool:
    return bool(np.any(np.max(np.abs(rows - v), axis=1) <= tol))


class RootSystem:
    """Reduced root system with positive and simple roots and its reflection group.

    Args:
        roots: array of shape (m, N); must be closed under negation and under
            every reflection, with no root a positive multiple of another.
        multiplicities: one value k >= 0 per root, constant on group orbits;
            defaults to 1.
        name: label used in reports.
    """

    def __init__(self, roots, multiplicities=None, name: str | None = None):
        roots = np.atleast_2d(np.asarray(roots, dtype=float))
        if roots.size == 0 or np.any(np.linalg.norm(roots, axis=1) == 0):
            raise DomainError("roots must be nonzero vectors")
        self.roots = roots
        self.dimension = roots.shape[1]
        self.name = name or "custom"
        scale = float(np.max(np.abs(roots)))
        tol = 1e-9 * max(1.0, scale)
        for r in roots:
            if not _contains_vector(roots, -r, tol):
                raise DomainError("root set is not closed under negation")
            unit = r / np.linalg.norm(r)
            same_dir = roots @ unit / np.linalg.norm(roots, axis=1)
            if np.sum(same_dir > 1 - 1e-12) > 1:
                raise DomainError("root system is not reduced")
            images = roots @ reflection_matrix(r).T
            if not all(_contains_vector(roots, im, tol) for im in images):
                raise DomainError("reflections do not permute the roots")
        functional = np.array([math.pi ** -j for j in range(self.dimension)])
        values = roots @ functional
        if np.any(np.abs(values) < 1e-12):
            raise DomainError("a root is orthogonal to the positivity functional")
        self.positive_roots = roots[values > 0]
        self.simple_roots = self._extremal(self.positive_roots)
        if multiplicities is None:
            multiplicities = np.ones(len(roots))
        self.multiplicities = np.asarray(multiplicities, dtype=float).reshape(-1)
        if self.multiplicities.shape != (len(roots),) or np.any(self.multiplicities < 0):
            raise DomainError("need one nonnegative multiplicity per root")
        self._check_invariant_multiplicities(tol)

    @staticmethod
    def _extremal(pos: np.ndarray) -> np.ndarray:
        # a positive root is simple iff it is not in the cone of the others
        simple = []
        for i, r in enumerate(pos):
            others = np.delete(pos, i, axis=0)
            if len(others) == 0:
                simple.append(r)
                continue
            _, resid = nnls(others.T, r)
            if resid > 1e-9 * np.linalg.norm(r):
                simple.append(r)
        return np.array(simple)

    def _check_invariant_multiplicities(self, tol: float):
        for r in self.roots:
            s = reflection_matrix(r)
            for j, beta in enumerate(self.roots):
                img = s @ beta
                idx = int(np.argmin(np.max(np.abs(self.roots - img), axis=1)))
                if abs(self.multiplicities[idx] - self.multiplicities[j]) > 1e-12:
                    raise DomainError("multiplicities are not invariant under the group")

    def multiplicity(self, alpha) -> float:
        idx = int(np.argmin(np.max(np.abs(self.roots - np.asarray(alpha, float)), axis=1)))
        return float(self.multiplicities[idx])

    @cached_property
    def crystallographic(self) -> bool:
        """True when every Cartan number 2<a,b>/<b,b> is an integer."""
        gram = self.roots @ self.roots.T
        cartan = 2.0 * gram / np.diag(gram)[None, :]
        return bool(np.all(np.abs(cartan - np.rint(cartan)) < 1e-9))

    @cached_property
    def group(self) -> list[GroupElement]:
        return generate_group(self)

    @property
    def order(self) -> int:
        return len(self.group)

    @cached_property
    def spans(self) -> bool:
        return bool(np.linalg.matrix_rank(self.roots, tol=1e-9) == self.dimension)

    def simple_reflections(self) -> list[GroupElement]:
        return [GroupElement(reflection_matrix(a), (i,)) for i, a in enumerate(self.simple_roots)]

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "roots": self.roots.tolist(),
                           "k": self.multiplicities.tolist()})

    def __repr__(self) -> str:
        return f"RootSystem({self.name!r}, N={self.dimension}, roots={len(self.roots)})"


# -- named systems ---------------------------------------------------------------


def _dihedral(m: int, long_ratio: float = 1.0) -> np.ndarray:
    # 2m roots; for even m the two orbits may have different lengths
    roots = []
    for j in range(2 * m):
        ang = math.pi * j / m
        length = long_ratio if (m % 2 == 0 and j % 2 == 1) else 1.0
        roots.append((length * math.cos(ang), length * math.sin(ang)))
    return np.array(roots)


def _product_roots(n: int) -> np.ndarray:
    eye = np.eye(n)
    return np.concatenate([eye, -eye])


def root_system(spec, multiplicities=None) -> RootSystem:
    """Build a root system from a name or an explicit description.

    Names: ``A1``, ``A1xA1``, ``Z2^n``, ``A2``, ``B2``, ``G2``, ``I2(m)``.
    A dict or JSON string ``{"roots": [[...], ...], "k": [...]}`` gives the
    roots explicitly.
    """
    if isinstance(spec, RootSystem):
        return spec
    if isinstance(spec, dict):
        return RootSystem(spec["roots"], spec.get("k", multiplicities), spec.get("name"))
    text = str(spec).strip()
    if text.startswith("{"):
        return root_system(json.loads(text), multiplicities)
    name = text.upper().replace(" ", "")
    if name == "A1":
        roots = np.array([[1.0], [-1.0]])
    elif name == "A1XA1":
        roots = _product_roots(2)
    elif re.fullmatch(r"Z2\^\d+", name):
        roots = _product_roots(int(name.split("^")[1]))
    elif name == "A2":
        roots = _dihedral(3)
    elif name == "B2":
        roots = np.array([[1, 0], [-1, 0], [0, 1], [0, -1],
                          [1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)
    elif name == "G2":
        roots = _dihedral(6, math.sqrt(3.0))
    elif re.fullmatch(r"I2\(\d+\)", name):
        roots = _dihedral(int(name[3:-1]))
    else:
        raise DomainError(f"unknown root system {spec!r}")
    return RootSystem(roots, multiplicities, text)


# -- group -----------------------------------------------------------------------


def generate_group(rs: RootSystem, limit: int = GROUP_LIMIT) -> list[GroupElement]:
    """Closure of the simple reflections under composition (breadth first).

    Raises:
        DomainError: more than ``limit`` distinct elements.
    """
    n = rs.dimension
    identity = GroupElement(np.eye(n), ())
    gens = rs.simple_reflections()
    seen = {_matrix_key(identity.matrix): identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = s @ g
                key = _matrix_key(h.matrix)
                if key in seen:
                    continue
                seen[key] = h
                nxt.append(h)
                if len(seen) > limit:
                    raise DomainError(f"group closure exceeded {limit} elements")
        frontier = nxt
    return list(seen.values())


def orbit(rs: RootSystem, v) -> np.ndarray:
    """Distinct points of G.v (tolerance 1e-9)."""
    pts = np.array([g(v) for g in rs.group])
    out = []
    for p in pts:
        if not out or not _contains_vector(np.array(out), p, 1e-9 * max(1.0, np.max(np.abs(p)))):
            out.append(p)
    return np.array(out)


def dominant_rep(rs: RootSystem, x) -> tuple[np.ndarray, GroupElement]:
    """Return (x_plus, g) with x_plus in the closed positive chamber and g(x) = x_plus."""
    x = np.asarray(x, dtype=float).copy()
    g = GroupElement(np.eye(rs.dimension), ())
    refl = rs.simple_reflections()
    tol = 1e-14 * max(1.0, float(np.max(np.abs(x))))
    for _ in range(GROUP_LIMIT):
        pairing = rs.simple_roots @ x
        i = int(np.argmin(pairing))
        if pairing[i] >= -tol:
            return x, g
        x = refl[i](x)
        g = refl[i] @ g
    raise DomainError("no dominant representative found")


def is_dominant(rs: RootSystem, x, tol: float = CONE_TOL) -> bool:
    return bool(np.all(rs.simple_roots @ np.asarray(x, dtype=float) >= -tol))


def longest_element(rs: RootSystem) -> GroupElement:
    """The element sending the positive chamber to its negative."""
    v = rs.positive_roots.sum(axis=0)
    for g in rs.group:
        if np.all(rs.simple_roots @ g(v) < 0):
            return g
    raise DomainError("no longest element found")


def dominance_leq(rs: RootSystem, a, b, tol: float = CONE_TOL) -> bool:
    """True iff b - a lies in the closed cone spanned by the positive roots."""
    diff = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    basis = rs.simple_roots.T
    scale = max(1.0, float(np.max(np.abs(diff))))
    if basis.shape[0] == basis.shape[1]:
        coef = np.linalg.solve(basis, diff)
        return bool(np.all(coef >= -tol * scale))
    # simple roots do not form a basis of R^N: feasibility by nonnegative least squares
    _, resid = nnls(basis, diff)
    return bool(resid <= tol * scale)


# -- hulls, polars, gauges -------------------------------------------------------


def orbit_hull_contains(rs: RootSystem, lam, p, tol: float = CONE_TOL) -> bool:
    """p in co(G.lam), decided as p_plus <= lam_plus in the dominance order."""
    p_plus, _ = dominant_rep(rs, p)
    lam_plus, _ = dominant_rep(rs, lam)
    return dominance_leq(rs, p_plus, lam_plus, tol)


def orbit_hull_contains_lp(rs: RootSystem, lam, p, tol: float = CONE_TOL) -> bool:
    """p in co(G.lam) by a linear feasibility problem over the orbit points."""
    pts = orbit(rs, lam)
    m = len(pts)
    a_eq = np.vstack([pts.T, np.ones((1, m))])
    b_eq = np.concatenate([np.asarray(p, dtype=float), [1.0]])
    # minimize the l1 residual of the convex combination
    n_eq = len(b_eq)
    c = np.concatenate([np.zeros(m), np.ones(2 * n_eq)])
    a = np.hstack([a_eq, np.eye(n_eq), -np.eye(n_eq)])
    res = linprog(c, A_eq=a, b_eq=b_eq, bounds=[(0, None)] * (m + 2 * n_eq), method="highs")
    return bool(res.status == 0 and res.fun <= tol * max(1.0, float(np.max(np.abs(b_eq)))))


def polar_contains(rs: RootSystem, lam, p, form: str = "chamber", tol: float = CONE_TOL) -> bool:
    """p in C_lam.

    ``form="orbit"`` tests <p, g.lam> <= 1 over the whole orbit;
    ``form="chamber"`` tests <lam_plus, p_plus> <= 1.
    """
    p = np.asarray(p, dtype=float)
    if form == "orbit":
        return bool(np.max(orbit(rs, lam) @ p) <= 1.0 + tol)
    if form != "chamber":
        raise DomainError(f"unknown form {form!r}")
    p_plus, _ = dominant_rep(rs, p)
    lam_plus, _ = dominant_rep(rs, lam)
    return bool(lam_plus @ p_plus <= 1.0 + tol)


def is_admissible(rs: RootSystem, lam) -> bool:
    """True iff the orbit of lam spans R^N."""
    return bool(np.linalg.matrix_rank(orbit(rs, lam), tol=1e-9) == rs.dimension)


def _bisect(contains, xi, tol: float) -> float:
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        return 0.0
    hi = 1.0
    while not contains(xi / hi):
        hi *= 2.0
    lo = 0.0 if hi == 1.0 else hi / 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid > 0 and contains(xi / mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def gauge(rs: RootSystem, lam, xi, tol: float = 1e-10) -> float:
    """chi_lam(xi) = min{r >= 0 : xi in r C^lam}, by bisection on hull membership.

    Raises:
        DomainError: lam is not admissible (C^lam is not a neighborhood of 0).
    """
    if not is_admissible(rs, lam):
        raise DomainError("the gauge needs an admissible spectral parameter")
    return _bisect(lambda q: orbit_hull_contains(rs, lam, q, tol=0.0), xi, tol)


def polar_gauge(rs: RootSystem, lam, xi, tol: float = 1e-10) -> float:
    """Minkowski functional of the polar set C_lam, by bisection on polar membership.

    By polar duality this equals the support function of C^lam.
    """
    if not is_admissible(rs, lam):
        raise DomainError("C_lam is unbounded for a non-admissible parameter")
    return _bisect(lambda q: polar_contains(rs, lam, q, tol=0.0), xi, tol)


def support_function(rs: RootSystem, lam, v) -> float:
    """max over g of <g.lam, v>: the support function of C^lam."""
    return float(np.max(orbit(rs, lam) @ np.asarray(v, dtype=float)))


def polar_support_lp(rs: RootSystem, lam, xi) -> float:
    """max of <x, xi> over x in C_lam, by linear programming."""
    pts = orbit(rs, lam)
    n = rs.dimension
    res = linprog(-np.asarray(xi, dtype=float), A_ub=pts, b_ub=np.ones(len(pts)),
                  bounds=[(None, None)] * n, method="highs")
    if res.status != 0:
        raise DomainError("linear program failed (unbounded polar set?)")
    return float(-res.fun)


# -- support predicates --------------------------------------------------------


def support_shell_contains(x, y, z, tol: float = 1e-9) -> bool:
    """| |x| - |y| | <= |z| <= |x| + |y|."""
    nx, ny, nz = (float(np.linalg.norm(np.atleast_1d(np.asarray(v, dtype=float)))) for v in (x, y, z))
    return abs(nx - ny) - tol <= nz <= nx + ny + tol


def support_region_contains(rs: RootSystem, x, y, z, tol: float = CONE_TOL) -> bool:
    """The refined support region of the translation of a point mass.

    True iff z_plus <= x_plus + y_plus, y_plus + g0.x_plus <= z_plus and
    x_plus + g0.y_plus <= z_plus in the dominance order.

    Raises:
        UnsupportedOperation: the group is not crystallographic.
    """
    if not rs.crystallographic:
        raise UnsupportedOperation("the refined support region needs a crystallographic group")
    g0 = longest_element(rs)
    xp, _ = dominant_rep(rs, x)
    yp, _ = dominant_rep(rs, y)
    zp, _ = dominant_rep(rs, z)
    return (dominance_leq(rs, zp, xp + yp, tol)
            and dominance_leq(rs, yp + g0(xp), zp, tol)
            and dominance_leq(rs, xp + g0(yp), zp, tol))
