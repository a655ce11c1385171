"""Domains, defining functions, and boundary distance.

Three geometries are supported: a 1-D interval, a 2-D disk, and a 2-D
half-strip whose lower face ``x2 = 0`` is the degenerate boundary.  Each
carries a canonical defining function rho that vanishes on the degenerate
boundary with unit gradient there and is comparable to the boundary
distance in the interior.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy as sp

__all__ = [
    "Domain",
    "DefiningFunction",
    "BoundaryPoint",
    "DomainError",
    "make_defining_function",
    "boundary_distance",
    "check_defining_function",
]


class DomainError(ValueError):
    """Raised for invalid domains or points outside a domain."""


@dataclass(frozen=True)
class Domain:
    """A bounded domain with a distinguished degenerate boundary.

    kind is one of "interval", "disk", "half_strip".  For the half-strip
    only the lower face ``x2 = 0`` degenerates; the side and top faces are
    artificial and carry data from a known reference solution.
    """

    kind: str
    params: tuple
    n: int

    @staticmethod
    def interval(a: float, b: float) -> "Domain":
        if not a < b:
            raise DomainError(f"interval requires a < b, got ({a}, {b})")
        return Domain("interval", (float(a), float(b)), 1)

    @staticmethod
    def disk(radius: float, center=(0.0, 0.0)) -> "Domain":
        if radius <= 0:
            raise DomainError(f"disk requires radius > 0, got {radius}")
        return Domain("disk", (float(radius), (float(center[0]), float(center[1]))), 2)

    @staticmethod
    def half_strip(r: float) -> "Domain":
        if r <= 0:
            raise DomainError(f"half_strip requires r > 0, got {r}")
        return Domain("half_strip", (float(r),), 2)

    def contains(self, x, strict: bool = False) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == "interval":
            a, b = self.params
            return bool(a < x[0] < b) if strict else bool(a <= x[0] <= b)
        if self.kind == "disk":
            R, c = self.params
            r = float(np.hypot(x[0] - c[0], x[1] - c[1]))
            return r < R if strict else r <= R
        r = self.params[0]
        inside = (abs(x[0]) <= r) and (0.0 <= x[1] <= r)
        if strict:
            inside = (abs(x[0]) < r) and (0.0 < x[1] < r)
        return bool(inside)

    def boundary_points(self, count: int) -> list["BoundaryPoint"]:
        """Sample the degenerate boundary; normals point inward."""
        if count < 1:
            raise DomainError("need at least one boundary sample")
        pts = []
        if self.kind == "interval":
            a, b = self.params
            pts.append(BoundaryPoint(np.array([a]), np.array([1.0])))
            if count > 1:
                pts.append(BoundaryPoint(np.array([b]), np.array([-1.0])))
        elif self.kind == "disk":
            R, c = self.params
            for theta in np.linspace(0.0, 2 * np.pi, count, endpoint=False):
                d = np.array([np.cos(theta), np.sin(theta)])
                pts.append(BoundaryPoint(np.array(c) + R * d, -d))
        else:
            r = self.params[0]
            # open face: exclude the corners shared with the artificial sides
            for x1 in np.linspace(-r, r, count + 2)[1:-1]:
                pts.append(BoundaryPoint(np.array([x1, 0.0]), np.array([0.0, 1.0])))
        return pts

    def interior_samples(self, count: int, rng=None) -> np.ndarray:
        rng = np.random.default_rng(rng)
        if self.kind == "interval":
            a, b = self.params
            return (a + (b - a) * rng.random((count, 1)))
        if self.kind == "disk":
            R, c = self.params
            # polar sampling; uniform in radius is fine for checks
            rr = R * rng.random(count)
            th = 2 * np.pi * rng.random(count)
            return np.column_stack([c[0] + rr * np.cos(th), c[1] + rr * np.sin(th)])
        r = self.params[0]
        return np.column_stack([(2 * rng.random(count) - 1) * r, rng.random(count) * r])


@dataclass(frozen=True)
class BoundaryPoint:
    """A point on the degenerate boundary with its inward unit normal."""

    x: np.ndarray
    normal: np.ndarray


@dataclass(frozen=True)
class DefiningFunction:
    """Canonical defining function rho with exact symbolic derivatives."""

    domain: Domain
    expr: sp.Expr
    symbols: tuple
    c_rho: float
    _value: object = field(repr=False, compare=False, default=None)
    _grad: tuple = field(repr=False, compare=False, default=None)
    _hess: tuple = field(repr=False, compare=False, default=None)

    def __call__(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(self._value(*x))

    def gradient(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([g(*x) for g in self._grad], dtype=float)

    def hessian(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n = self.domain.n
        return np.array([[self._hess[i][j](*x) for j in range(n)] for i in range(n)], dtype=float)

    def laplacian(self, x) -> float:
        return float(np.trace(self.hessian(x)))


def _lambdify(expr, symbols):
    return sp.lambdify(symbols, expr, modules="numpy")


def make_defining_function(domain: Domain) -> DefiningFunction:
    """Canonical rho for each geometry; |grad rho| = 1 on the degenerate boundary."""
    if domain.kind == "interval":
        a, b = domain.params
        x1 = sp.Symbol("x1")
        syms = (x1,)
        expr = (x1 - a) * (b - x1) / (b - a)
        c_rho = 2.0  # rho/d ranges over [1/2, 1]
    elif domain.kind == "disk":
        R, c = domain.params
        x1, x2 = sp.symbols("x1 x2")
        syms = (x1, x2)
        expr = (R**2 - (x1 - c[0]) ** 2 - (x2 - c[1]) ** 2) / (2 * R)
        c_rho = 2.0
    else:
        x1, x2 = sp.symbols("x1 x2")
        syms = (x1, x2)
        expr = x2
        c_rho = 1.0
    grad = tuple(_lambdify(sp.diff(expr, s), syms) for s in syms)
    hess = tuple(
        tuple(_lambdify(sp.diff(expr, si, sj), syms) for sj in syms) for si in syms
    )
    return DefiningFunction(domain, expr, syms, c_rho, _lambdify(expr, syms), grad, hess)


def boundary_distance(domain: Domain, x) -> float:
    """Euclidean distance from an interior point to the degenerate boundary."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not domain.contains(x):
        raise DomainError(f"point {x} outside {domain.kind} domain")
    if domain.kind == "interval":
        a, b = domain.params
        return float(min(x[0] - a, b - x[0]))
    if domain.kind == "disk":
        R, c = domain.params
        return float(R - np.hypot(x[0] - c[0], x[1] - c[1]))
    return float(x[1])


def check_defining_function(rho: DefiningFunction, domain: Domain,
                            samples: int = 1000, tol: float = 1e-12) -> dict:
    """Measure the comparability constant and the boundary gradient defect.

    Returns the smallest C with C^-1 d <= rho <= C d on the sample set,
    the max of |1 - |grad rho|| over boundary samples, and a pass flag for
    the gradient normalization against tol.
    """
    if samples < 1:
        raise ValueError("samples >= 1 required")
    pts = domain.interior_samples(samples, rng=0)
    ratios = []
    for x in pts:
        d = boundary_distance(domain, x)
        r = rho(x)
        if d > 0 and r > 0:
            ratios.append(r / d)
    ratios = np.array(ratios)
    c_meas = float(max(ratios.max(), 1.0 / ratios.min())) if ratios.size else float("nan")

    n_bdry = 2 if domain.kind == "interval" else samples
    defect = 0.0
    for bp in domain.boundary_points(n_bdry):
        g = rho.gradient(bp.x)
        defect = max(defect, abs(1.0 - float(np.linalg.norm(g))))
        if abs(rho(bp.x)) > tol:
            defect = max(defect, abs(rho(bp.x)))
    return {
        "c_rho": c_meas,
        "gradient_defect": defect,
        "passed": defect <= tol,
        "samples": samples,
    }
