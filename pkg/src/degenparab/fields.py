"""Coefficient fields, ellipticity measurement, and characteristic polynomials.

Coefficients are closed-form expressions in the spatial variables x1..xn and
time t, parsed through a small arithmetic grammar (operators ``+ - * / ^``,
functions ``exp sin cos sqrt``).  Keeping them symbolic gives exact spatial
and temporal derivatives to the residual oracles downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import sympy as sp

from .geometry import BoundaryPoint, DefiningFunction, Domain, DomainError

__all__ = [
    "CoefficientSet",
    "CharPoly",
    "SmoothFunction",
    "ConfigurationError",
    "parse_expression",
    "apply_operator",
    "ellipticity_bounds",
    "char_poly_at",
    "gate_check",
    "interior_poly",
    "interior_poly_gate",
]


class ConfigurationError(ValueError):
    """Missing limits, wrong geometry, or malformed expressions."""


_ALLOWED_FUNCS = {"exp": sp.exp, "sin": sp.sin, "cos": sp.cos, "sqrt": sp.sqrt}


def space_time_symbols(n: int):
    xs = sp.symbols(f"x1:{n + 1}")
    return xs, sp.Symbol("t")


def parse_expression(text: str, n: int) -> sp.Expr:
    """Parse an expression over x1..xn and t; ``^`` means power."""
    xs, t = space_time_symbols(n)
    local = {s.name: s for s in xs}
    local["t"] = t
    local.update(_ALLOWED_FUNCS)
    local["pi"] = sp.pi
    try:
        expr = sp.sympify(text.replace("^", "**"), locals=local, rational=False)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigurationError(f"cannot parse expression {text!r}: {exc}") from None
    bad = expr.free_symbols - set(xs) - {t}
    if bad:
        raise ConfigurationError(f"unknown symbols {bad} in {text!r}")
    return expr


def _as_expr(value, n: int) -> sp.Expr:
    if isinstance(value, str):
        return parse_expression(value, n)
    return sp.sympify(value)


@dataclass
class CoefficientSet:
    """Fields of the degenerate operator and their optional time limits.

    ``a`` is an n x n matrix of sympy expressions (symmetric), ``b`` a
    length-n vector, ``c`` and ``f`` scalars; all in x1..xn and t.  Limit
    fields are declared explicitly, never inferred.
    """

    n: int
    a: tuple
    b: tuple
    c: sp.Expr
    f: sp.Expr
    lam: float
    Lam: float
    a_bar: Optional[tuple] = None
    b_bar: Optional[tuple] = None
    c_bar: Optional[sp.Expr] = None
    f_bar: Optional[sp.Expr] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @staticmethod
    def build(n, a, b, c, f, lam=None, Lam=None,
              a_bar=None, b_bar=None, c_bar=None, f_bar=None) -> "CoefficientSet":
        """Build from expressions, strings, or numbers.

        ``a`` may be a scalar (meaning a * identity) or an n x n nested
        sequence; ``b`` a scalar (1-D) or length-n sequence.
        """
        def mat(m):
            if m is None:
                return None
            if np.isscalar(m) or isinstance(m, (str, sp.Expr)):
                e = _as_expr(m, n)
                return tuple(tuple(e if i == j else sp.Integer(0) for j in range(n))
                             for i in range(n))
            rows = tuple(tuple(_as_expr(v, n) for v in row) for row in m)
            for i in range(n):
                for j in range(n):
                    if sp.simplify(rows[i][j] - rows[j][i]) != 0:
                        raise ConfigurationError("a must be symmetric")
            return rows

        def vec(v):
            if v is None:
                return None
            if np.isscalar(v) or isinstance(v, (str, sp.Expr)):
                if n != 1:
                    raise ConfigurationError("vector coefficient needs n entries")
                return (_as_expr(v, n),)
            return tuple(_as_expr(x, n) for x in v)

        A = mat(a)
        if lam is None or Lam is None:
            # constant matrices get exact declared bounds
            try:
                M = np.array([[float(v) for v in row] for row in A])
                w = np.linalg.eigvalsh(M)
                lam = lam if lam is not None else float(w.min())
                Lam = Lam if Lam is not None else float(w.max())
            except TypeError:
                raise ConfigurationError("declare lam/Lam for non-constant a")
        return CoefficientSet(
            n=n, a=A, b=vec(b), c=_as_expr(c, n), f=_as_expr(f, n),
            lam=float(lam), Lam=float(Lam),
            a_bar=mat(a_bar), b_bar=vec(b_bar),
            c_bar=_as_expr(c_bar, n) if c_bar is not None else None,
            f_bar=_as_expr(f_bar, n) if f_bar is not None else None,
        )

    @property
    def has_limits(self) -> bool:
        return self.a_bar is not None and self.b_bar is not None and self.c_bar is not None

    # ---- evaluation ------------------------------------------------------
    def _fn(self, key, expr, with_t):
        if key not in self._cache:
            xs, t = space_time_symbols(self.n)
            args = xs + ((t,) if with_t else ())
            self._cache[key] = sp.lambdify(args, expr, modules="numpy")
        return self._cache[key]

    def a_at(self, x, t) -> np.ndarray:
        x = np.atleast_1d(x)
        return np.array([[float(self._fn(("a", i, j), self.a[i][j], True)(*x, t))
                          for j in range(self.n)] for i in range(self.n)])

    def b_at(self, x, t) -> np.ndarray:
        x = np.atleast_1d(x)
        return np.array([float(self._fn(("b", i), self.b[i], True)(*x, t))
                         for i in range(self.n)])

    def c_at(self, x, t) -> float:
        x = np.atleast_1d(x)
        return float(self._fn("c", self.c, True)(*x, t))

    def f_at(self, x, t) -> float:
        x = np.atleast_1d(x)
        return float(self._fn("f", self.f, True)(*x, t))

    def a_bar_at(self, x) -> np.ndarray:
        self._require_limits()
        x = np.atleast_1d(x)
        return np.array([[float(self._fn(("abar", i, j), self.a_bar[i][j], False)(*x))
                          for j in range(self.n)] for i in range(self.n)])

    def b_bar_at(self, x) -> np.ndarray:
        self._require_limits()
        x = np.atleast_1d(x)
        return np.array([float(self._fn(("bbar", i), self.b_bar[i], False)(*x))
                         for i in range(self.n)])

    def c_bar_at(self, x) -> float:
        self._require_limits()
        x = np.atleast_1d(x)
        return float(self._fn("cbar", self.c_bar, False)(*x))

    def f_bar_at(self, x) -> float:
        if self.f_bar is None:
            raise ConfigurationError("limit f_bar not declared")
        x = np.atleast_1d(x)
        return float(self._fn("fbar", self.f_bar, False)(*x))

    def _require_limits(self):
        if not self.has_limits:
            raise ConfigurationError("limit coefficients not declared")


@dataclass(frozen=True)
class SmoothFunction:
    """A space-time function with analytic derivatives up to order (2, 1)."""

    value: Callable
    grad: Callable
    hess: Callable
    dt: Callable

    @staticmethod
    def from_expr(expr: sp.Expr, n: int) -> "SmoothFunction":
        xs, t = space_time_symbols(n)
        args = xs + (t,)
        val = sp.lambdify(args, expr, modules="numpy")
        grads = [sp.lambdify(args, sp.diff(expr, s), modules="numpy") for s in xs]
        hesss = [[sp.lambdify(args, sp.diff(expr, si, sj), modules="numpy") for sj in xs]
                 for si in xs]
        dt = sp.lambdify(args, sp.diff(expr, t), modules="numpy")
        return SmoothFunction(
            value=lambda x, tt: float(val(*np.atleast_1d(x), tt)),
            grad=lambda x, tt: np.array([g(*np.atleast_1d(x), tt) for g in grads], dtype=float),
            hess=lambda x, tt: np.array([[h(*np.atleast_1d(x), tt) for h in row]
                                         for row in hesss], dtype=float),
            dt=lambda x, tt: float(dt(*np.atleast_1d(x), tt)),
        )


def apply_operator(coeffs: CoefficientSet, rho: DefiningFunction,
                   u: SmoothFunction, x, t: float) -> float:
    """Evaluate Lu = rho^2 a_ij d_ij u + rho b_i d_i u + c u - d_t u at (x, t)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not rho.domain.contains(x):
        raise DomainError(f"point {x} outside domain")
    r = rho(x)
    A = coeffs.a_at(x, t)
    bvec = coeffs.b_at(x, t)
    val = r * r * float(np.tensordot(A, u.hess(x, t)))
    val += r * float(bvec @ u.grad(x, t))
    val += coeffs.c_at(x, t) * u.value(x, t)
    val -= u.dt(x, t)
    return val


def ellipticity_bounds(coeffs: CoefficientSet, samples: Sequence) -> tuple:
    """Min/max eigenvalues of a over (x, t) samples, with violation flags."""
    samples = list(samples)
    if not samples:
        raise ValueError("samples nonempty required")
    lo, hi = np.inf, -np.inf
    for x, t in samples:
        A = coeffs.a_at(x, t)
        if not np.allclose(A, A.T, atol=1e-12):
            raise ConfigurationError("a is not symmetric at a sample")
        w = np.linalg.eigvalsh(A)
        lo = min(lo, w[0])
        hi = max(hi, w[-1])
    return float(lo), float(hi)


@dataclass(frozen=True)
class CharPoly:
    """P(mu) = mu(mu-1) A + mu B + C at a boundary point, A from a_bar etc."""

    A: float
    B: float
    C: float

    def __call__(self, mu: float) -> float:
        return mu * (mu - 1.0) * self.A + mu * self.B + self.C

    @property
    def roots(self):
        """The two real roots when C < 0 (one negative, one positive)."""
        # mu^2 A + mu (B - A) + C = 0
        disc = (self.B - self.A) ** 2 - 4.0 * self.A * self.C
        if disc < 0:
            return None
        s = np.sqrt(disc)
        r1 = (-(self.B - self.A) - s) / (2.0 * self.A)
        r2 = (-(self.B - self.A) + s) / (2.0 * self.A)
        return (min(r1, r2), max(r1, r2))


def char_poly_at(coeffs: CoefficientSet, p: BoundaryPoint) -> CharPoly:
    nu = p.normal
    A = float(nu @ coeffs.a_bar_at(p.x) @ nu)
    B = float(coeffs.b_bar_at(p.x) @ nu)
    C = coeffs.c_bar_at(p.x)
    return CharPoly(A, B, C)


def gate_check(coeffs: CoefficientSet, domain: Domain, k: int, alpha: float,
               boundary_samples: int = 256) -> dict:
    """Regularity gate: sup P(k + alpha) < 0 and sup c_bar < 0 on the boundary.

    The sup is taken over a fixed boundary lattice, so the reported margin
    is a lower bound on the true margin.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha in (0,1) required")
    mu = k + alpha
    worst_p = -np.inf
    worst_c = -np.inf
    for bp in domain.boundary_points(boundary_samples):
        P = char_poly_at(coeffs, bp)
        worst_p = max(worst_p, P(mu))
        worst_c = max(worst_c, P.C)
    ok = worst_p < 0.0 and worst_c < 0.0
    return {
        "passed": ok,
        "margin": -max(worst_p, worst_c),
        "sup_P": worst_p,
        "sup_c_bar": worst_c,
        "mu": mu,
    }


def interior_poly(coeffs: CoefficientSet, domain: Domain, x, mu: float) -> float:
    """Q(mu)(x) = mu(mu-1) a_bar_nn + mu b_bar_n + c_bar on the half-strip."""
    if domain.kind != "half_strip":
        raise ConfigurationError("interior polynomial requires half_strip geometry")
    A = coeffs.a_bar_at(x)[-1, -1]
    B = coeffs.b_bar_at(x)[-1]
    C = coeffs.c_bar_at(x)
    return mu * (mu - 1.0) * A + mu * B + C


def interior_poly_gate(coeffs: CoefficientSet, domain: Domain, mu: float,
                       samples: int = 256) -> dict:
    """Check Q(mu) < 0 on a lattice over the whole closed half-strip."""
    if domain.kind != "half_strip":
        raise ConfigurationError("interior polynomial requires half_strip geometry")
    r = domain.params[0]
    m = int(np.ceil(np.sqrt(samples)))
    worst = -np.inf
    for x1 in np.linspace(-r, r, m):
        for x2 in np.linspace(0.0, r, m):
            worst = max(worst, interior_poly(coeffs, domain, (x1, x2), mu))
    return {"passed": worst < 0.0, "margin": -worst, "sup_Q": worst, "mu": mu}
