"""Forced lateral boundary data and its derived traces.

On a degenerate boundary fiber {x0} x [0, T] the equation forces

    h(t) = phi(x0) exp(C(t)) - int_0^t exp(C(t) - C(s)) f(x0, s) ds,

with C the running integral of c(x0, .).  The same shape with shifted
coefficient c + b_n and a data-built source gives the first-order normal
trace u1 on the flat face of the half-strip, and an integer ladder of
shifted coefficients covers higher normal derivatives.

Antiderivatives in t are taken symbolically when sympy finds them in
closed form, otherwise by high-accuracy ODE integration; the outer
integral always goes through adaptive Gauss-Kronrod quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import sympy as sp
from scipy import integrate

from .fields import CoefficientSet, ConfigurationError, space_time_symbols
from .geometry import BoundaryPoint, Domain

__all__ = [
    "BoundaryTrace",
    "QuadratureError",
    "trace_h",
    "compatibility_residual",
    "trace_u1",
    "ladder_coefficients",
    "boundary_limit",
    "fourth_order_dt",
]

DEFAULT_TOL = 1e-10


class QuadratureError(RuntimeError):
    """Quadrature failed to reach the requested accuracy."""


@dataclass(frozen=True)
class BoundaryTrace:
    """Trace values on one boundary fiber, with the data that defined them."""

    level: int
    point: BoundaryPoint
    times: np.ndarray
    values: np.ndarray
    c_eff: Callable          # effective zero-order coefficient c^(level) of t
    f_eff: Callable          # effective source f^(level) of t
    tol: float

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times/values length mismatch")


def _substitute_point(expr: sp.Expr, n: int, x0) -> sp.Expr:
    xs, _ = space_time_symbols(n)
    return expr.subs({s: float(v) for s, v in zip(xs, np.atleast_1d(x0))})


def _antiderivative(expr_t: sp.Expr) -> Optional[Callable]:
    """Closed-form running integral from 0, or None if sympy cannot find one."""
    t = sp.Symbol("t")
    F = sp.integrate(expr_t, t)
    if F.has(sp.Integral):
        return None
    F0 = float(F.subs(t, 0))
    fn = sp.lambdify(t, F, modules="numpy")
    return lambda tt: float(fn(tt)) - F0


def _numeric_antiderivative(fn: Callable, t_max: float, tol: float) -> Callable:
    sol = integrate.solve_ivp(
        lambda tt, y: [fn(tt)], (0.0, max(t_max, 1e-12)), [0.0],
        rtol=1e-12, atol=min(tol, 1e-12), dense_output=True, method="DOP853",
    )
    if not sol.success:
        raise QuadratureError(f"running integral failed: {sol.message}")
    return lambda tt: float(sol.sol(tt)[0])


def _running_integral(expr_t: sp.Expr, t_max: float, tol: float) -> Callable:
    F = _antiderivative(expr_t)
    if F is not None:
        return F
    t = sp.Symbol("t")
    fn = sp.lambdify(t, expr_t, modules="numpy")
    return _numeric_antiderivative(lambda tt: float(fn(tt)), t_max, tol)


def _exp_weighted_integral(C: Callable, g: Callable, t: float, tol: float) -> float:
    """int_0^t exp(C(t) - C(s)) g(s) ds by adaptive quadrature."""
    if t == 0.0:
        return 0.0
    Ct = C(t)
    val, err = integrate.quad(lambda s: np.exp(Ct - C(s)) * g(s), 0.0, t,
                              epsabs=tol, epsrel=0.0, limit=400)
    if err > 10 * max(tol, 1e-14) * max(1.0, abs(val) + 1.0):
        raise QuadratureError(f"quadrature error estimate {err:g} above tolerance {tol:g}")
    return val


def trace_h(coeffs: CoefficientSet, phi, x0: BoundaryPoint,
            times: Sequence[float], tol: float = DEFAULT_TOL) -> BoundaryTrace:
    """Evaluate the forced trace on the fiber of x0 over the given time lattice."""
    if tol <= 0:
        raise ValueError("tol > 0 required")
    times = np.asarray(times, dtype=float)
    n = coeffs.n
    t = sp.Symbol("t")
    c_t = _substitute_point(coeffs.c, n, x0.x)
    f_t = _substitute_point(coeffs.f, n, x0.x)
    phi0 = float(_substitute_point(sp.sympify(phi), n, x0.x)) if not np.isscalar(phi) else float(phi)

    C = _running_integral(c_t, float(times.max(initial=0.0)), tol)
    f_fn = sp.lambdify(t, f_t, modules="numpy")
    vals = np.empty_like(times)
    for i, tt in enumerate(times):
        vals[i] = phi0 * np.exp(C(tt)) - _exp_weighted_integral(
            C, lambda s: float(f_fn(s)), float(tt), tol)
    c_fn = sp.lambdify(t, c_t, modules="numpy")
    return BoundaryTrace(0, x0, times, vals,
                         c_eff=lambda tt: float(c_fn(tt)),
                         f_eff=lambda tt: float(f_fn(tt)), tol=tol)


def fourth_order_dt(values: np.ndarray, dt: float) -> np.ndarray:
    """First time derivative on a uniform lattice, 4th order, one-sided at ends."""
    v = np.asarray(values, dtype=float)
    m = len(v)
    if m < 5:
        raise ValueError("need >= 5 nodes for 4th-order differences")
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * dt)
    d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * dt)
    d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * dt)
    d[-2] = (3 * v[-1] + 10 * v[-2] - 18 * v[-3] + 6 * v[-4] - v[-5]) / (12 * dt)
    d[-1] = (25 * v[-1] - 48 * v[-2] + 36 * v[-3] - 16 * v[-4] + 3 * v[-5]) / (12 * dt)
    return d


def compatibility_residual(trace: BoundaryTrace) -> float:
    """Max over the lattice of |d_t h - c_eff h + f_eff|."""
    times = trace.times
    if len(times) < 5:
        raise ValueError("time lattice too short")
    dt = float(times[1] - times[0])
    if not np.allclose(np.diff(times), dt):
        raise ValueError("uniform time lattice required")
    dh = fourth_order_dt(trace.values, dt)
    res = [abs(dh[i] - trace.c_eff(tt) * trace.values[i] + trace.f_eff(tt))
           for i, tt in enumerate(times)]
    return float(max(res))


def ladder_coefficients(coeffs: CoefficientSet, nu: int, domain: Optional[Domain] = None):
    """Shifted coefficients for the nu-th normal-derivative problem.

    b_i^(nu) = b_i + 2 nu a_in and c^(nu) = c + nu b_n + nu (nu - 1) a_nn,
    the closed form of the one-step shifts b -> b + 2 a_.n, c -> c + b_n.
    """
    if nu < 0:
        raise ValueError("nu >= 0 required")
    if domain is not None and domain.kind != "half_strip":
        raise ConfigurationError("coefficient ladder requires half_strip geometry")
    n = coeffs.n
    b_shift = tuple(coeffs.b[i] + 2 * nu * coeffs.a[i][n - 1] for i in range(n))
    c_shift = coeffs.c + nu * coeffs.b[n - 1] + nu * (nu - 1) * coeffs.a[n - 1][n - 1]
    return b_shift, sp.expand(c_shift)


def _tangential_h_derivative(coeffs: CoefficientSet, phi_expr: sp.Expr,
                             x0, alpha: int, t_grid: np.ndarray, tol: float) -> Callable:
    """d/dx_alpha of the trace formula, by differentiation under the integral."""
    n = coeffs.n
    xs, t = space_time_symbols(n)
    c_t = _substitute_point(coeffs.c, n, x0)
    f_t = _substitute_point(coeffs.f, n, x0)
    dc_t = _substitute_point(sp.diff(coeffs.c, xs[alpha]), n, x0)
    df_t = _substitute_point(sp.diff(coeffs.f, xs[alpha]), n, x0)
    phi0 = float(_substitute_point(phi_expr, n, x0))
    dphi0 = float(_substitute_point(sp.diff(phi_expr, xs[alpha]), n, x0))

    t_max = float(t_grid.max(initial=0.0))
    C = _running_integral(c_t, t_max, tol)
    Ic = _running_integral(dc_t, t_max, tol)
    f_fn = sp.lambdify(t, f_t, modules="numpy")
    df_fn = sp.lambdify(t, df_t, modules="numpy")

    def dh(tt: float) -> float:
        E = np.exp(C(tt))
        base = dphi0 * E + phi0 * E * Ic(tt)
        integ = _exp_weighted_integral(
            C, lambda s: (Ic(tt) - Ic(s)) * float(f_fn(s)) + float(df_fn(s)),
            tt, tol)
        return base - integ

    return dh


def trace_u1(coeffs: CoefficientSet, phi, x0: BoundaryPoint, domain: Domain,
             times: Sequence[float], tol: float = DEFAULT_TOL) -> BoundaryTrace:
    """First-order normal trace on the flat face, built from data only.

    Uses the shifted coefficient c + b_n and the source
    f_n = d_n f - (d_n c) h - b_alpha d_alpha h; no interior values of the
    solution enter.
    """
    if domain.kind != "half_strip":
        raise ConfigurationError("first-order trace requires half_strip geometry")
    times = np.asarray(times, dtype=float)
    n = coeffs.n
    xs, t = space_time_symbols(n)
    phi_expr = sp.sympify(phi)
    if sp.diff(phi_expr, xs[n - 1]) is None:
        raise ConfigurationError("normal derivative of phi unavailable")

    h_tr = trace_h(coeffs, phi_expr, x0, times, tol)

    c_shift_t = _substitute_point(coeffs.c + coeffs.b[n - 1], n, x0.x)
    dnf_t = _substitute_point(sp.diff(coeffs.f, xs[n - 1]), n, x0.x)
    dnc_t = _substitute_point(sp.diff(coeffs.c, xs[n - 1]), n, x0.x)
    b_tan = [_substitute_point(coeffs.b[alpha], n, x0.x) for alpha in range(n - 1)]
    dnphi0 = float(_substitute_point(sp.diff(phi_expr, xs[n - 1]), n, x0.x))

    t_max = float(times.max(initial=0.0))
    Cs = _running_integral(c_shift_t, t_max, tol)
    dnf_fn = sp.lambdify(t, dnf_t, modules="numpy")
    dnc_fn = sp.lambdify(t, dnc_t, modules="numpy")
    b_tan_fns = [sp.lambdify(t, e, modules="numpy") for e in b_tan]

    # h and its tangential derivatives along the fiber, as callables of t
    Ch = _running_integral(_substitute_point(coeffs.c, n, x0.x), t_max, tol)
    f_fn = sp.lambdify(t, _substitute_point(coeffs.f, n, x0.x), modules="numpy")
    phi0 = float(_substitute_point(phi_expr, n, x0.x))

    def h_at(tt):
        return phi0 * np.exp(Ch(tt)) - _exp_weighted_integral(
            Ch, lambda s: float(f_fn(s)), tt, tol)

    dh_tan = [_tangential_h_derivative(coeffs, phi_expr, x0.x, alpha, times, tol)
              for alpha in range(n - 1)]

    def f_n(tt: float) -> float:
        val = float(dnf_fn(tt)) - float(dnc_fn(tt)) * h_at(tt)
        for bfn, dh in zip(b_tan_fns, dh_tan):
            val -= float(bfn(tt)) * dh(tt)
        return val

    vals = np.empty_like(times)
    for i, tt in enumerate(times):
        vals[i] = dnphi0 * np.exp(Cs(tt)) - _exp_weighted_integral(Cs, f_n, float(tt), tol)

    c_shift_fn = sp.lambdify(t, c_shift_t, modules="numpy")
    return BoundaryTrace(1, x0, times, vals,
                         c_eff=lambda tt: float(c_shift_fn(tt)),
                         f_eff=f_n, tol=tol)


def boundary_limit(coeffs: CoefficientSet, trace: BoundaryTrace,
                   windows: Sequence[tuple]) -> dict:
    """Deviation of h from f_bar/c_bar and decay of d_t h per tail window."""
    cbar = coeffs.c_bar_at(trace.point.x)
    if cbar >= 0 or abs(cbar) < 1e-14:
        raise ConfigurationError("boundary limit requires c_bar < 0 at the point")
    fbar = coeffs.f_bar_at(trace.point.x) if coeffs.f_bar is not None else 0.0
    limit = fbar / cbar

    times = trace.times
    dt = float(times[1] - times[0])
    dh = fourth_order_dt(trace.values, dt)
    rows = []
    for (t0, t1) in windows:
        mask = (times >= t0) & (times <= t1)
        if not mask.any():
            continue
        rows.append({
            "t0": float(t0), "t1": float(t1),
            "sup_deviation": float(np.abs(trace.values[mask] - limit).max()),
            "sup_dt": float(np.abs(dh[mask]).max()),
        })
    decays = [r["sup_deviation"] for r in rows]
    decaying = all(b <= a * (1 + 1e-9) for a, b in zip(decays, decays[1:])) and len(decays) > 1
    return {"limit": limit, "windows": rows, "decaying": bool(decaying)}
