"""Finite-difference solver for the degenerate initial-boundary value problem.

The scheme is a theta-method in time (backward Euler by default) with the
second-order term rho^2 a_ij discretized by central differences on a
boundary-graded grid, the first-order term rho b_i upwinded by its sign,
and the zero-order term taken implicitly.  When sup c > 0 an exponential
substitution removes the bad sign before stepping.  Dirichlet values are
imposed on every lateral face, the degenerate ones carrying the forced
trace; the boundary rows stay identity rows so the system remains an
M-matrix on cross-term-free problems.

A viscosity schedule delta_0 > delta_1 > ... regularizes the operator by
delta * Laplacian and declares stabilization once successive solutions are
Cauchy in the sup norm; the stationary analogue solves the limit Dirichlet
problem with boundary value f_bar / c_bar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import sympy as sp
from scipy.linalg import solve_banded
from scipy.sparse import csr_matrix, eye as speye
from scipy.sparse.linalg import splu

from .boundary_trace import fourth_order_dt
from .fields import CoefficientSet, space_time_symbols
from .geometry import DefiningFunction, Domain

__all__ = [
    "GridSpec",
    "SpaceTimeField",
    "DeltaSchedule",
    "GateError",
    "NumericError",
    "solve_ibvp",
    "vanishing_viscosity",
    "solve_elliptic_limit",
    "long_time_run",
]


class GateError(RuntimeError):
    """A hypothesis gate (compatibility, ellipticity) failed."""


class NumericError(RuntimeError):
    """NaN, blow-up, or linear-solve failure during time stepping."""


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution, boundary grading, and time stepping parameters."""

    N: int
    M: int
    gamma: float = 2.0
    theta: float = 1.0

    def __post_init__(self):
        if self.N < 8:
            raise ValueError("N >= 8 required")
        if self.M < 2:
            raise ValueError("M >= 2 required")
        if self.gamma < 1.0:
            raise ValueError("gamma >= 1 required")
        if not (0.5 <= self.theta <= 1.0):
            raise ValueError("theta in [0.5, 1] required")


@dataclass
class SpaceTimeField:
    """Solver output: values over tensor grid x time levels, plus metadata."""

    domain: Domain
    coords: tuple               # per-axis node arrays
    times: np.ndarray
    values: np.ndarray          # shape (M+1, *spatial_shape)
    meta: dict = field(default_factory=dict)

    @property
    def points(self) -> np.ndarray:
        """Flattened spatial points, shape (n_nodes, n)."""
        mesh = np.meshgrid(*self.coords, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def at_level(self, k: int) -> np.ndarray:
        return self.values[k]

    def window_mask(self, t0: float, t1: float) -> np.ndarray:
        return (self.times >= t0 - 1e-12) & (self.times <= t1 + 1e-12)

    def sup_abs(self, t0: Optional[float] = None, t1: Optional[float] = None) -> float:
        if t0 is None:
            return float(np.abs(self.values).max())
        m = self.window_mask(t0, t1)
        return float(np.abs(self.values[m]).max())

    def dt_values(self) -> np.ndarray:
        """Time derivative on the uniform lattice, 4th order."""
        dt = float(self.times[1] - self.times[0])
        flat = self.values.reshape(len(self.times), -1)
        out = np.empty_like(flat)
        for j in range(flat.shape[1]):
            out[:, j] = fourth_order_dt(flat[:, j], dt)
        return out.reshape(self.values.shape)


@dataclass(frozen=True)
class DeltaSchedule:
    delta0: float = 1e-2
    ratio: float = 0.25
    max_stages: int = 8
    eps: float = 1e-6

    def __post_init__(self):
        if self.delta0 <= 0 or not (0 < self.ratio < 1) or self.max_stages < 1:
            raise ValueError("invalid viscosity schedule")

    def deltas(self):
        return [self.delta0 * self.ratio**j for j in range(self.max_stages)]


# ---------------------------------------------------------------------------
# grids

def graded_nodes(a: float, b: float, N: int, gamma: float,
                 grade_right: bool = True) -> np.ndarray:
    """N+1 strictly increasing nodes on [a, b], clustered near the degenerate ends.

    Uses the two-sided map xi^gamma / (xi^gamma + (1-xi)^gamma); with
    grade_right False only the left end is graded (half-strip normal axis).
    """
    xi = np.linspace(0.0, 1.0, N + 1)
    if gamma == 1.0:
        w = xi
    elif grade_right:
        w = xi**gamma / (xi**gamma + (1.0 - xi) ** gamma)
    else:
        w = xi**gamma
    nodes = a + (b - a) * w
    if not np.all(np.diff(nodes) > 0):
        raise ValueError("grading produced non-monotone nodes")
    return nodes


def _vec_field(expr: sp.Expr, n: int):
    xs, t = space_time_symbols(n)
    fn = sp.lambdify(xs + (t,), expr, modules="numpy")

    def ev(points: np.ndarray, tt: float) -> np.ndarray:
        cols = [points[:, i] for i in range(n)]
        out = fn(*cols, tt)
        return np.broadcast_to(np.asarray(out, dtype=float), (len(points),)).copy()

    return ev


class _FieldEvals:
    """Vectorized coefficient evaluation over the node set, cached when autonomous."""

    def __init__(self, coeffs: CoefficientSet, points: np.ndarray, limits: bool = False):
        n = coeffs.n
        src_a = coeffs.a_bar if limits else coeffs.a
        src_b = coeffs.b_bar if limits else coeffs.b
        src_c = coeffs.c_bar if limits else coeffs.c
        src_f = (coeffs.f_bar if coeffs.f_bar is not None else sp.Integer(0)) if limits else coeffs.f
        self.points = points
        self._a = [[_vec_field(src_a[i][j], n) for j in range(n)] for i in range(n)]
        self._b = [_vec_field(src_b[i], n) for i in range(n)]
        self._c = _vec_field(src_c, n)
        self._f = _vec_field(src_f, n)
        t = space_time_symbols(n)[1]
        exprs = [src_c, src_f] + [src_b[i] for i in range(n)] + \
            [src_a[i][j] for i in range(n) for j in range(n)]
        self.autonomous = not any(sp.sympify(e).has(t) for e in exprs)
        self._cache = {}

    def at(self, tt: float):
        key = 0.0 if self.autonomous else tt
        if key not in self._cache:
            p = self.points
            self._cache = {key: (
                [[aij(p, tt) for aij in row] for row in self._a],
                [bi(p, tt) for bi in self._b],
                self._c(p, tt),
                self._f(p, tt),
            )}
        return self._cache[key]


# ---------------------------------------------------------------------------
# spatial operator assembly

def _second_diff_weights(xm, x0, xp):
    hm, hp = x0 - xm, xp - x0
    return 2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))


def _assemble_1d(coords, rho_vals, a_vals, b_vals, c_vals, delta, shift):
    """Rows of A (without time term) as tridiagonal bands; boundary rows zero."""
    x = coords[0]
    npts = len(x)
    lower = np.zeros(npts)
    diag = np.zeros(npts)
    upper = np.zeros(npts)
    for i in range(1, npts - 1):
        wm, w0, wp = _second_diff_weights(x[i - 1], x[i], x[i + 1])
        diff = rho_vals[i] ** 2 * a_vals[i] + delta
        lower[i] += diff * wm
        diag[i] += diff * w0
        upper[i] += diff * wp
        adv = rho_vals[i] * b_vals[i]
        if adv >= 0:
            hp = x[i + 1] - x[i]
            diag[i] -= adv / hp
            upper[i] += adv / hp
        else:
            hm = x[i] - x[i - 1]
            diag[i] += adv / hm
            lower[i] -= adv / hm
        diag[i] += c_vals[i] - shift
    return lower, diag, upper


def _assemble_2d(coords, rho_vals, a_vals, b_vals, c_vals, delta, shift):
    """Sparse operator on the tensor grid; boundary rows left zero."""
    x1, x2 = coords
    n1, n2 = len(x1), len(x2)
    idx = lambda i, j: i * n2 + j
    rows, cols, data = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        data.append(v)

    R = rho_vals.reshape(n1, n2)
    A11 = a_vals[0][0].reshape(n1, n2)
    A12 = a_vals[0][1].reshape(n1, n2)
    A22 = a_vals[1][1].reshape(n1, n2)
    B1 = b_vals[0].reshape(n1, n2)
    B2 = b_vals[1].reshape(n1, n2)
    C = c_vals.reshape(n1, n2)

    for i in range(1, n1 - 1):
        for j in range(1, n2 - 1):
            r = idx(i, j)
            rr = R[i, j]
            d11 = rr * rr * A11[i, j] + delta
            d22 = rr * rr * A22[i, j] + delta
            wm, w0, wp = _second_diff_weights(x1[i - 1], x1[i], x1[i + 1])
            add(r, idx(i - 1, j), d11 * wm)
            add(r, r, d11 * w0)
            add(r, idx(i + 1, j), d11 * wp)
            wm, w0, wp = _second_diff_weights(x2[j - 1], x2[j], x2[j + 1])
            add(r, idx(i, j - 1), d22 * wm)
            add(r, r, d22 * w0)
            add(r, idx(i, j + 1), d22 * wp)
            cross = 2.0 * rr * rr * A12[i, j]
            if cross != 0.0:
                den = (x1[i + 1] - x1[i - 1]) * (x2[j + 1] - x2[j - 1])
                add(r, idx(i + 1, j + 1), cross / den)
                add(r, idx(i - 1, j - 1), cross / den)
                add(r, idx(i + 1, j - 1), -cross / den)
                add(r, idx(i - 1, j + 1), -cross / den)
            adv1 = rr * B1[i, j]
            if adv1 >= 0:
                h = x1[i + 1] - x1[i]
                add(r, r, -adv1 / h)
                add(r, idx(i + 1, j), adv1 / h)
            else:
                h = x1[i] - x1[i - 1]
                add(r, r, adv1 / h)
                add(r, idx(i - 1, j), -adv1 / h)
            adv2 = rr * B2[i, j]
            if adv2 >= 0:
                h = x2[j + 1] - x2[j]
                add(r, r, -adv2 / h)
                add(r, idx(i, j + 1), adv2 / h)
            else:
                h = x2[j] - x2[j - 1]
                add(r, r, adv2 / h)
                add(r, idx(i, j - 1), -adv2 / h)
            add(r, r, C[i, j] - shift)
    npts = n1 * n2
    return csr_matrix((data, (rows, cols)), shape=(npts, npts))


def _grid_coords(domain: Domain, grid: GridSpec):
    if domain.kind == "interval":
        a, b = domain.params
        return (graded_nodes(a, b, grid.N, grid.gamma),)
    if domain.kind == "half_strip":
        r = domain.params[0]
        x1 = np.linspace(-r, r, grid.N + 1)
        x2 = graded_nodes(0.0, r, grid.N, grid.gamma, grade_right=False)
        return (x1, x2)
    raise NotImplementedError("finite-difference solver supports interval and half_strip")


def _boundary_masks(domain: Domain, coords):
    """(degenerate mask, artificial mask) over flattened node indices."""
    if domain.kind == "interval":
        npts = len(coords[0])
        deg = np.zeros(npts, dtype=bool)
        deg[0] = deg[-1] = True
        return deg, np.zeros(npts, dtype=bool)
    n1, n2 = len(coords[0]), len(coords[1])
    deg = np.zeros((n1, n2), dtype=bool)
    art = np.zeros((n1, n2), dtype=bool)
    deg[:, 0] = True
    art[0, :] = art[-1, :] = True
    art[:, -1] = True
    deg &= ~art  # corners belong to the artificial faces
    return deg.ravel(), art.ravel()


def _eval_on(points, fn) -> np.ndarray:
    return np.array([float(fn(x)) for x in points])


def _check_compatibility(coeffs, points, bmask, h, times, tol):
    """Gate (forced-trace identity) on the degenerate boundary nodes."""
    # resolution of the 4th-order derivative check must scale with the
    # horizon, or exact data on long runs fails on discretization error
    span = max(1.0, float(times[-1] - times[0]))
    tt = np.linspace(times[0], times[-1],
                     max(9, min(int(129 * span), len(times))))
    dt = tt[1] - tt[0]
    worst = 0.0
    for x in points[bmask]:
        hv = np.array([h(x, s) for s in tt])
        dh = fourth_order_dt(hv, dt)
        cv = np.array([coeffs.c_at(x, s) for s in tt])
        fv = np.array([coeffs.f_at(x, s) for s in tt])
        scale = 1.0 + np.abs(hv).max() + np.abs(fv).max()
        worst = max(worst, float(np.abs(dh - cv * hv + fv).max()) / scale)
    if worst > tol:
        raise GateError(
            f"boundary data violates the forced-trace identity: residual {worst:g} > {tol:g}")
    return worst


def solve_ibvp(coeffs: CoefficientSet, rho: DefiningFunction,
               phi: Callable, h: Callable, grid: GridSpec,
               delta: float = 0.0, T: float = 1.0,
               compat_tol: float = 1e-6,
               uniform_debug: bool = False,
               artificial_data: Optional[Callable] = None) -> SpaceTimeField:
    """March the theta-scheme over [0, T].

    phi maps x to the initial value; h maps (x, t) to the Dirichlet value on
    the degenerate faces.  For the half-strip, artificial_data (defaulting
    to h) supplies the values on the non-degenerate faces.  With
    uniform_debug the degenerate weight is frozen at 1 (uniformly parabolic
    control run).
    """
    domain = rho.domain
    coords = _grid_coords(domain, grid)
    points = np.column_stack([m.ravel() for m in np.meshgrid(*coords, indexing="ij")])
    deg_mask, art_mask = _boundary_masks(domain, coords)
    bmask = deg_mask | art_mask
    times = np.linspace(0.0, T, grid.M + 1)
    dt = times[1] - times[0]

    rho_vals = np.ones(len(points)) if uniform_debug else \
        np.array([rho(x) for x in points])
    ev = _FieldEvals(coeffs, points)

    if compat_tol is not None and len(times) >= 5:
        _check_compatibility(coeffs, points, deg_mask, h, times, compat_tol)

    # exponential substitution when c has a positive part
    sup_c = max(ev.at(tt)[2].max() for tt in times[:: max(1, len(times) // 8)])
    shift = sup_c + 1.0 if sup_c > 0 else 0.0

    art = artificial_data if artificial_data is not None else h

    def bvals(tt):
        out = np.zeros(len(points))
        out[deg_mask] = [h(x, tt) for x in points[deg_mask]]
        if art_mask.any():
            out[art_mask] = [art(x, tt) for x in points[art_mask]]
        return out * np.exp(-shift * tt)

    u = _eval_on(points, phi)
    u[bmask] = bvals(0.0)[bmask]
    levels = np.empty((grid.M + 1, len(points)))
    levels[0] = u

    theta = grid.theta
    interior = ~bmask

    if domain.kind == "interval":
        x = coords[0]
        npts = len(x)

        def bands(tt):
            a_v, b_v, c_v, f_v = ev.at(tt)
            lo, di, up = _assemble_1d(coords, rho_vals, a_v[0][0], b_v[0], c_v, delta, shift)
            return lo, di, up, f_v

        def make_ab(lo, di, up):
            ab = np.zeros((3, npts))
            ab[0, 1:] = -theta * dt * up[:-1]
            ab[1] = 1.0 - theta * dt * di
            ab[2, :-1] = -theta * dt * lo[1:]
            ab[1][bmask] = 1.0
            ab[0, 1:][bmask[:-1]] = 0.0
            ab[2, :-1][bmask[1:]] = 0.0
            return ab

        from scipy.sparse import diags

        prev = bands(times[0])
        frozen = None
        if ev.autonomous:
            ab = make_ab(*prev[:3])
            frozen = splu(diags([ab[2, :-1], ab[1], ab[0, 1:]], [-1, 0, 1]).tocsc())

        for k in range(1, grid.M + 1):
            tt = times[k]
            lo, di, up, f_v = prev if ev.autonomous else bands(tt)
            rhs = u.copy()
            if theta < 1.0:
                lo0, di0, up0, f0 = prev
                Au = np.zeros(npts)
                Au[1:-1] = lo0[1:-1] * u[:-2] + di0[1:-1] * u[1:-1] + up0[1:-1] * u[2:]
                rhs[interior] += (1 - theta) * dt * (
                    Au[interior] - np.exp(-shift * times[k - 1]) * f0[interior])
            rhs[interior] += -theta * dt * np.exp(-shift * tt) * f_v[interior]
            rhs[bmask] = bvals(tt)[bmask]
            if frozen is not None:
                u = frozen.solve(rhs)
            else:
                u = solve_banded((1, 1), make_ab(lo, di, up), rhs)
            prev = (lo, di, up, f_v)
            if not np.all(np.isfinite(u)):
                raise NumericError(f"non-finite values at t={tt:g}")
            levels[k] = u
    else:
        npts = len(points)

        def system(tt):
            a_v, b_v, c_v, f_v = ev.at(tt)
            A = _assemble_2d(coords, rho_vals, a_v, b_v, c_v, delta, shift)
            M = (speye(npts, format="csr") - theta * dt * A).tolil()
            for r in np.where(bmask)[0]:
                M.rows[r] = [r]
                M.data[r] = [1.0]
            return A, splu(M.tocsc()), f_v

        A_prev, lu, f_prev = system(times[0])
        autonomous = ev.autonomous
        for k in range(1, grid.M + 1):
            tt = times[k]
            if autonomous:
                A_cur, lu_cur, f_v = A_prev, lu, f_prev
            else:
                A_cur, lu_cur, f_v = system(tt)
            rhs = u.copy()
            if theta < 1.0:
                rhs[interior] += (1 - theta) * dt * (
                    (A_prev @ u)[interior] - np.exp(-shift * times[k - 1]) * f_prev[interior])
            rhs[interior] += -theta * dt * np.exp(-shift * tt) * f_v[interior]
            rhs[bmask] = bvals(tt)[bmask]
            u = lu_cur.solve(rhs)
            A_prev, lu, f_prev = A_cur, lu_cur, f_v
            if not np.all(np.isfinite(u)):
                raise NumericError(f"non-finite values at t={tt:g}")
            levels[k] = u

    if shift > 0:
        levels *= np.exp(shift * times)[:, None]

    shape = tuple(len(c) for c in coords)
    return SpaceTimeField(domain, coords, times, levels.reshape(grid.M + 1, *shape),
                          meta={"delta": delta, "theta": theta, "shift": shift,
                                "grid": grid, "T": T})


def vanishing_viscosity(coeffs, rho, phi, h, grid, schedule: DeltaSchedule,
                        T: float = 1.0, **kw):
    """Run the delta-schedule and stop once successive solutions are Cauchy."""
    prev = None
    diffs = []
    fields = []
    for j, d in enumerate(schedule.deltas()):
        fld = solve_ibvp(coeffs, rho, phi, h, grid, delta=d, T=T, **kw)
        fields.append(fld)
        if prev is not None:
            diff = float(np.abs(fld.values - prev.values).max())
            diffs.append(diff)
            if diff < schedule.eps:
                report = {"stabilized": True, "stages": j + 1,
                          "deltas": schedule.deltas()[: j + 1], "diffs": diffs}
                fld.meta["viscosity"] = report
                return fld, report
        prev = fld
    report = {"stabilized": len(diffs) > 0 and diffs[-1] < schedule.eps,
              "stages": schedule.max_stages, "deltas": schedule.deltas(), "diffs": diffs}
    prev.meta["viscosity"] = report
    return prev, report


def _solve_stationary(coeffs, rho, grid, delta, boundary_value, artificial_data=None):
    domain = rho.domain
    coords = _grid_coords(domain, grid)
    points = np.column_stack([m.ravel() for m in np.meshgrid(*coords, indexing="ij")])
    deg_mask, art_mask = _boundary_masks(domain, coords)
    bmask = deg_mask | art_mask
    rho_vals = np.array([rho(x) for x in points])
    ev = _FieldEvals(coeffs, points, limits=True)
    a_v, b_v, c_v, f_v = ev.at(0.0)

    if domain.kind == "interval":
        lo, di, up = _assemble_1d(coords, rho_vals, a_v[0][0], b_v[0], c_v, delta, 0.0)
        npts = len(points)
        ab = np.zeros((3, npts))
        ab[0, 1:] = up[:-1]
        ab[1] = di
        ab[2, :-1] = lo[1:]
        ab[1][bmask] = 1.0
        ab[0, 1:][bmask[:-1]] = 0.0
        ab[2, :-1][bmask[1:]] = 0.0
        rhs = f_v.copy()
        rhs[deg_mask] = [boundary_value(x) for x in points[deg_mask]]
        if art_mask.any():
            rhs[art_mask] = [artificial_data(x) for x in points[art_mask]]
        v = solve_banded((1, 1), ab, rhs)
    else:
        A = _assemble_2d(coords, rho_vals, a_v, b_v, c_v, delta, 0.0).tolil()
        for r in np.where(bmask)[0]:
            A.rows[r] = [r]
            A.data[r] = [1.0]
        rhs = f_v.copy()
        rhs[deg_mask] = [boundary_value(x) for x in points[deg_mask]]
        rhs[art_mask] = [artificial_data(x) for x in points[art_mask]]
        v = splu(A.tocsc()).solve(rhs)
    if not np.all(np.isfinite(v)):
        raise NumericError("stationary solve produced non-finite values")
    shape = tuple(len(c) for c in coords)
    return SpaceTimeField(domain, coords, np.array([0.0]), v.reshape(1, *shape),
                          meta={"delta": delta, "stationary": True})


def solve_elliptic_limit(coeffs: CoefficientSet, rho: DefiningFunction,
                         grid: GridSpec, schedule: DeltaSchedule,
                         artificial_data: Optional[Callable] = None):
    """Vanishing-viscosity solve of the limit Dirichlet problem.

    Boundary value on the degenerate faces is f_bar / c_bar, forced by the
    equation itself.
    """
    from .fields import gate_check

    gate = gate_check(coeffs, rho.domain, 0, 0.5, boundary_samples=16)
    if gate["sup_c_bar"] >= 0:
        raise GateError("limit problem requires c_bar < 0 on the boundary")

    def bval(x):
        return coeffs.f_bar_at(x) / coeffs.c_bar_at(x) if coeffs.f_bar is not None else 0.0

    prev = None
    diffs = []
    for j, d in enumerate(schedule.deltas()):
        fld = _solve_stationary(coeffs, rho, grid, d, bval, artificial_data)
        if prev is not None:
            diff = float(np.abs(fld.values - prev.values).max())
            diffs.append(diff)
            if diff < schedule.eps:
                fld.meta["viscosity"] = {"stabilized": True, "stages": j + 1, "diffs": diffs}
                return fld, fld.meta["viscosity"]
        prev = fld
    prev.meta["viscosity"] = {"stabilized": bool(diffs and diffs[-1] < schedule.eps),
                              "stages": schedule.max_stages, "diffs": diffs}
    return prev, prev.meta["viscosity"]


def long_time_run(coeffs, rho, phi, h, grid: GridSpec, T_max: float,
                  window: float = 1.0, delta: float = 0.0,
                  growth_bound: Optional[float] = None, **kw):
    """March to T_max and report per-window sup norms.

    grid.M is interpreted per unit time; instability beyond growth_bound
    aborts with a diagnostic.
    """
    steps = int(round(grid.M * T_max))
    g = GridSpec(N=grid.N, M=steps, gamma=grid.gamma, theta=grid.theta)
    fld = solve_ibvp(coeffs, rho, phi, h, g, delta=delta, T=T_max, **kw)
    if growth_bound is not None and fld.sup_abs() > growth_bound:
        raise NumericError(
            f"solution exceeded the a priori bound {growth_bound:g}: {fld.sup_abs():g}")
    edges = np.arange(0.0, T_max + 1e-12, window)
    windows = [(float(a), float(min(a + window, T_max))) for a in edges[:-1]]
    sups = [fld.sup_abs(t0, t1) for (t0, t1) in windows]
    fld.meta["windows"] = windows
    fld.meta["window_sup"] = sups
    return fld, windows, sups
