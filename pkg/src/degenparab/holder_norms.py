"""Weighted Hölder norm estimators and windowed convergence metrics.

Everything here is a certified *lower bound*: seminorms are estimated as
maxima of difference quotients over finite pair sets, each reported value
carrying a witness pair.  The weighted parabolic norm of order k sums the
Hölder norms of D^beta u for |beta| <= k together with the degenerate
weights rho D^{k+1}, rho^2 D^{k+2} and the time derivatives, following the
definition used for the degenerate problem; the asterisk variant replaces
the space-time seminorm of the time-derivative terms by the spatial
seminorm taken uniformly in time.

Windowed convergence measures a norm of u - g over consecutive unit time
windows; keeping it distinct from per-time-slice norms is the point — a
field whose slices decay can still fail to converge in a window norm when
its time derivative does not decay.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import sympy as sp

from .fields import ConfigurationError, space_time_symbols
from .geometry import BoundaryPoint, DefiningFunction

__all__ = [
    "HolderReport",
    "ConvergenceTrace",
    "parabolic_distance",
    "holder_seminorm",
    "holder_norm",
    "weighted_norm",
    "slice_norm",
    "fit_boundary_exponent",
    "windowed_convergence",
    "assembly_check",
    "sample_cloud",
]

ALL_PAIRS_LIMIT = 2000


@dataclass
class HolderReport:
    """A lower-bound norm estimate with reproducible witnesses."""

    alpha: float
    components: dict                    # name -> {"value", "witness"}
    total: float
    strategy: str
    lower_bound: bool = True
    memberships: dict = field(default_factory=dict)

    def component(self, name: str) -> float:
        return self.components[name]["value"]


@dataclass
class ConvergenceTrace:
    cls: str
    windows: list                       # [(T0, T1), ...]
    values: list
    verdict: str                        # "converging" | "not-converging"
    eps: float


def parabolic_distance(X, Y) -> float:
    """max(|x1 - x2|, |t1 - t2|^(1/2)) for X = (x, t)."""
    x1, t1 = X
    x2, t2 = Y
    dx = float(np.linalg.norm(np.atleast_1d(x1) - np.atleast_1d(x2)))
    return max(dx, abs(float(t1) - float(t2)) ** 0.5)


# ---------------------------------------------------------------------------
# seminorm estimation over point clouds

def _pair_indices(K: int, strategy: str, seed: int, max_pairs: int):
    if strategy == "all-pairs" or (strategy == "auto" and K <= ALL_PAIRS_LIMIT):
        i, j = np.triu_indices(K, k=1)
        return i, j, "all-pairs"
    rng = np.random.default_rng(seed)
    i = rng.integers(0, K, size=max_pairs)
    j = rng.integers(0, K, size=max_pairs)
    keep = i != j
    return i[keep], j[keep], f"random-pairs(seed={seed}, K={max_pairs})"


def holder_seminorm(points: np.ndarray, times: np.ndarray, values: np.ndarray,
                    alpha: float, strategy: str = "auto", seed: int = 0,
                    max_pairs: int = 200_000, mode: str = "parabolic") -> HolderReport:
    """Max difference quotient |u(X)-u(Y)| / s(X,Y)^alpha over a pair set.

    mode "spatial" restricts to equal-time pairs (the [.]_x seminorm);
    mode "temporal" to equal-space pairs.  All-pairs is used automatically
    for at most 2000 samples, otherwise seeded random pairs.
    """
    if not (0 < alpha <= 1):
        raise ConfigurationError("alpha must lie in (0, 1]")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    K = len(values)
    if K < 2:
        raise ConfigurationError("need at least two samples")
    i, j, strat = _pair_indices(K, strategy, seed, max_pairs)

    dx = np.linalg.norm(points[i] - points[j], axis=1)
    dt = np.abs(times[i] - times[j])
    if mode == "parabolic":
        dist = np.maximum(dx, np.sqrt(dt))
    elif mode == "spatial":
        keep = dt < 1e-14
        i, j, dx, dt = i[keep], j[keep], dx[keep], dt[keep]
        dist = dx
    elif mode == "temporal":
        keep = dx < 1e-14
        i, j, dx, dt = i[keep], j[keep], dx[keep], dt[keep]
        dist = np.sqrt(dt)
    else:
        raise ConfigurationError(f"unknown seminorm mode {mode!r}")

    ok = dist > 0
    i, j, dist = i[ok], j[ok], dist[ok]
    if len(dist) == 0:
        return HolderReport(alpha, {"seminorm": {"value": 0.0, "witness": None}},
                            0.0, strat)
    quot = np.abs(values[i] - values[j]) / dist**alpha
    best = int(np.argmax(quot))  # argmax takes the first = lexicographically least pair
    val = float(quot[best])
    witness = ((points[i[best]].tolist(), float(times[i[best]])),
               (points[j[best]].tolist(), float(times[j[best]])))
    return HolderReport(alpha, {"seminorm": {"value": val, "witness": witness}},
                        val, strat)


def holder_norm(points, times, values, alpha, **kw) -> HolderReport:
    """sup |u| plus the Hölder seminorm, both witnessed."""
    semi = holder_seminorm(points, times, values, alpha, **kw)
    ks = int(np.argmax(np.abs(values)))
    sup = float(np.abs(values[ks]))
    comps = {
        "sup": {"value": sup,
                "witness": (np.atleast_2d(points)[ks].tolist(), float(times[ks]))},
        "seminorm": semi.components["seminorm"],
    }
    return HolderReport(alpha, comps, sup + semi.total, semi.strategy)


# ---------------------------------------------------------------------------
# sampling helpers

def sample_cloud(domain, nx: int, times: Sequence[float]):
    """Tensor cloud: nx+1 spatial nodes (1-D) or (nx+1)^2 (2-D) x times."""
    if domain.kind == "interval":
        a, b = domain.params
        xs = np.linspace(a, b, nx + 1)[:, None]
    elif domain.kind == "half_strip":
        r = domain.params[0]
        g1 = np.linspace(-r, r, nx + 1)
        g2 = np.linspace(0.0, r, nx + 1)
        xs = np.column_stack([m.ravel() for m in np.meshgrid(g1, g2, indexing="ij")])
    else:
        R, c = domain.params
        g = np.linspace(-R, R, nx + 1)
        xs = np.column_stack([m.ravel() for m in np.meshgrid(g + c[0], g + c[1],
                                                             indexing="ij")])
        xs = xs[np.hypot(xs[:, 0] - c[0], xs[:, 1] - c[1]) <= R]
    times = np.asarray(times, dtype=float)
    pts = np.repeat(xs, len(times), axis=0)
    tts = np.tile(times, len(xs))
    return pts, tts


def _finite_samples(points, times, vals):
    """Drop samples where a weighted piece takes the indeterminate 0*inf.

    Products like rho * D u evaluate to nan exactly on the boundary lattice
    when the derivative blows up while the weight vanishes; the seminorm is
    a sup over the remaining pairs, and genuine blow-up still registers
    through the neighbouring interior nodes and the membership flags.
    """
    m = np.isfinite(vals)
    if m.all():
        return points, times, vals
    return points[m], times[m], vals[m]


def _multi_indices(n: int, order: int):
    """All spatial multi-indices of the exact given order."""
    if n == 1:
        return [(order,)]
    return [(order - k, k) for k in range(order + 1)]


def _diff(expr, xs, beta):
    out = expr
    for sym, p in zip(xs, beta):
        if p:
            out = sp.diff(out, sym, p)
    return out


def _eval_expr(expr, n, points, times):
    xs, t = space_time_symbols(n)
    fn = sp.lambdify(xs + (t,), expr, modules="numpy")
    cols = [points[:, i] for i in range(n)]
    # weighted pieces may hit 0 * inf on the boundary; callers mask those
    with np.errstate(all="ignore"):
        out = np.asarray(fn(*cols, times), dtype=float)
    return np.broadcast_to(out, (len(points),)).copy()


def weighted_norm(u: Union[sp.Expr, str], rho: DefiningFunction, k: int,
                  alpha: float, times: Sequence[float], nx: int = 60,
                  asterisk: bool = False, seed: int = 0,
                  membership_depths: int = 6) -> HolderReport:
    """Weighted parabolic norm of order k from an analytic expression.

    Sums ||D^beta u||_{C^{2+alpha}} over |beta| <= k (each expanding into
    the unweighted, rho-weighted first, rho^2-weighted second, and time
    derivative pieces) plus the higher time derivatives D^beta d_t^i u for
    |beta| + 2i <= k+2, i >= 2.  Membership flags extrapolate
    |rho D^{k+1} u| and |rho^2 D^{k+2} u| along the inward normal.
    """
    domain = rho.domain
    n = domain.n
    xs, t = space_time_symbols(n)
    expr = sp.sympify(u)
    points, tts = sample_cloud(domain, nx, times)
    r = rho.expr

    def norm_of(e, tag, mode="parabolic"):
        vals = _eval_expr(e, n, points, tts)
        p, s, vals = _finite_samples(points, tts, vals)
        rep = holder_norm(p, s, vals, alpha, seed=seed, mode=mode)
        return rep.total, rep.components["seminorm"]["witness"]

    components = {}
    total = 0.0
    for order in range(k + 1):
        for beta in _multi_indices(n, order):
            base = _diff(expr, xs, beta)
            tag = f"D{beta}"
            pieces = {f"{tag}u": base, f"{tag}dt": sp.diff(base, t)}
            for b1 in _multi_indices(n, 1):
                pieces[f"{tag}rhoD{b1}"] = r * _diff(base, xs, b1)
            for b2 in _multi_indices(n, 2):
                pieces[f"{tag}rho2D{b2}"] = r**2 * _diff(base, xs, b2)
            for name, e in pieces.items():
                mode = "parabolic"
                if asterisk and ("dt" in name):
                    mode = "spatial"
                val, wit = norm_of(e, name, mode=mode)
                components[name] = {"value": val, "witness": wit}
                total += val
    for i in range(2, (k + 2) // 2 + 1):
        for order in range(k + 2 - 2 * i + 1):
            for beta in _multi_indices(n, order):
                e = _diff(sp.diff(expr, t, i), xs, beta)
                mode = "spatial" if asterisk else "parabolic"
                val, wit = norm_of(e, f"D{beta}dt{i}", mode=mode)
                components[f"D{beta}dt{i}"] = {"value": val, "witness": wit}
                total += val

    memberships = _membership_flags(expr, rho, k, times, membership_depths)
    return HolderReport(alpha, components, total,
                        f"tensor cloud nx={nx}, nt={len(times)}",
                        memberships=memberships)


def _membership_flags(expr, rho, k, times, depths):
    """Extrapolate the weighted top derivatives toward the boundary.

    Reports the decay rate of |rho D^{k+1} u| and |rho^2 D^{k+2} u| along
    the inward normal at dyadic depths; a positive rate indicates the
    boundary-vanishing condition, but extrapolation cannot distinguish
    o(1) from a tiny constant, so the rate is reported alongside the flag.
    """
    domain = rho.domain
    n = domain.n
    xs, t = space_time_symbols(n)
    out = {}
    bps = domain.boundary_points(2 if domain.kind == "interval" else 4)
    for wname, weight, order in ((f"rhoD{k+1}", rho.expr, k + 1),
                                 (f"rho2D{k+2}", rho.expr**2, k + 2)):
        worst_rate = np.inf
        for bp in bps:
            vals = []
            ds = [2.0 ** (-j) for j in range(3, 3 + depths)]
            for d in ds:
                x = bp.x + d * bp.normal
                v = 0.0
                for beta in _multi_indices(n, order):
                    e = weight * _diff(expr, xs, beta)
                    for tt in times:
                        subs = dict(zip(xs, x))
                        subs[t] = tt
                        v = max(v, abs(float(sp.sympify(e).subs(subs))))
                vals.append(v)
            vals = np.array(vals)
            if vals.max() < 1e-13:
                continue
            good = vals > 1e-300
            rate = np.polyfit(np.log(np.array(ds)[good]), np.log(vals[good]), 1)[0]
            worst_rate = min(worst_rate, rate)
        if worst_rate is np.inf:
            out[wname] = {"rate": None, "vanishes": True}
        else:
            out[wname] = {"rate": float(worst_rate), "vanishes": bool(worst_rate > 0.05)}
    return out


def slice_norm(u, rho: DefiningFunction, k: int, alpha: float, t_value: float,
               nx: int = 200, seed: int = 0) -> HolderReport:
    """Per-time-slice weighted norm (no time-derivative content).

    For k = 0 this is ||w||_{C^alpha} + ||rho D w||_{C^alpha} +
    ||rho^2 D^2 w||_{C^alpha} of the slice; for k >= 1 it is
    sum_{|beta| <= k-1} sup |D^beta w| plus the slice norm of each D^beta w
    with |beta| = k.
    """
    domain = rho.domain
    n = domain.n
    xs, t = space_time_symbols(n)
    w = sp.sympify(u).subs(t, t_value)
    points, tts = sample_cloud(domain, nx, [0.0])
    r = rho.expr

    def norm_of(e):
        vals = _eval_expr(e, n, points, tts)
        p, s, vals = _finite_samples(points, tts, vals)
        return holder_norm(p, s, vals, alpha, seed=seed, mode="spatial")

    components = {}
    total = 0.0
    for order in range(max(k - 1, 0) + 1) if k >= 1 else []:
        for beta in _multi_indices(n, order):
            vals = _eval_expr(_diff(w, xs, beta), n, points, tts)
            vals = vals[np.isfinite(vals)]
            sup = float(np.abs(vals).max())
            components[f"sup D{beta}"] = {"value": sup, "witness": None}
            total += sup
    top = _multi_indices(n, k) if k >= 1 else [tuple([0] * n)]
    for beta in top:
        base = _diff(w, xs, beta)
        for name, e in ((f"D{beta}", base),
                        *((f"D{beta}rhoD{b1}", r * _diff(base, xs, b1))
                          for b1 in _multi_indices(n, 1)),
                        *((f"D{beta}rho2D{b2}", r**2 * _diff(base, xs, b2))
                          for b2 in _multi_indices(n, 2))):
            rep = norm_of(e)
            components[name] = {"value": rep.total, "witness":
                                rep.components["seminorm"]["witness"]}
            total += rep.total
    return HolderReport(alpha, components, total, f"slice t={t_value}, nx={nx}")


def fit_boundary_exponent(u: Callable, h: Callable, x0: BoundaryPoint,
                          depths: Sequence[int] = tuple(range(3, 11)),
                          times: Sequence[float] = (0.0,),
                          drop_coarsest: int = 2) -> dict:
    """Power-law fit of sup_t |u(x0 + d nu, t) - h(x0, t)| against depth d.

    Depths are dyadic, d_j = 2^-j; the coarsest two are dropped as
    pre-asymptotic.  Returns the fitted exponent, fit residual, and the
    raw (d_j, m_j) table; flat data is flagged instead of fitted.
    """
    depths = sorted(depths)
    if len(depths) < 4:
        raise ConfigurationError("need at least 4 dyadic depths")
    ds, ms = [], []
    for j in depths:
        d = 2.0 ** (-j)
        x = x0.x + d * x0.normal
        m = max(abs(float(u(x, tt)) - float(h(x0.x, tt))) for tt in times)
        ds.append(d)
        ms.append(m)
    table = list(zip(ds, ms))
    ds_f = np.array(ds[drop_coarsest:])
    ms_f = np.array(ms[drop_coarsest:])
    if np.all(ms_f < 1e-300):
        return {"exponent": None, "flat": True, "table": table, "residual": None}
    L = np.log(ds_f)
    Mv = np.log(ms_f)
    A = np.vstack([L, np.ones_like(L)]).T
    sol, res, *_ = np.linalg.lstsq(A, Mv, rcond=None)
    resid = float(np.sqrt(res[0] / len(L))) if len(res) else 0.0
    return {"exponent": float(sol[0]), "flat": False, "residual": resid,
            "table": table, "depths_used": depths[drop_coarsest:]}


def _as_callable(g, field_like):
    """Normalize g (0, scalar, callable, sympy expr, SpaceTimeField) to callable."""
    if g is None:
        return lambda x, t: 0.0
    if np.isscalar(g) and not isinstance(g, str):
        return lambda x, t, _v=float(g): _v
    if isinstance(g, (sp.Expr, str)):
        n = field_like
        xs, t = space_time_symbols(n)
        fn = sp.lambdify(xs + (t,), sp.sympify(g), modules="numpy")
        return lambda x, tt: float(fn(*np.atleast_1d(x), tt))
    return g


def _field_interp(fld):
    """Linear space-time interpolation of a SpaceTimeField."""
    from scipy.interpolate import RegularGridInterpolator

    axes = (fld.times,) + tuple(fld.coords)
    itp = RegularGridInterpolator(axes, fld.values, bounds_error=False,
                                  fill_value=None)
    return lambda x, t: float(itp(np.concatenate(([t], np.atleast_1d(x)))))


def windowed_convergence(u, g, windows: Sequence, rho: Optional[DefiningFunction] = None,
                         k: int = 0, alpha: float = 0.5, eps: float = 1e-3,
                         nx: int = 50, nt: int = 40, seed: int = 0,
                         domain=None) -> ConvergenceTrace:
    """Norm of u - g over each unit window [T, T+1].

    For k = 0 the window norm is the plain parabolic Hölder norm of the
    sampled difference (works for discrete fields); weighted classes
    (k >= 1) require sympy expressions for u and g so derivatives are
    analytic.  Verdict is "converging" when the tail is decreasing and the
    final value is below eps.
    """
    values = []
    symbolic = isinstance(u, (sp.Expr, str)) and (
        g is None or np.isscalar(g) or isinstance(g, (sp.Expr, str)))
    if k >= 1 and not symbolic:
        raise ConfigurationError("weighted window classes need symbolic input")
    if symbolic and rho is None:
        raise ConfigurationError("symbolic input requires rho")
    if symbolic:
        n = rho.domain.n
        xs, t = space_time_symbols(n)
        diff_expr = sp.sympify(u) - sp.sympify(g if g is not None else 0)
        for (t0, t1) in windows:
            tt = np.linspace(t0, t1, nt)
            rep = weighted_norm(diff_expr, rho, k, alpha, tt, nx=nx, seed=seed) \
                if k >= 1 else None
            if rep is None:
                points, tts = sample_cloud(rho.domain, nx, tt)
                vals = _eval_expr(diff_expr, n, points, tts)
                points, tts, vals = _finite_samples(points, tts, vals)
                rep = holder_norm(points, tts, vals, alpha, seed=seed)
            values.append(rep.total)
    else:
        dom = domain if domain is not None else (rho.domain if rho else u.domain)
        ufun = _field_interp(u) if hasattr(u, "values") else u
        gfun = _as_callable(g, dom.n) if not hasattr(g, "values") else _field_interp(g)
        for (t0, t1) in windows:
            tt = np.linspace(t0, t1, nt)
            points, tts = sample_cloud(dom, nx, tt)
            vals = np.array([ufun(x, s) - gfun(x, s) for x, s in zip(points, tts)])
            rep = holder_norm(points, tts, vals, alpha, seed=seed)
            values.append(rep.total)
    tail = values[-min(5, len(values)):]
    decreasing = all(tail[i + 1] <= tail[i] + 1e-15 for i in range(len(tail) - 1))
    verdict = "converging" if (decreasing and values[-1] < eps) else "not-converging"
    return ConvergenceTrace(f"C^{{{k},{alpha}}}", [tuple(w) for w in windows],
                            values, verdict, eps)


def assembly_check(interior_constant: float, trace_seminorm: float,
                   global_estimate: float, hypotheses_ok: bool = True) -> dict:
    """Global seminorm against the assembled bound 4A + 5[w0].

    A is the interior window constant and [w0] the boundary trace
    seminorm; the inequality must hold for estimator outputs because they
    lower-bound the quantity the assembled constant dominates.
    """
    if not hypotheses_ok:
        return {"verdict": "not-applicable", "bound": None,
                "estimate": global_estimate}
    bound = 4.0 * interior_constant + 5.0 * trace_seminorm
    return {"verdict": "pass" if global_estimate <= bound + 1e-12 else "fail",
            "bound": bound, "estimate": global_estimate,
            "slack": bound - global_estimate}
