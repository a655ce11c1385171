"""Exact solution / right-hand-side pairs with capped boundary regularity.

The construction takes constant operator coefficients a > 0, b, c, a
non-integer exponent s = k + alpha, and a smooth seed function, and builds

    u = exp(-tau t) * sum_i psi_i rho^(s+i),    tau = -P(s),

together with the f for which L u = f holds identically, where
L = a rho^2 Lap + b rho grad(rho).grad + c - d_t and
P(mu) = a mu (mu - 1) + b mu + c.  Each psi_i comes from a recursion that
cancels the lower-order terms; the factor (|grad rho|^2 - 1)/rho appearing
there is a removable singularity for the canonical defining functions and
is simplified symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import sympy as sp

from .fields import CoefficientSet, SmoothFunction, space_time_symbols
from .geometry import DefiningFunction, Domain, make_defining_function

__all__ = ["ManufacturedSpec", "ManufacturedSolution", "SpecError", "build", "residual_check"]


class SpecError(ValueError):
    """Invalid construction parameters."""


@dataclass(frozen=True)
class ManufacturedSpec:
    """Parameters of the constructive family.

    The operator is L = a rho^2 Lap + b rho grad(rho).grad + c - d_t with
    constants a > 0, b, c.  ``s`` must be a positive non-integer and the
    non-degeneracy condition a(2s + i - 1) + b != 0 must hold for
    i = 1..m.  ``psi0`` is a smooth seed (sympy expression or string).
    """

    a: float
    b: float
    c: float
    s: float
    m: int
    domain: Domain
    psi0: object = 1

    def char_poly(self, mu):
        return self.a * mu * (mu - 1) + self.b * mu + self.c

    def validate(self):
        if self.a <= 0:
            raise SpecError("a > 0 required")
        if self.s <= 0 or float(self.s) == int(self.s):
            raise SpecError("s must be positive and non-integer")
        if self.m < 0:
            raise SpecError("m >= 0 required")
        for i in range(1, self.m + 1):
            if abs(self.a * (2 * self.s + i - 1) + self.b) < 1e-14:
                raise SpecError(f"degenerate recursion: a(2s+{i}-1)+b = 0 at i={i}")


@dataclass(frozen=True)
class ManufacturedSolution:
    spec: ManufacturedSpec
    rho: DefiningFunction
    tau: float
    psis: tuple            # sympy expressions psi_0..psi_m
    u_expr: sp.Expr
    f_expr: sp.Expr
    u: SmoothFunction
    f_eval: object

    @property
    def regularity(self):
        """(k, alpha, positive root of P); in the stationary regime mu+ = s."""
        k = int(np.floor(self.spec.s))
        alpha = self.spec.s - k
        a, b, c = self.spec.a, self.spec.b, self.spec.c
        disc = (b - a) ** 2 - 4 * a * c
        mu_plus = (-(b - a) + np.sqrt(disc)) / (2 * a)
        return k, alpha, float(mu_plus)

    def coefficient_set(self) -> CoefficientSet:
        """The operator fields in the general form: b_i = b * d_i rho."""
        spec = self.spec
        n = spec.domain.n
        grads = [sp.diff(self.rho.expr, s) for s in self.rho.symbols]
        return CoefficientSet.build(
            n=n,
            a=spec.a,
            b=[spec.b * g for g in grads] if n > 1 else spec.b * grads[0],
            c=spec.c, f=self.f_expr,
            lam=spec.a, Lam=spec.a,
            a_bar=spec.a,
            b_bar=[spec.b * g for g in grads] if n > 1 else spec.b * grads[0],
            c_bar=spec.c, f_bar=sp.Integer(0) if self.tau > 0 else self.f_expr,
        )

    def initial_value(self):
        """phi(x) = u(x, 0) as a sympy expression."""
        _, t = space_time_symbols(self.spec.domain.n)
        return self.u_expr.subs(t, 0)

    def boundary_data(self) -> dict:
        """h = 0 on the degenerate boundary; u1 status depends on s."""
        s = self.spec.s
        return {
            "phi": self.initial_value(),
            "h": sp.Integer(0),
            "u1": sp.Integer(0) if s > 1 else None,
            "normal_derivative_unbounded": s < 1,
        }

    def sup_profile(self) -> float:
        """sup over the domain of |sum_i psi_i rho^(s+i)| by dense sampling."""
        pts = self.spec.domain.interior_samples(4000, rng=1)
        _, t = space_time_symbols(self.spec.domain.n)
        prof = sp.lambdify(self.rho.symbols, self.u_expr.subs(t, 0), modules="numpy")
        vals = [abs(float(prof(*np.atleast_1d(x)))) for x in pts]
        return float(max(vals))


def build(spec: ManufacturedSpec) -> ManufacturedSolution:
    """Run the cancellation recursion and assemble (u, f) with derivatives."""
    spec.validate()
    rho = make_defining_function(spec.domain)
    xs = rho.symbols
    _, t = space_time_symbols(spec.domain.n)
    r = rho.expr

    grad_r = [sp.diff(r, s) for s in xs]
    lap_r = sum(sp.diff(r, s, 2) for s in xs)
    grad_sq = sum(g**2 for g in grad_r)

    # (|grad rho|^2 - 1)/rho must cancel exactly for the canonical catalog
    sing = sp.cancel((grad_sq - 1) / r)
    _, den = sp.fraction(sp.together(sing))
    if (den.free_symbols & set(xs)) or sp.simplify(sing * r - (grad_sq - 1)) != 0:
        raise SpecError("non-removable (|grad rho|^2 - 1)/rho for this rho")

    a, b = spec.a, spec.b
    s = sp.Rational(spec.s) if float(spec.s) == float(sp.Rational(spec.s)) else sp.Float(spec.s)
    tau = -spec.char_poly(spec.s)

    psis = [sp.sympify(spec.psi0)]
    for i in range(1, spec.m + 1):
        prev = psis[-1]
        si = s + i
        denom = spec.char_poly(spec.s + i) + tau  # = a i (2s + i - 1) + b i
        grad_prev_dot = sum(sp.diff(prev, xs[j]) * grad_r[j] for j in range(len(xs)))
        lap_prev = sum(sp.diff(prev, sym, 2) for sym in xs)
        num_i = ((si - 1) * (a * (si - 2) + b) * sing * prev
                 + (a * (si - 1) * prev * lap_r + (2 * a * (si - 1) + b) * grad_prev_dot)
                 + a * lap_prev * r)
        psis.append(sp.simplify(-num_i / denom))

    u_expr = sp.exp(-tau * t) * sum(p * r**(s + i) for i, p in enumerate(psis))

    # residual bracket at depth m, carrying the factor rho^(s+m+1)
    pm = psis[-1]
    sm = s + spec.m
    grad_pm_dot = sum(sp.diff(pm, xs[j]) * grad_r[j] for j in range(len(xs)))
    lap_pm = sum(sp.diff(pm, sym, 2) for sym in xs)
    bracket = (sm * (a * (sm - 1) + b) * sing * pm
               + (a * sm * pm * lap_r + (2 * a * sm + b) * grad_pm_dot)
               + a * lap_pm * r)
    f_expr = sp.exp(-tau * t) * r**(sm + 1) * bracket

    u_fn = SmoothFunction.from_expr(u_expr, spec.domain.n)
    args = xs + (t,)
    f_lam = sp.lambdify(args, f_expr, modules="numpy")
    f_eval = lambda x, tt: float(f_lam(*np.atleast_1d(x), tt))

    return ManufacturedSolution(spec, rho, float(tau), tuple(psis),
                                u_expr, f_expr, u_fn, f_eval)


def residual_check(sol: ManufacturedSolution, samples: int = 1000,
                   t_max: float = 1.0, rng: Optional[int] = 0) -> float:
    """Max |Lu - f| over random interior points using analytic derivatives."""
    from .fields import apply_operator

    coeffs = sol.coefficient_set()
    gen = np.random.default_rng(rng)
    pts = sol.spec.domain.interior_samples(samples, rng=gen)
    ts = gen.random(samples) * t_max
    worst = 0.0
    for x, tt in zip(pts, ts):
        lu = apply_operator(coeffs, sol.rho, sol.u, x, float(tt))
        worst = max(worst, abs(lu - sol.f_eval(x, float(tt))))
    return worst
