"""Long-time behavior: decay rates, stationary limits, and the window test.

Three experiments:

  1. The decaying family member loses mass like e^{-2.25 t}; a windowed
     sup-norm fit recovers the rate (with the small implicit-Euler bias).
  2. With time-independent data (c = -2, f = rho) the evolution converges
     to the vanishing-viscosity solution of the stationary problem, and
     the windowed Holder norm of the difference decays geometrically.
  3. Per-slice norms can decay while norms over unit time windows stay
     large: f = x^{5/2} sin((t+1)^2)/(t+1) has slices shrinking like 1/t
     but a time derivative ~ 2 x^{5/2} cos((t+1)^2) that never decays.
     Windowed convergence is strictly stronger than slice convergence.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import sympy as sp

from degenparab import (CoefficientSet, DeltaSchedule, Domain, GridSpec,
                        ManufacturedSpec, build, long_time_report,
                        long_time_run, make_defining_function, slice_norm,
                        solve_elliptic_limit, windowed_convergence)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

dom = Domain.interval(0.0, 1.0)
rho = make_defining_function(dom)

# --- 1: decay-rate fit ------------------------------------------------------
sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=dom))
phl = sp.lambdify(rho.symbols, sol.initial_value(), "numpy")
run, windows, sups = long_time_run(sol.coefficient_set(), rho,
                                   lambda x: float(phl(*np.atleast_1d(x))),
                                   lambda x, t: 0.0,
                                   GridSpec(N=80, M=256), T_max=7.0)
fit = long_time_report(run, 0)["fit"]
print(f"decay-rate fit: nu_hat = {fit['nu_hat']:.4f} "
      f"(true rate 2.25, {fit['kind']} fit, R^2 = {fit['r2']:.5f})")

# --- 2: convergence to the stationary limit ---------------------------------
cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-2.0, f=rho.expr,
                          a_bar=1.0, b_bar=0.0, c_bar=-2.0, f_bar=rho.expr)
v, info = solve_elliptic_limit(cs, rho, GridSpec(N=80, M=2),
                               DeltaSchedule(1e-2, 0.25, 20, 1e-10))
print(f"viscosity schedule stabilized after {info['stages']} stages")
ev, _, _ = long_time_run(cs, rho, lambda x: 0.0, lambda x, t: 0.0,
                         GridSpec(N=80, M=64), T_max=10.0)
rep = long_time_report(ev, v, alpha=0.5, with_holder=True)
print("windowed C^{0,1/2} norm of u(t) - v:")
for (t0, _), val in zip(rep["windows"], rep["holder"]):
    print(f"  [{t0:4.1f}, {t0 + 1:4.1f}]  {val:.3e}")

fig, ax = plt.subplots(figsize=(5, 4))
ax.semilogy([w[0] for w in rep["windows"]], rep["holder"], "o-")
ax.set_xlabel("window start T")
ax.set_ylabel(r"window norm of $u - v$")
fig.tight_layout()
fig.savefig(OUT / "stationary_limit.png", dpi=120)

# --- 3: the slice/window dichotomy ------------------------------------------
x1, t_sym = sp.symbols("x1 t")
f = x1**sp.Rational(5, 2) * sp.sin((t_sym + 1)**2) / (t_sym + 1)
print("\nslice norms vs window norms for x^{5/2} sin((t+1)^2)/(t+1):")
for T in (10, 20, 40):
    sl = slice_norm(f, rho, 2, 0.5, float(T), nx=200).total
    wi = windowed_convergence(f, 0, [(float(T), float(T + 1))], rho=rho,
                              k=2, alpha=0.5, nx=30, nt=25).values[0]
    print(f"  t = {T:2d}:  slice {sl:8.4f}   window [{T},{T + 1}] {wi:9.2f}")
print("slices decay; windows do not — convergence per slice is not "
      "convergence in windows.")
print(f"wrote {OUT / 'stationary_limit.png'}")
