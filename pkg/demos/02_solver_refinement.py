"""Grid refinement study against an exact decaying solution.

The theta-scheme (backward Euler by default) uses a grid graded like
xi^2 toward the degenerate endpoints and upwinds the first-order term by
the sign of rho b.  Against the exact solution u = e^{-9t/4} sqrt(x(1-x))
the max-node error decreases under simultaneous space-time refinement;
the observed least-squares order exceeds 1 (the boundary layer at the
first interior node limits the global rate below the interior order 2).
"""

import time
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import sympy as sp

from degenparab import (Domain, GridSpec, ManufacturedSpec, build,
                        make_defining_function, solve_ibvp)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

dom = Domain.interval(0.0, 1.0)
rho = make_defining_function(dom)
sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=dom))
coeffs = sol.coefficient_set()

t_sym = sp.Symbol("t")
u_exact = sp.lambdify(rho.symbols + (t_sym,), sol.u_expr, "numpy")
phi_l = sp.lambdify(rho.symbols, sol.initial_value(), "numpy")
phi = lambda x: float(phi_l(*np.atleast_1d(x)))

Ns = [40, 80, 160, 320]
errs = []
t0 = time.perf_counter()
for N in Ns:
    fld = solve_ibvp(coeffs, rho, phi, lambda x, t: 0.0,
                     GridSpec(N=N, M=N * N // 4, gamma=2.0), T=1.0)
    exact = u_exact(fld.coords[0][None, :], fld.times[:, None])
    errs.append(float(np.abs(fld.values - exact).max()))
    print(f"N = {N:4d}  M = {N * N // 4:6d}  max error = {errs[-1]:.3e}")

order = float(-np.polyfit(np.log2(Ns), np.log2(errs), 1)[0])
print(f"least-squares observed order: {order:.3f}  "
      f"({time.perf_counter() - t0:.1f} s total)")

fig, ax = plt.subplots(figsize=(5, 4))
ax.loglog(Ns, errs, "o-", label="max node error")
ax.loglog(Ns, [errs[0] * (Ns[0] / N) for N in Ns], "--", label="slope 1")
ax.set_xlabel("N")
ax.set_ylabel("error")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "refinement.png", dpi=120)
print(f"wrote {OUT / 'refinement.png'}")
