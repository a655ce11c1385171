"""Boundary regularity: exponent recovery, the root gate, and barriers.

The characteristic polynomial P(mu) = mu(mu-1) a + mu b + c at a boundary
point has a single positive root when c < 0, and that root caps the
attainable boundary regularity.  Three independent instruments see the
same threshold:

  * a dyadic fit of |u - h| along the inward normal recovers the Holder
    exponent of a solution family member;
  * gate_check tests sup P(k + alpha) < 0 over the boundary lattice;
  * find_barrier searches dyadic (A, K) for a certified supersolution
    w = |x - x0|^mu + K rho^mu with L w <= -C0 |x - x0|^mu, which exists
    below the root and not above it.
"""

import numpy as np
import sympy as sp

from degenparab import (BoundaryPoint, CoefficientSet, Domain,
                        ManufacturedSpec, build, find_barrier,
                        fit_boundary_exponent, gate_check,
                        make_defining_function)

dom = Domain.interval(0.0, 1.0)
rho = make_defining_function(dom)
bp = BoundaryPoint(np.array([0.0]), np.array([1.0]))
t_sym = sp.Symbol("t")

# --- exponent recovery ------------------------------------------------------
sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=dom))
u = sp.lambdify(rho.symbols + (t_sym,), sol.u_expr, "numpy")
fit = fit_boundary_exponent(lambda x, t: float(u(*x, t)), lambda x, t: 0.0,
                            bp, times=(0.0, 0.5))
print(f"s = 0.5 family member: fitted boundary exponent {fit['exponent']:.4f}")

# --- the gate at the positive root 2.5 --------------------------------------
cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-3.75, f=0,
                          a_bar=1.0, b_bar=0.0, c_bar=-3.75, f_bar=0)
for mu in (2.4, 2.6):
    g = gate_check(cs, dom, int(mu), mu - int(mu))
    print(f"gate at mu = {mu}: passed = {g['passed']}  sup P = {g['sup_P']:+.3f}")

# --- barrier certificates straddling the root -------------------------------
for mu in (2.4, 2.6):
    cert = find_barrier(cs, rho, mu, bp, "time_independent")
    if cert.found:
        print(f"barrier at mu = {mu}: found, C0 = {cert.C0:.3e}, "
              f"K = {cert.K:g}, radius = {cert.radius}")
    else:
        print(f"barrier at mu = {mu}: no certificate on the search lattice "
              f"(worst slack {cert.worst_slack:.3e})")
