"""Acceptance gate: nine quantitative criteria, one printed verdict line each.

Each test prints "[criterion N] <name>: PASS/FAIL (<measured>)" before
asserting, so a failing run still reports every measured quantity.
"""

import time

import numpy as np
import pytest
import sympy as sp

from degenparab import cli
from degenparab.boundary_trace import (boundary_limit, compatibility_residual,
                                       trace_h)
from degenparab.fields import CoefficientSet, gate_check
from degenparab.geometry import BoundaryPoint, Domain, make_defining_function
from degenparab.holder_norms import (fit_boundary_exponent, slice_norm,
                                     windowed_convergence)
from degenparab.manufactured import ManufacturedSpec, build, residual_check
from degenparab.solver import (DeltaSchedule, GridSpec, long_time_run,
                               solve_elliptic_limit, solve_ibvp)
from degenparab.verify import (check_linfty_bound, check_max_principle,
                               find_barrier, long_time_report)

DOM = Domain.interval(0.0, 1.0)
RHO = make_defining_function(DOM)
BP0 = BoundaryPoint(np.array([0.0]), np.array([1.0]))


def verdict(n, name, ok, measured):
    print(f"\n[criterion {n}] {name}: {'PASS' if ok else 'FAIL'} ({measured})")
    assert ok, f"criterion {n} ({name}) failed: {measured}"


def test_criterion_1_manufactured_residual():
    worst = 0.0
    for s in (0.5, 1.25, 2.5):
        for m in (0, 1, 2):
            sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=s, m=m,
                                         domain=DOM))
            worst = max(worst, residual_check(sol, samples=1000, rng=0))
    verdict(1, "constructed-solution residual <= 1e-10", worst <= 1e-10,
            f"max residual {worst:.3e}")


def test_criterion_2_solver_convergence():
    t0 = time.perf_counter()
    sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=DOM))
    coeffs = sol.coefficient_set()
    t_sym = sp.Symbol("t")
    u_lam = sp.lambdify(RHO.symbols + (t_sym,), sol.u_expr, "numpy")
    phl = sp.lambdify(RHO.symbols, sol.initial_value(), "numpy")
    phi = lambda x: float(phl(*np.atleast_1d(x)))
    errs = []
    Ns = [40, 80, 160, 320]
    for N in Ns:
        fld = solve_ibvp(coeffs, RHO, phi, lambda x, t: 0.0,
                         GridSpec(N=N, M=N * N // 4, gamma=2.0, theta=1.0),
                         T=1.0)
        exact = u_lam(fld.coords[0][None, :], fld.times[:, None])
        errs.append(float(np.abs(fld.values - exact).max()))
    slope = float(-np.polyfit(np.log2(Ns), np.log2(errs), 1)[0])
    wall = time.perf_counter() - t0
    dec = all(b < a for a, b in zip(errs, errs[1:]))
    ok = dec and slope >= 1.0 and wall < 30.0
    verdict(2, "exact-solution convergence, order >= 1, < 30 s",
            ok, f"errors {['%.3e' % e for e in errs]}, order {slope:.3f}, "
                f"{wall:.1f} s")


def test_criterion_3_exponent_recovery():
    t_sym = sp.Symbol("t")
    sol05 = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=DOM))
    u05 = sp.lambdify(RHO.symbols + (t_sym,), sol05.u_expr, "numpy")
    a1 = fit_boundary_exponent(lambda x, t: float(u05(*x, t)),
                               lambda x, t: 0.0, BP0,
                               times=(0.0, 0.5))["exponent"]
    sol25 = build(ManufacturedSpec(a=1.0, b=0.0, c=-3.75, s=2.5, m=0, domain=DOM))
    d2 = sp.lambdify(RHO.symbols + (t_sym,),
                     sp.diff(sol25.u_expr, RHO.symbols[0], 2), "numpy")
    a2 = fit_boundary_exponent(lambda x, t: float(d2(*x, t)),
                               lambda x, t: 0.0, BP0,
                               depths=tuple(range(3, 15)))["exponent"]
    ok = 0.45 <= a1 <= 0.55 and 0.45 <= a2 <= 0.55
    verdict(3, "boundary exponent recovery in [0.45, 0.55]", ok,
            f"alpha_hat(s=0.5) = {a1:.4f}, alpha_hat(d2, s=2.5) = {a2:.4f}")


def test_criterion_4_gate_sharpness():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-3.75, f=0,
                              a_bar=1.0, b_bar=0.0, c_bar=-3.75, f_bar=0)
    g_lo = gate_check(cs, DOM, 2, 0.4)
    g_hi = gate_check(cs, DOM, 2, 0.6)
    b_lo = find_barrier(cs, RHO, 2.4, BP0, "time_independent")
    b_hi = find_barrier(cs, RHO, 2.6, BP0, "time_independent")
    ok = g_lo["passed"] and not g_hi["passed"] and b_lo.found and not b_hi.found
    verdict(4, "gate and barrier sharp at the positive root 2.5", ok,
            f"gate 2.4/2.6 = {g_lo['passed']}/{g_hi['passed']}, "
            f"barrier 2.4/2.6 = {b_lo.found}/{b_hi.found}")


def test_criterion_5_boundary_trace():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f=1.0)
    tr = trace_h(cs, 0.0, BP0, np.linspace(0.0, 1.0, 101))
    e_closed = abs(tr.values[-1] - (np.exp(-1.0) - 1.0))
    cs_s = CoefficientSet.build(n=1, a=1.0, b=0.0, c="-1+exp(-t)/2",
                                f="1+exp(-t)", a_bar=1.0, b_bar=0.0,
                                c_bar=-1.0, f_bar=1.0)
    times = np.round(np.arange(0.0, 10.0 + 1e-12, 1e-2), 10)
    tr_s = trace_h(cs_s, 0.0, BP0, times)
    comp = max(compatibility_residual(tr), compatibility_residual(tr_s))
    lim = boundary_limit(cs_s, tr_s, [(k, k + 1) for k in range(10)])
    dev = abs(tr_s.values[-1] - lim["limit"])
    ok = e_closed <= 1e-10 and comp <= 1e-7 and dev <= 1e-3
    verdict(5, "boundary trace closed form, compatibility, limit", ok,
            f"closed-form error {e_closed:.2e}, compat {comp:.2e}, "
            f"|h(10) - limit| {dev:.2e}")


def test_criterion_6_long_time_convergence():
    sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=DOM))
    phl = sp.lambdify(RHO.symbols, sol.initial_value(), "numpy")
    fld, _, _ = long_time_run(sol.coefficient_set(), RHO,
                              lambda x: float(phl(*np.atleast_1d(x))),
                              lambda x, t: 0.0,
                              GridSpec(N=80, M=256), T_max=7.0)
    nu = long_time_report(fld, 0)["fit"]["nu_hat"]

    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-2.0, f=RHO.expr,
                              a_bar=1.0, b_bar=0.0, c_bar=-2.0, f_bar=RHO.expr)
    v, _ = solve_elliptic_limit(cs, RHO, GridSpec(N=80, M=2),
                                DeltaSchedule(1e-2, 0.25, 20, 1e-10))
    run, _, _ = long_time_run(cs, RHO, lambda x: 0.0, lambda x, t: 0.0,
                              GridSpec(N=80, M=64), T_max=10.0)
    vals = long_time_report(run, v, alpha=0.5, with_holder=True)["holder"]
    tail = vals[-10:]
    mono = all(b < a for a, b in zip(tail, tail[1:]))
    ok = abs(nu - 2.25) <= 0.05 and mono and vals[-1] < 1e-3
    verdict(6, "decay rate 2.25 +- 0.05 and windowed limit convergence", ok,
            f"nu_hat {nu:.4f}, final window {vals[-1]:.2e}, "
            f"last-10 monotone {mono}")


def test_criterion_7_max_principle_and_linfty():
    cases = [
        CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f=0),
        CoefficientSet.build(n=1, a=1.0, b=1.0, c=-1.0, f=0),
        CoefficientSet.build(n=1, a=2.0, b=-1.0, c=-0.5, f=0),
    ]
    mp_ok = True
    for cs in cases:
        run = solve_ibvp(cs, RHO, lambda x: -1.0,
                         lambda x, t: -float(np.exp(-t)),
                         GridSpec(N=40, M=60), T=1.0, compat_tol=None)
        mp_ok &= check_max_principle(run, cs)["verdict"] == "pass"

    cs2 = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-2.0, f=1.0)
    run2 = solve_ibvp(cs2, RHO, lambda x: 0.0,
                      lambda x, t: -(1 - np.exp(-2 * t)) / 2,
                      GridSpec(N=80, M=200), T=2.0)
    rep = check_linfty_bound(run2, cs2, RHO, c0=0.0)
    sup_u = float(np.abs(run2.values).max())
    ok = mp_ok and rep["verdict"] == "pass" and rep["constant"] <= 1.0 \
        and sup_u <= 0.5 + 1e-2
    verdict(7, "maximum principle and L-infinity comparison bound", ok,
            f"comparison constant {rep['constant']:.3f}, sup|u| {sup_u:.4f}")


def test_criterion_8_window_dichotomy():
    x1, t = sp.symbols("x1 t")
    f = x1**sp.Rational(5, 2) * sp.sin((t + 1)**2) / (t + 1)
    slices, windows = [], []
    for T in (10, 20, 40):
        slices.append(slice_norm(f, RHO, 2, 0.5, float(T), nx=200).total)
        windows.append(windowed_convergence(
            f, 0, [(float(T), float(T + 1))], rho=RHO, k=2, alpha=0.5,
            nx=30, nt=25).values[0])
    ok = slices[0] > slices[1] > slices[2] and slices[2] < 0.2 \
        and all(w >= 1.0 for w in windows)
    verdict(8, "per-slice norms decay below 0.2 while window norms stay >= 1",
            ok, f"slices {['%.3f' % v for v in slices]}, "
                f"windows {['%.0f' % w for w in windows]}")


def test_criterion_9_suite_determinism(tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert cli.main(["--out", str(out), "--seed", "0", "suite"]) == 0
        outs.append(out)
    csvs_a = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*.csv"))
    csvs_b = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*.csv"))
    same_files = csvs_a == csvs_b and len(csvs_a) > 0
    identical = same_files and all(
        (outs[0] / p).read_bytes() == (outs[1] / p).read_bytes() for p in csvs_a)
    verdict(9, "full-suite CSVs byte-identical for a fixed seed", identical,
            f"{len(csvs_a)} CSV files compared")
