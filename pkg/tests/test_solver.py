import numpy as np
import pytest

from degenparab.fields import CoefficientSet
from degenparab.geometry import Domain, make_defining_function
from degenparab.solver import (DeltaSchedule, GateError, GridSpec,
                               NumericError, graded_nodes, long_time_run,
                               solve_elliptic_limit, solve_ibvp,
                               vanishing_viscosity)

DOM = Domain.interval(0.0, 1.0)
RHO = make_defining_function(DOM)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(N=4, M=10)
    with pytest.raises(ValueError):
        GridSpec(N=16, M=1)
    with pytest.raises(ValueError):
        GridSpec(N=16, M=10, theta=1.5)


def test_graded_nodes():
    x = graded_nodes(0.0, 1.0, 32, 2.0)
    assert x[0] == 0.0 and x[-1] == 1.0
    assert np.all(np.diff(x) > 0)
    # two-sided grading clusters symmetrically
    assert np.allclose(x + x[::-1], 1.0, atol=1e-12)
    assert x[1] < 1.0 / 32


def test_delta_schedule():
    s = DeltaSchedule(1e-2, 0.5, 4, 1e-8)
    assert s.deltas() == pytest.approx([1e-2, 5e-3, 2.5e-3, 1.25e-3])
    with pytest.raises(ValueError):
        DeltaSchedule(1e-2, 1.5, 4, 1e-8)


def test_zero_data_gives_zero_solution():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f=0)
    fld = solve_ibvp(cs, RHO, lambda x: 0.0, lambda x, t: 0.0,
                     GridSpec(N=24, M=16), T=0.5)
    assert np.abs(fld.values).max() == 0.0


def test_steady_state_preserved():
    # u = 1 solves L u = c u = f with c = -1, f = -1, h = 1
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f=-1.0)
    fld = solve_ibvp(cs, RHO, lambda x: 1.0, lambda x, t: 1.0,
                     GridSpec(N=48, M=64), T=1.0)
    assert np.abs(fld.values - 1.0).max() <= 1e-4


def test_exact_exponential_in_time():
    # spatially constant u = e^{-2t}: L u = c u - u_t = 0 for c = -2
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-2.0, f=0)
    fld = solve_ibvp(cs, RHO, lambda x: 1.0, lambda x, t: float(np.exp(-2 * t)),
                     GridSpec(N=24, M=400), T=1.0)
    exact = np.exp(-2 * fld.times)[:, None]
    assert np.abs(fld.values - exact).max() <= 5e-3


def test_compatibility_gate_rejects_mismatched_data():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f=0)
    with pytest.raises(GateError):
        solve_ibvp(cs, RHO, lambda x: 0.0, lambda x, t: float(t),
                   GridSpec(N=16, M=16), T=1.0)


def test_positive_c_is_stable_via_exponential_shift():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=1.0, f=0)
    fld = solve_ibvp(cs, RHO, lambda x: 0.0, lambda x, t: 0.0,
                     GridSpec(N=24, M=32), T=1.0)
    assert np.abs(fld.values).max() <= 1e-12


def test_vanishing_viscosity_cauchy_differences_shrink():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-2.0, f=RHO.expr)
    sched = DeltaSchedule(1e-2, 0.25, 6, 1e-12)
    fld, rep = vanishing_viscosity(cs, RHO, lambda x: 0.0, lambda x, t: 0.0,
                                   GridSpec(N=32, M=32), sched, T=1.0)
    diffs = rep["diffs"]
    assert len(diffs) >= 2
    assert all(b < a for a, b in zip(diffs, diffs[1:]))


def test_elliptic_limit_constant_solution():
    # f_bar = c_bar forces boundary value 1, and u = 1 solves the limit problem
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-2.0, f=-2.0,
                              a_bar=1.0, b_bar=0.0, c_bar=-2.0, f_bar=-2.0)
    v, rep = solve_elliptic_limit(cs, RHO, GridSpec(N=32, M=2),
                                  DeltaSchedule(1e-2, 0.25, 10, 1e-9))
    assert rep["stabilized"]
    assert np.abs(v.values - 1.0).max() <= 1e-8


def test_elliptic_limit_gate():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=1.0, f=1.0,
                              a_bar=1.0, b_bar=0.0, c_bar=1.0, f_bar=1.0)
    with pytest.raises(GateError):
        solve_elliptic_limit(cs, RHO, GridSpec(N=16, M=2),
                             DeltaSchedule(1e-2, 0.25, 4, 1e-9))


def test_long_time_run_windows():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-2.0, f=0)
    fld, windows, sups = long_time_run(cs, RHO, lambda x: 1.0,
                                       lambda x, t: float(np.exp(-2 * t)),
                                       GridSpec(N=16, M=128), T_max=3.0)
    assert len(windows) == 3 and len(sups) == 3
    assert sups[0] > sups[1] > sups[2]


def test_long_time_growth_bound():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f=-1.0)
    with pytest.raises(NumericError):
        long_time_run(cs, RHO, lambda x: 1.0, lambda x, t: 1.0,
                      GridSpec(N=16, M=16), T_max=2.0, growth_bound=0.5)


def test_half_strip_with_exact_artificial_data():
    # u = e^{-2t} again, now on the half-strip with artificial faces fed exactly
    hs = Domain.half_strip(1.0)
    rho2 = make_defining_function(hs)
    cs = CoefficientSet.build(n=2, a=1.0, b=[0.0, 0.0], c=-2.0, f=0)
    exact = lambda x, t: float(np.exp(-2 * t))
    fld = solve_ibvp(cs, rho2, lambda x: 1.0, exact, GridSpec(N=12, M=64),
                     T=0.5, artificial_data=exact)
    ex = np.exp(-2 * fld.times).reshape(-1, 1, 1)
    assert np.abs(fld.values - ex).max() <= 5e-3


def test_disk_grid_not_implemented():
    disk = Domain.disk(1.0)
    rho = make_defining_function(disk)
    cs = CoefficientSet.build(n=2, a=1.0, b=[0.0, 0.0], c=-1.0, f=0)
    with pytest.raises(NotImplementedError):
        solve_ibvp(cs, rho, lambda x: 0.0, lambda x, t: 0.0,
                   GridSpec(N=16, M=8), T=0.5)
