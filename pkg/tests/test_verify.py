import numpy as np
import pytest

from degenparab.fields import CoefficientSet
from degenparab.geometry import BoundaryPoint, Domain, make_defining_function
from degenparab.solver import GridSpec, solve_ibvp
from degenparab.verify import (check_linfty_bound, check_max_principle,
                               decay_certificate, find_barrier,
                               long_time_report)

DOM = Domain.interval(0.0, 1.0)
RHO = make_defining_function(DOM)
BP = BoundaryPoint(np.array([0.0]), np.array([1.0]))


def _negative_run():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f=0)
    run = solve_ibvp(cs, RHO, lambda x: -1.0,
                     lambda x, t: -float(np.exp(-t)),
                     GridSpec(N=32, M=40), T=1.0)
    return cs, run


def test_max_principle_pass():
    cs, run = _negative_run()
    rep = check_max_principle(run, cs)
    assert rep["verdict"] == "pass"
    assert rep["max_value"] <= 1e-9


def test_max_principle_hypotheses_screened():
    # positive initial data violates phi <= 0: verdict must be not-applicable
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f=0)
    run = solve_ibvp(cs, RHO, lambda x: 1.0, lambda x, t: float(np.exp(-t)),
                     GridSpec(N=32, M=40), T=1.0)
    rep = check_max_principle(run, cs)
    assert rep["verdict"] == "not-applicable"


def test_linfty_bound_dominates():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-2.0, f=1.0)
    h = lambda x, t: -(1 - np.exp(-2 * t)) / 2
    run = solve_ibvp(cs, RHO, lambda x: 0.0, h, GridSpec(N=48, M=80), T=2.0)
    rep = check_linfty_bound(run, cs, RHO, c0=0.0)
    assert rep["verdict"] == "pass"
    assert rep["dominates"] and rep["min_margin"] >= -1e-12
    assert rep["constant"] <= 1.0


def test_linfty_bound_needs_c_below_c0():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=1.0, f=0)
    run = solve_ibvp(cs, RHO, lambda x: 0.0, lambda x, t: 0.0,
                     GridSpec(N=16, M=16), T=1.0)
    rep = check_linfty_bound(run, cs, RHO, c0=0.0)
    assert rep["verdict"] == "not-applicable"


CS_SHARP = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-3.75, f=0,
                                a_bar=1.0, b_bar=0.0, c_bar=-3.75, f_bar=0)


def test_barrier_found_below_root():
    cert = find_barrier(CS_SHARP, RHO, 2.4, BP, "time_independent")
    assert cert.found
    assert cert.C0 > 0
    assert cert.recheck(CS_SHARP, RHO)


def test_barrier_absent_above_root():
    cert = find_barrier(CS_SHARP, RHO, 2.6, BP, "time_independent")
    assert not cert.found
    assert cert.worst_point is not None


def test_laplace_barrier():
    cert = find_barrier(CS_SHARP, RHO, 0.5, BP, "laplace")
    assert cert.found and cert.radius > 0
    with pytest.raises(ValueError):
        find_barrier(CS_SHARP, RHO, 1.5, BP, "laplace")


def test_parabolic_barrier_with_time_weight():
    cert = find_barrier(CS_SHARP, RHO, 2.4, BP, "parabolic")
    assert cert.found


def test_long_time_report_recovers_synthetic_rate():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-3.0, f=0)
    run = solve_ibvp(cs, RHO, lambda x: 1.0, lambda x, t: float(np.exp(-3 * t)),
                     GridSpec(N=16, M=2048), T=8.0)
    rep = long_time_report(run, 0)
    assert rep["fit"]["kind"] == "exponential"
    assert rep["fit"]["nu_hat"] == pytest.approx(3.0, abs=0.05)


def test_decay_certificate_bounded_and_decaying():
    from degenparab.manufactured import ManufacturedSpec, build
    import sympy as sp

    sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=DOM))
    phl = sp.lambdify(RHO.symbols, sol.initial_value(), "numpy")
    run = solve_ibvp(sol.coefficient_set(), RHO,
                     lambda x: float(phl(*np.atleast_1d(x))),
                     lambda x, t: 0.0, GridSpec(N=40, M=256), T=4.0)
    rep = decay_certificate(run, lambda x, t: 0.0, 0.5,
                            [BP, BoundaryPoint(np.array([1.0]), np.array([-1.0]))])
    assert rep.bounded
    assert rep.decaying
