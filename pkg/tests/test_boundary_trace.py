import numpy as np
import pytest

from degenparab.boundary_trace import (boundary_limit, compatibility_residual,
                                       fourth_order_dt, ladder_coefficients,
                                       trace_h)
from degenparab.fields import CoefficientSet, ConfigurationError
from degenparab.geometry import BoundaryPoint, Domain

BP = BoundaryPoint(np.array([0.0]), np.array([1.0]))


def test_constant_coefficient_closed_form():
    # d_t h = c h - f with c = -1, f = 1, h(0) = 0  =>  h(t) = e^{-t} - 1
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f=1.0)
    times = np.linspace(0.0, 1.0, 101)
    tr = trace_h(cs, 0.0, BP, times)
    exact = np.exp(-times) - 1.0
    assert np.abs(tr.values - exact).max() <= 1e-10


def test_compatibility_residual_small():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-1.0, f="1+exp(-t)")
    times = np.round(np.arange(0.0, 2.0 + 1e-12, 1e-2), 10)
    tr = trace_h(cs, 0.5, BP, times)
    assert compatibility_residual(tr) <= 1e-7


def test_boundary_limit_decaying_coefficients():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c="-1+exp(-t)/2",
                              f="1+exp(-t)", a_bar=1.0, b_bar=0.0,
                              c_bar=-1.0, f_bar=1.0)
    times = np.round(np.arange(0.0, 10.0 + 1e-12, 1e-2), 10)
    tr = trace_h(cs, 0.0, BP, times)
    rep = boundary_limit(cs, tr, [(k, k + 1) for k in range(10)])
    assert rep["limit"] == pytest.approx(-1.0)
    assert rep["decaying"]
    assert abs(tr.values[-1] - rep["limit"]) <= 1e-3


def test_boundary_limit_requires_negative_c_bar():
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=1.0, f=1.0,
                              a_bar=1.0, b_bar=0.0, c_bar=1.0, f_bar=1.0)
    tr = trace_h(cs, 0.0, BP, np.linspace(0, 1, 101))
    with pytest.raises(ConfigurationError):
        boundary_limit(cs, tr, [(0, 1)])


def test_fourth_order_dt_exact_on_quartics():
    t = np.linspace(0.0, 1.0, 33)
    vals = t**4 - 2 * t**2 + 3 * t
    d = fourth_order_dt(vals, t[1] - t[0])
    exact = 4 * t**3 - 4 * t + 3
    assert np.abs(d - exact).max() <= 1e-10


def test_ladder_coefficients_closed_form():
    dom = Domain.half_strip(1.0)
    cs = CoefficientSet.build(n=2, a=1.0, b=[1.0, 2.0], c=-3.0, f=0)
    b_shift, c_shift = ladder_coefficients(cs, 2, dom)
    # b^(nu) = b + 2 nu a_{.n}: only the normal entry shifts for a = Id
    assert float(b_shift[0]) == pytest.approx(1.0)
    assert float(b_shift[1]) == pytest.approx(2.0 + 4.0)
    # c^(nu) = c + nu b_n + nu(nu-1) a_nn = -3 + 4 + 2
    assert float(c_shift) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        ladder_coefficients(cs, -1)
