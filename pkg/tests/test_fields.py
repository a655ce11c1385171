import numpy as np
import pytest
import sympy as sp

from degenparab.fields import (CoefficientSet, ConfigurationError,
                               SmoothFunction, apply_operator, char_poly_at,
                               ellipticity_bounds, gate_check,
                               parse_expression)
from degenparab.geometry import Domain, make_defining_function


def test_parse_expression():
    e = parse_expression("x1^2 + sin(t)", 1)
    assert e.subs({sp.Symbol("x1"): 2, sp.Symbol("t"): 0}) == 4
    with pytest.raises(ConfigurationError):
        parse_expression("x1 + y", 1)
    with pytest.raises(ConfigurationError):
        parse_expression("x1 +* 2", 1)


def test_coefficient_set_scalar_broadcast():
    cs = CoefficientSet.build(n=2, a=1.0, b=[0.0, 0.0], c=-1.0, f=0)
    A = cs.a_at(np.array([0.1, 0.2]), 0.0)
    assert A.shape == (2, 2)
    assert np.allclose(A, np.eye(2))
    assert cs.c_at(np.array([0.1, 0.2]), 3.0) == pytest.approx(-1.0)


def test_ellipticity_bounds():
    cs = CoefficientSet.build(n=2, a=1.0, b=[0.0, 0.0], c=0.0, f=0)
    lo, hi = ellipticity_bounds(cs, [(np.array([0.1, 0.1]), 0.0)])
    assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)


def test_char_poly_roots():
    dom = Domain.interval(0.0, 1.0)
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-3.75, f=0,
                              a_bar=1.0, b_bar=0.0, c_bar=-3.75, f_bar=0)
    bp = dom.boundary_points(2)[0]
    P = char_poly_at(cs, bp)
    r = P.roots
    assert r == pytest.approx((-1.5, 2.5))
    assert P(2.5) == pytest.approx(0.0, abs=1e-12)


def test_gate_check_sharp():
    dom = Domain.interval(0.0, 1.0)
    cs = CoefficientSet.build(n=1, a=1.0, b=0.0, c=-3.75, f=0,
                              a_bar=1.0, b_bar=0.0, c_bar=-3.75, f_bar=0)
    assert gate_check(cs, dom, 2, 0.4)["passed"]
    assert not gate_check(cs, dom, 2, 0.6)["passed"]
    with pytest.raises(ValueError):
        gate_check(cs, dom, 2, 1.5)


def test_apply_operator_matches_hand_computation():
    # u = x^2, rho = x(1-x), L = rho^2 u'' + rho u' + c u - u_t
    dom = Domain.interval(0.0, 1.0)
    rho = make_defining_function(dom)
    cs = CoefficientSet.build(n=1, a=1.0, b=1.0, c=-1.0, f=0)
    u = SmoothFunction.from_expr(parse_expression("x1^2", 1), 1)
    x = np.array([0.3])
    r = 0.3 * 0.7
    expected = r**2 * 2.0 + r * 1.0 * (2 * 0.3) - 0.3**2
    got = apply_operator(cs, rho, u, x, 0.0)
    assert got == pytest.approx(expected, abs=1e-12)
