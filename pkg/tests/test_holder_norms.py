import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from degenparab.fields import ConfigurationError
from degenparab.geometry import BoundaryPoint, Domain, make_defining_function
from degenparab.holder_norms import (assembly_check, fit_boundary_exponent,
                                     holder_norm, holder_seminorm,
                                     parabolic_distance, slice_norm,
                                     weighted_norm, windowed_convergence)

DOM = Domain.interval(0.0, 1.0)
RHO = make_defining_function(DOM)

point = st.tuples(st.floats(-5, 5), st.floats(0, 5))


@given(point, point, point)
@settings(max_examples=200, deadline=None)
def test_parabolic_distance_is_a_metric(X, Y, Z):
    x = (np.array([X[0]]), X[1])
    y = (np.array([Y[0]]), Y[1])
    z = (np.array([Z[0]]), Z[1])
    assert parabolic_distance(x, x) == 0.0
    assert parabolic_distance(x, y) == pytest.approx(parabolic_distance(y, x))
    assert parabolic_distance(x, z) <= \
        parabolic_distance(x, y) + parabolic_distance(y, z) + 1e-12


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=12),
       st.floats(0.1, 10))
@settings(max_examples=100, deadline=None)
def test_seminorm_absolute_homogeneity(vals, scale):
    vals = np.array(vals)
    pts = np.linspace(0.0, 1.0, len(vals))[:, None]
    tt = np.zeros(len(vals))
    base = holder_seminorm(pts, tt, vals, 0.5).total
    scaled = holder_seminorm(pts, tt, scale * vals, 0.5).total
    assert scaled == pytest.approx(scale * base, rel=1e-9, abs=1e-12)


def test_seminorm_of_constant_is_zero():
    pts = np.linspace(0, 1, 10)[:, None]
    rep = holder_seminorm(pts, np.zeros(10), np.full(10, 3.0), 0.5)
    assert rep.total == 0.0


def test_random_pairs_lower_bound_all_pairs():
    rng = np.random.default_rng(0)
    pts = rng.random((300, 1))
    tt = rng.random(300)
    vals = np.sqrt(pts[:, 0]) * np.exp(-tt)
    full = holder_seminorm(pts, tt, vals, 0.5, strategy="all-pairs").total
    sub = holder_seminorm(pts, tt, vals, 0.5, strategy="random",
                          max_pairs=2000, seed=1).total
    assert sub <= full + 1e-12


def test_sqrt_seminorm_witness_at_origin():
    pts = np.linspace(0, 1, 400)[:, None]
    vals = np.sqrt(pts[:, 0])
    rep = holder_seminorm(pts, np.zeros(400), vals, 0.5)
    # [sqrt(x)]_{1/2} = 1, attained against x = 0
    assert rep.total == pytest.approx(1.0, rel=1e-6)
    witness = rep.components["seminorm"]["witness"]
    assert min(witness[0][0][0], witness[1][0][0]) == pytest.approx(0.0)


def test_invalid_alpha_rejected():
    pts = np.linspace(0, 1, 5)[:, None]
    with pytest.raises(ConfigurationError):
        holder_seminorm(pts, np.zeros(5), np.zeros(5), 1.5)


def test_weighted_norm_components():
    x1, t = sp.symbols("x1 t")
    rep = weighted_norm(sp.exp(-t) * sp.sqrt(x1 * (1 - x1)), RHO, 0, 0.5,
                        times=np.linspace(0, 1, 8), nx=40)
    assert rep.total > 0
    names = set(rep.components)
    assert any("rho^2" in n or "rho2" in n or "second" in n for n in names) or \
        len(names) >= 3


def test_slice_norm_decays_for_decaying_function():
    x1, t = sp.symbols("x1 t")
    u = sp.exp(-t) * x1**sp.Rational(5, 2)
    n10 = slice_norm(u, RHO, 2, 0.5, 10.0, nx=80).total
    n20 = slice_norm(u, RHO, 2, 0.5, 20.0, nx=80).total
    assert n20 < n10


def test_fit_boundary_exponent_recovers_power():
    bp = BoundaryPoint(np.array([0.0]), np.array([1.0]))
    fit = fit_boundary_exponent(lambda x, t: float(x[0]) ** 0.7,
                                lambda x, t: 0.0, bp)
    assert fit["exponent"] == pytest.approx(0.7, abs=1e-6)
    flat = fit_boundary_exponent(lambda x, t: 0.0, lambda x, t: 0.0, bp)
    assert flat["flat"]


def test_windowed_convergence_symbolic():
    x1, t = sp.symbols("x1 t")
    u = sp.exp(-t) * sp.sqrt(x1 * (1 - x1))
    tr = windowed_convergence(u, 0, [(k, k + 1) for k in range(6)], rho=RHO,
                              k=0, alpha=0.5, eps=1e-1, nx=30, nt=10)
    assert tr.verdict == "converging"
    assert tr.values[-1] < tr.values[0]


def test_assembly_check():
    assert assembly_check(1.0, 1.0, 8.9)["verdict"] == "pass"
    assert assembly_check(1.0, 1.0, 9.1)["verdict"] == "fail"
    assert assembly_check(1.0, 1.0, 9.1, hypotheses_ok=False)["verdict"] == \
        "not-applicable"
