import numpy as np
import pytest

from degenparab.geometry import Domain
from degenparab.manufactured import (ManufacturedSpec, SpecError, build,
                                     residual_check)

DOM = Domain.interval(0.0, 1.0)


def test_validation():
    with pytest.raises(SpecError):
        build(ManufacturedSpec(a=-1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=DOM))
    with pytest.raises(SpecError):
        build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=2.0, m=0, domain=DOM))
    # degenerate recursion: a(2s + 1 - 1) + b = 0 at s = 0.5, b = -1
    with pytest.raises(SpecError):
        build(ManufacturedSpec(a=1.0, b=-1.0, c=-2.0, s=0.5, m=1, domain=DOM))


def test_tau_is_minus_char_poly_at_s():
    spec = ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=DOM)
    sol = build(spec)
    assert sol.tau == pytest.approx(-spec.char_poly(spec.s))
    assert sol.tau == pytest.approx(2.25)


@pytest.mark.parametrize("s", [0.5, 1.25, 2.5])
@pytest.mark.parametrize("m", [0, 1, 2])
def test_residual_vanishes_to_roundoff(s, m):
    sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=s, m=m, domain=DOM))
    assert residual_check(sol, samples=200, rng=0) <= 1e-12


def test_regularity_cap():
    sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-3.75, s=2.5, m=0, domain=DOM))
    k, alpha, mu_plus = sol.regularity
    assert (k, alpha) == (2, pytest.approx(0.5))
    assert mu_plus == pytest.approx(2.5)


def test_boundary_data():
    sol = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=0.5, m=0, domain=DOM))
    data = sol.boundary_data()
    assert data["h"] == 0
    assert data["normal_derivative_unbounded"]
    sol2 = build(ManufacturedSpec(a=1.0, b=0.0, c=-2.0, s=1.25, m=0, domain=DOM))
    assert not sol2.boundary_data()["normal_derivative_unbounded"]


def test_nontrivial_seed_profile():
    sol = build(ManufacturedSpec(a=1.0, b=0.5, c=-2.0, s=1.25, m=2, domain=DOM,
                                 psi0="1 + x1/2"))
    assert residual_check(sol, samples=200, rng=1) <= 1e-12
    assert sol.sup_profile() > 0
