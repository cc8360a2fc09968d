import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsk import geometry as geo
from rsk import maps
from rsk.errors import ConstructionUnavailable, RoundingAmbiguous

E1, E2, E3 = np.eye(3)


def pt(p, q):
    return geo.ProductPoint.from_arrays(p, q)


def close(a: geo.ProductPoint, b, tol=1e-12):
    return all(np.allclose(x, y, atol=tol) for x, y in zip(a.arrays, b.arrays))


# -- involutions ------------------------------------------------------------

def test_sigma_q22_stereo_examples():
    z, w = maps.sigma_q22_stereo(2, 1j)
    assert z == pytest.approx(0.5) and w == pytest.approx(1j)
    assert maps.sigma_q22_stereo(1, 1) == pytest.approx((1, 1))


def test_sigma_q22_cartesian_example():
    out = maps.eval_sigma_q22(pt(E3, E2))
    assert close(out, pt(-E3, E2))


def test_sigma_q40_examples():
    assert close(maps.eval_sigma_q40(pt(E3, E1)), pt(-E3, -E1))
    z, w = maps.sigma_q40_stereo(1, 1j)
    assert z == pytest.approx(-1) and w == pytest.approx(-1j)


@pytest.mark.parametrize("cart, stereo", [(maps.eval_sigma_q22, maps.sigma_q22_stereo),
                                          (maps.eval_sigma_q40, maps.sigma_q40_stereo)])
def test_chart_and_cartesian_forms_agree(cart, stereo, rng):
    P, Q = geo.random_points(rng, 300)
    for p, q in zip(P, Q):
        out = cart(pt(p, q))
        z, w = stereo(geo.cartesian_to_stereo(geo.UnitVec3(*p)), geo.cartesian_to_stereo(geo.UnitVec3(*q)))
        assert np.allclose(geo.stereo_to_cartesian(z).array, out.p.array, atol=1e-10)
        assert np.allclose(geo.stereo_to_cartesian(w).array, out.q.array, atol=1e-10)


@pytest.mark.parametrize("sigma", [maps.sigma_q22(), maps.sigma_q40(), maps.reflect_f()], ids=lambda s: s.name)
def test_involutions_square_to_identity(sigma, rng):
    assert maps.check_involution(sigma, 10_000, rng).passed
    P, Q = geo.random_points(rng, 100)
    assert np.allclose(np.concatenate(maps.evaluate(maps.power(sigma, 2), P, Q)), np.concatenate([P, Q]),
                       atol=1e-12)


@pytest.mark.parametrize("mode", ["analytic", "finite_difference"])
@pytest.mark.parametrize("sigma", [maps.sigma_q22(), maps.sigma_q40()], ids=lambda s: s.name)
def test_involutions_antisymplectic(sigma, mode, rng):
    r = maps.check_antisymplectic(sigma, 2000, rng, mode=mode)
    assert r.passed, r.max_residual


def test_twist_is_not_antisymplectic(rng):
    r = maps.check_antisymplectic(maps.twist(2), 500, rng)
    assert not r.passed and r.max_residual > 1


def test_fixed_loci(rng):
    r22 = maps.fixed_locus_scan(maps.sigma_q22(), rng, samples=10_000)
    assert r22.passed and r22.value["fixed_on_torus"]
    assert r22.value["first_factor_formula_residual"] < 1e-12
    r40 = maps.fixed_locus_scan(maps.sigma_q40(), rng, samples=10_000)
    assert r40.passed and r40.value["fixed_count"] == 0
    assert r40.value["min_displacement_off_torus"] == pytest.approx(2.0)


# -- twist ------------------------------------------------------------------

def test_twist_on_torus_example():
    P, Q = maps.torus_points([0.0], [math.pi / 2])
    P1, Q1 = maps.evaluate(maps.twist(2), P, Q)
    Pe, Qe = maps.torus_points([math.pi], [math.pi / 2])
    assert np.allclose(P1, Pe, atol=1e-14) and np.allclose(Q1, Qe)


def test_twist_fixes_pole_fibers():
    for w in (-E3, E3):
        p = geo.UnitVec3.normalized([0.2, -0.3, 0.9]).array
        assert close(maps.eval_twist(2, 0.5, pt(p, w)), pt(p, w), tol=1e-15)


@pytest.mark.parametrize("m", [1, 3, -5])
def test_odd_twist_unavailable(m):
    with pytest.raises(ConstructionUnavailable):
        maps.twist(m)


@pytest.mark.parametrize("m, k", [(2, 1), (2, 4), (4, 3), (6, 2)])
def test_twist_powers_on_torus(m, k):
    assert maps.check_twist_on_torus(m, 0.5, k=k).passed


def test_twist_poles_check(rng):
    assert maps.check_twist_poles(4, 0.5, 1000, rng).passed


def test_twist_jacobian_bounded_below():
    r = maps.check_jacobian(maps.twist(2), n_side=100)
    assert r.passed and r.samples == 10_000


# -- reflection -------------------------------------------------------------

def test_reflect_examples():
    assert close(maps.eval_reflect_f(pt(E1, E3)), pt(-E1, E3))
    assert close(maps.eval_reflect_f(pt(E3, E3)), pt(E3, E3))


def test_reflect_stays_on_sphere(rng):
    P, Q = geo.random_points(rng, 1000)
    P1, _, _ = maps._apply(maps.reflect_f(), P, Q, None)
    assert np.max(np.abs(np.linalg.norm(P1, axis=1) - 1)) < 1e-14


# -- equivariance -----------------------------------------------------------

def test_equivariance_examples(rng):
    assert maps.check_equivariance(maps.twist(2), maps.sigma_q22(), 10_000, rng).passed
    assert maps.check_equivariance(maps.reflect_f(), maps.sigma_q40(), 10_000, rng).passed
    bad = maps.check_equivariance(maps.twist(2), maps.sigma_q40(), 2000, rng)
    assert not bad.passed and bad.max_residual > 1


def test_reflect_commutes_with_q22(rng):
    # both act by orthogonal linear maps on each factor, so they commute
    r = maps.check_equivariance(maps.reflect_f(), maps.sigma_q22(), 10_000, rng)
    assert r.passed


@pytest.mark.parametrize("k", [0, 1, 3])
def test_pushforward_form(k, rng):
    r = maps.pushforward_form_check(maps.twist(2), k, maps.sigma_q22(), 2000, rng)
    assert r.passed, r.max_residual


def test_pushforward_k0_matches_antisymplectic(rng):
    r = maps.pushforward_form_check(maps.twist(2), 0, maps.sigma_q40(), 500, rng)
    assert r.passed


def test_pushforward_refuses_non_equivariant(rng):
    r = maps.pushforward_form_check(maps.twist(2), 1, maps.sigma_q40(), 500, rng)
    assert not r.passed and "precondition" in r.notes[0]


# -- H2 degrees -------------------------------------------------------------

@pytest.mark.parametrize("f", [maps.identity(), maps.twist(2), maps.reflect_f(), maps.power(maps.twist(4), 2)],
                         ids=lambda f: f.name)
def test_h2_action_identity(f):
    mat, info = maps.h2_action_degrees(f, grid=256)
    assert mat.tolist() == [[1, 0], [0, 1]]
    assert info["residue"] < 0.1


def test_sphere_degree_of_reflection():
    # the quadrature must see orientation: a reflection has degree -1
    d1, d2 = maps.sphere_degrees(maps.sigma_q22(), "A", 64)
    assert round(d2) == -1 and abs(d1) < 1e-12


def test_h2_rounding_ambiguous():
    with pytest.raises(RoundingAmbiguous):
        maps.h2_action_degrees(maps.power(maps.twist(6, 0.1), 5), grid=4, max_grid=4, residue_tol=1e-6)


# -- quotient ---------------------------------------------------------------

def test_quotient_lifts_agree(rng):
    P, Q = geo.random_points(rng, 50)
    for p, q in zip(P, Q):
        assert maps.quotient_map(pt(p, q)) == maps.quotient_map(pt(-p, -q))


def test_quotient_diagram_and_diagonal(rng):
    assert maps.check_quotient_diagram(10_000, rng).value == {"diagram": 0.0, "well_defined": 0.0}
    assert maps.check_g_fixes_diagonal(10_000, rng).passed
    x = geo.UnitVec3.normalized([1, -2, 0.5]).array
    q = maps.quotient_map(pt(x, x))
    assert maps.descend_g(q) == q


def test_projection_through_second_factor_commutes(rng):
    assert maps.check_projection_commutes(2000, rng, onto="second").passed
    assert not maps.check_projection_commutes(2000, rng, onto="first").passed


# -- descriptors ------------------------------------------------------------

specs = st.deferred(lambda: st.one_of(
    st.sampled_from([maps.identity(), maps.sigma_q22(), maps.sigma_q40(), maps.reflect_f()]),
    st.builds(maps.twist, st.sampled_from([-4, -2, 2, 4, 6]), st.floats(0.1, 2.0)),
    st.builds(maps.power, specs, st.integers(-3, 3)),
    st.lists(specs, min_size=1, max_size=3).map(lambda xs: maps.compose(*xs)),
))


@given(specs)
def test_mapspec_json_roundtrip(spec):
    assert maps.MapSpec.from_json(spec.to_json()) == spec


@given(specs)
def test_inverse_undoes_map(spec):
    r = np.random.default_rng(0)
    P, Q = geo.random_points(r, 20)
    back = maps.evaluate(maps.compose(maps.inverse(spec), spec), P, Q)
    assert np.max(maps.distance(P, Q, *back)) < 1e-10
