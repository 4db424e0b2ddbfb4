import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from preqholo import (
    DIR_A,
    DIR_B,
    DIR_Z,
    AlgebraDirection,
    HamiltonianLoop,
    LoopClosureError,
    OrbitSphere,
    UnitPhase,
    action_integral,
    base_point_spread,
    berry_phase,
    circle_distance,
    fibonacci_sphere,
    invariant_hamiltonian,
    invariant_loop,
    kappa,
    kappa_at_fixed_point,
    mixing_loop,
    product_loop,
    scale_hamiltonian,
    sphere_point,
    transport_phase,
    unit_vector,
    zero_hamiltonian,
)
from scipy.integrate import quad


def zero_loop():
    return HamiltonianLoop(zero_hamiltonian(), label="zero")


revs = st.floats(-10.0, 10.0, allow_nan=False)


@given(revs)
def test_unit_phase_range_and_complex(x):
    p = UnitPhase.from_revolutions(x)
    assert 0.0 <= p.value < 1.0
    assert abs(p.as_complex) == pytest.approx(1.0, abs=1e-12)


@given(revs, revs)
def test_unit_phase_group_law(x, y):
    a, b = UnitPhase.from_revolutions(x), UnitPhase.from_revolutions(y)
    assert circle_distance((a + b).value, x + y) < 1e-9
    assert circle_distance((a - b).value, x - y) < 1e-9


def test_unit_phase_rejects_out_of_range():
    with pytest.raises(ValueError):
        UnitPhase(1.5)


def test_trivial_loop_phase_zero(sphere1):
    st_ = transport_phase(sphere1, zero_loop(), sphere_point(1.0, 0.5))
    assert st_.phase == 0.0
    assert st_.transitions == 0
    assert kappa(sphere1, zero_loop(), sphere_point(1.0, 0.5)).as_complex == pytest.approx(1.0)


def test_basic_loop_at_north_pole(sphere1):
    st_ = transport_phase(sphere1, invariant_loop(sphere1, DIR_A), sphere_point(0.0, 0.0))
    assert st_.transitions == 2  # the trajectory crosses both poles
    assert circle_distance(st_.phase, 0.5) < 1e-8


def test_basic_loop_at_equator_point_n2(sphere2):
    st_ = transport_phase(sphere2, invariant_loop(sphere2, DIR_A), sphere_point(math.pi / 2, math.pi / 2))
    assert circle_distance(st_.phase, 0.0) < 1e-8


def test_kappa_examples():
    q = sphere_point(0.4, 2.2)
    M1 = OrbitSphere(1)
    assert kappa(M1, invariant_loop(M1, DIR_B), q).distance_to(0.5) < 1e-8
    M4 = OrbitSphere(4)
    assert kappa(M4, invariant_loop(M4, AlgebraDirection(0.28, 0.96)), q).distance_to(0.0) < 1e-8
    doubled = product_loop(invariant_loop(M1, DIR_A), invariant_loop(M1, DIR_A))
    assert kappa(M1, doubled, q).distance_to(0.0) < 1e-8


def test_action_integral_values():
    q = sphere_point(1.0, 1.0)
    assert circle_distance(action_integral(OrbitSphere(1), zero_loop(), q), 0.0) < 1e-12
    M1 = OrbitSphere(1)
    assert circle_distance(action_integral(M1, invariant_loop(M1, DIR_A), q), 0.5) < 1e-8
    # oracle for n=3: the critical value of the generator, (-f(p)) mod 1 = 1/2
    M3 = OrbitSphere(3)
    assert circle_distance(action_integral(M3, invariant_loop(M3, DIR_B), q), 0.5) < 1e-8


def test_action_equals_kappa_value(sphere1):
    q = sphere_point(2.0, 0.3)
    loop = mixing_loop(sphere1, 0.7)
    assert action_integral(sphere1, loop, q) == kappa(sphere1, loop, q).value


def test_fixed_point_shortcut(sphere1):
    M = sphere1
    loop = invariant_loop(M, DIR_A)
    f = loop.hamiltonian
    p = sphere_point(math.pi / 2, 0.0)  # f(p) = pi k = n/2 there
    val = kappa_at_fixed_point(M, f, p)
    assert val.distance_to((M.n % 2) / 2) < 1e-12
    # both critical values give the same holonomy; the values differ by n
    p2 = sphere_point(math.pi / 2, math.pi)
    val2 = kappa_at_fixed_point(M, f, p2)
    assert val.distance_to(val2) < 1e-12
    assert abs(abs(float(f.eval(0, p)) - float(f.eval(0, p2))) - abs(M.n)) < 1e-12


def test_fixed_point_zero_value(sphere1):
    f = zero_hamiltonian()
    assert kappa_at_fixed_point(sphere1, f, sphere_point(1.0, 1.0)).value == 0.0


def test_fixed_point_requires_critical(sphere1):
    f = invariant_loop(sphere1, DIR_A).hamiltonian
    with pytest.raises(ValueError):
        kappa_at_fixed_point(sphere1, f, sphere_point(0.3, 0.3))


def test_fixed_point_agrees_with_transport(sphere2):
    M = sphere2
    direction = AlgebraDirection(0.6, 0.8)
    loop = invariant_loop(M, direction)
    shortcut = kappa_at_fixed_point(M, loop.hamiltonian, direction.axis())
    integrated = kappa(M, loop, sphere_point(1.2, 0.1))
    assert shortcut.distance_to(integrated) < 1e-6


def test_spread_constant_loop(sphere1):
    assert base_point_spread(sphere1, zero_loop(), fibonacci_sphere(50)) == 0.0


def test_spread_three_reference_points(sphere1):
    pts = [sphere_point(0, 0), sphere_point(math.pi / 2, 0), sphere_point(math.pi / 2, math.pi / 2)]
    loop = invariant_loop(sphere1, DIR_A)
    assert base_point_spread(sphere1, loop, pts) < 1e-6
    for q in pts:
        assert kappa(sphere1, loop, q).distance_to(0.5) < 1e-6


def test_spread_random_axis_n2(sphere2, rng):
    lam = rng.uniform(0, 2 * math.pi)
    loop = invariant_loop(sphere2, AlgebraDirection(math.cos(lam), math.sin(lam)))
    pts = fibonacci_sphere(100)
    assert base_point_spread(sphere2, loop, pts) < 1e-6
    assert kappa(sphere2, loop, pts[0]).distance_to(0.0) < 1e-6


def test_product_with_constant_loop(sphere1):
    q = sphere_point(0.9, 5.0)
    psi = invariant_loop(sphere1, DIR_A)
    prod = product_loop(zero_loop(), psi)
    assert kappa(sphere1, prod, q).distance_to(kappa(sphere1, psi, q)) < 1e-8


def test_product_two_axes(sphere1):
    q = sphere_point(1.4, 0.2)
    pa = invariant_loop(sphere1, DIR_A)
    pb = invariant_loop(sphere1, DIR_B)
    assert kappa(sphere1, product_loop(pb, pa), q).distance_to(0.0) < 1e-8


def test_multiplicativity_random_pairs(sphere2, rng):
    M = sphere2
    worst = 0.0
    for _ in range(20):
        la, lb = rng.uniform(0, 2 * math.pi, size=2)
        xi = invariant_loop(M, AlgebraDirection(math.cos(la), math.sin(la)))
        psi = mixing_loop(M, rng.uniform(0.2, 1.2))
        q = unit_vector(rng.normal(size=3))
        lhs = kappa(M, product_loop(xi, psi), q).value
        rhs = kappa(M, xi, q).value + kappa(M, psi, q).value
        worst = max(worst, circle_distance(lhs, rhs))
    assert worst < 1e-5


def test_berry_phase_alias(sphere1):
    loop = invariant_loop(sphere1, DIR_A)
    q = sphere_point(math.pi / 2, 1.0)
    assert berry_phase(sphere1, loop, q).value == kappa(sphere1, loop, q).value


def test_frame_threshold_independence(sphere2, rng):
    M = sphere2
    worst = 0.0
    for i in range(20):
        if i % 2 == 0:
            lam = rng.uniform(0, 2 * math.pi)
            loop = invariant_loop(M, AlgebraDirection(math.cos(lam), math.sin(lam)))
        else:
            loop = mixing_loop(M, rng.uniform(0.2, 1.5))
        q = unit_vector(rng.normal(size=3))
        k1 = kappa(M, loop, q)
        k2 = kappa(M, loop, q, thresholds=(math.pi / 4, 3 * math.pi / 4))
        worst = max(worst, k1.distance_to(k2))
    assert worst < 1e-8


def test_kappa_modulus_is_exactly_one(sphere1):
    v = kappa(sphere1, invariant_loop(sphere1, DIR_A), sphere_point(0.3, 0.3))
    assert abs(v.as_complex) == pytest.approx(1.0, abs=1e-15)


def test_closure_error_at_base_point(sphere1):
    f = scale_hamiltonian(invariant_hamiltonian(sphere1, DIR_A), -0.37 * math.pi)
    broken = HamiltonianLoop(f, closure_tol=1e-6, label="open")
    with pytest.raises(LoopClosureError):
        transport_phase(sphere1, broken, sphere_point(1.0, 1.0))


def test_mixing_loop_holonomy_parity(rng):
    # derived by hand: the ramped two-axis loop has the same holonomy as the
    # bare loop for every amplitude, and the pi-drift variant is trivial
    for n in (1, 2, 3):
        M = OrbitSphere(n)
        q = unit_vector(rng.normal(size=3))
        assert kappa(M, mixing_loop(M, 1.1), q).distance_to((n % 2) / 2) < 1e-8
        assert kappa(M, mixing_loop(M, math.pi, profile="constant"), q).distance_to(0.0) < 1e-8


def test_polar_axis_loop_single_chart_oracle():
    # trajectories of the polar-axis loop stay at fixed height; the phase
    # lift is exactly (n/2)(1 - cos t0) + (n/2) cos t0 in the north frame
    for n, theta0 in [(1, 0.6), (2, 1.0), (3, 1.4)]:
        M = OrbitSphere(n)
        loop = invariant_loop(M, DIR_Z)
        st_ = transport_phase(M, loop, sphere_point(theta0, 0.8))
        assert st_.transitions == 0
        assert st_.phase == pytest.approx(0.5 * n, abs=1e-8)
    # southern base point: the south-frame lift is -n/2 unreduced
    M = OrbitSphere(2)
    st_ = transport_phase(M, invariant_loop(M, DIR_Z), sphere_point(2.5, 0.8))
    assert st_.transitions == 0
    assert st_.phase == pytest.approx(-1.0 * M.n / 2, abs=1e-8)


def test_small_circle_loop_unreduced_oracle():
    # base points near the fixed point of the A-axis loop trace small
    # circles; the lift splits into a cap term and a generator term:
    # -(n/2)(1 - cos r) - (n/2) cos r = -n/2 exactly, for every radius
    for n, r in [(1, 0.2), (3, 0.45)]:
        M = OrbitSphere(n)
        loop = invariant_loop(M, DIR_A)
        q = np.array([math.cos(r), 0.0, math.sin(r)])
        st_ = transport_phase(M, loop, q)
        assert st_.transitions == 0
        cap_term = -(n / 2) * (1 - math.cos(r))
        generator_term = -(n / 2) * math.cos(r)
        assert st_.phase == pytest.approx(cap_term + generator_term, abs=1e-6)


def test_transport_oracle_with_independent_quadrature(sphere2):
    # same scenario, but the generator term recomputed by quadrature of the
    # Hamiltonian along the closed-form circle rather than trusted analytics
    from preqholo import closed_form_flow

    M = sphere2
    r = 0.3
    loop = invariant_loop(M, DIR_A)
    q = np.array([math.cos(r), 0.0, math.sin(r)])
    st_ = transport_phase(M, loop, q)
    f_term, _ = quad(
        lambda t: float(loop.hamiltonian.eval(t, closed_form_flow(DIR_A, math.pi * t, q))),
        0.0,
        1.0,
        epsabs=1e-12,
    )
    cap_term = -(M.n / 2) * (1 - math.cos(r))
    assert st_.phase == pytest.approx(cap_term - f_term, abs=1e-6)
