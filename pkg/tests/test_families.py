import numpy as np
import pytest

from preqholo import (
    DIR_A,
    HamiltonianLoop,
    LoopFamily,
    TimeDepHamiltonian,
    UnwrapError,
    closed_mixing_family,
    concatenate,
    constant_family,
    double_integral_check,
    fibonacci_sphere,
    invariant_loop,
    kappa_derivative_check,
    lift_circle_samples,
    mixing_family,
    scaling_family,
    sphere_point,
    subgroup_rotation_family,
    unit_vector,
    winding_number,
)
from preqholo.families import omega_eval as family_omega


@pytest.fixture
def q():
    return sphere_point(1.1, 0.7)


def test_sdot_fd_matches_analytic(sphere1, q, rng):
    fam = closed_mixing_family(sphere1, amplitude=0.8)
    fd_fam = LoopFamily(loop_builder=fam.loop_builder, closed=True)
    for _ in range(20):
        s = rng.uniform(0.1, 0.9)
        t = rng.uniform()
        p = unit_vector(rng.normal(size=3))
        an = float(fam.sdot(s)(t, p))
        fd = float(fd_fam.sdot(s)(t, p))
        assert fd == pytest.approx(an, rel=1e-5, abs=1e-8)


def test_family_closure_probe(sphere1):
    assert closed_mixing_family(sphere1, 0.5).closure_defect_in_s() < 1e-9
    assert subgroup_rotation_family(sphere1, turns=1.0).closure_defect_in_s() < 1e-9
    assert mixing_family(sphere1, 1.0).closure_defect_in_s() > 0.01


def test_omega_constant_family(sphere1, q):
    fam = constant_family(invariant_loop(sphere1, DIR_A))
    assert abs(family_omega(sphere1, fam, 0.4, q)) < 1e-12


def test_omega_vanishes_on_subgroup_sweep(sphere1, q):
    # rotating the axis of an invariant loop never changes the holonomy, and
    # the one-form along the sweep is zero at every parameter
    fam = subgroup_rotation_family(sphere1, turns=0.5)
    for s in np.linspace(0.0, 1.0, 10):
        assert abs(family_omega(sphere1, fam, float(s), q)) < 1e-6


def test_omega_scaling_family_at_zero(sphere1):
    # the scaled generator vanishes along the polar trajectory of the base
    # loop, so the one-form at s = 0 from the north pole is zero
    fam = scaling_family(invariant_loop(sphere1, DIR_A))
    val = family_omega(sphere1, fam, 0.0, sphere_point(0.0, 0.0))
    assert abs(val) < 1e-9


def test_omega_base_point_independence(sphere1):
    fam = mixing_family(sphere1, amplitude=1.0)
    vals = [family_omega(sphere1, fam, 0.3, p) for p in fibonacci_sphere(20)]
    assert np.ptp(vals) < 1e-5


def test_derivative_check_constant_family(sphere1, q):
    fam = constant_family(invariant_loop(sphere1, DIR_A))
    dc = kappa_derivative_check(sphere1, fam, 0.5, q)
    assert dc.lhs == pytest.approx(0.0, abs=1e-7)
    assert dc.rhs == pytest.approx(0.0, abs=1e-12)


def test_derivative_check_subgroup_family(sphere1, q):
    fam = subgroup_rotation_family(sphere1, turns=0.5)
    dc = kappa_derivative_check(sphere1, fam, 0.4, q)
    assert abs(dc.lhs) < 1e-5
    assert abs(dc.rhs) < 1e-6


@pytest.mark.parametrize("s", [0.25, 0.5])
def test_derivative_check_mixing_family(sphere2, q, s):
    dc = kappa_derivative_check(sphere2, mixing_family(sphere2, 1.0), s, q)
    assert dc.rel_err < 1e-3
    # richardson oracle for the slope itself: halving the step agrees
    dc_half = kappa_derivative_check(sphere2, mixing_family(sphere2, 1.0), s, q, h_s=5e-4)
    assert abs(dc.lhs - dc_half.lhs) < 1e-4


def test_derivative_identity_detects_constant_drift(sphere1, q):
    # generators shifted by an s-dependent constant leave every flow alone
    # but move the phase; both sides of the identity equal -d(shift)/ds,
    # a nonzero two-sided check of the transport bookkeeping
    base = invariant_loop(sphere1, DIR_A)
    rate = 0.3

    def builder(s):
        f = base.hamiltonian
        g = TimeDepHamiltonian(
            eval=lambda t, u, ss=s: f.eval(t, u) + rate * ss,
            grad=f.grad,
            label=f"drift[{s:g}]",
            time_independent=True,
        )
        return HamiltonianLoop(g, closure_tol=base.closure_tol, label=f"drift[{s:g}]")

    def sd(s, t, u):
        u = np.asarray(u, float)
        return rate if u.ndim == 1 else np.full(u.shape[0], rate)

    fam = LoopFamily(loop_builder=builder, s_deriv=sd, label="drift")
    dc = kappa_derivative_check(sphere1, fam, 0.4, q)
    assert dc.lhs == pytest.approx(-rate, abs=1e-6)
    assert dc.rhs == pytest.approx(-rate, abs=1e-9)
    assert dc.rel_err < 1e-3


def test_lift_circle_samples_winding():
    svals, lift = lift_circle_samples(lambda s: (3.0 * s) % 1.0, 64)
    assert lift[-1] - lift[0] == pytest.approx(3.0, abs=1e-12)


def test_lift_refines_coarse_grid():
    calls = []

    def phase(s):
        calls.append(s)
        return (3.0 * s) % 1.0

    svals, lift = lift_circle_samples(phase, 4)
    # 4 samples alias a winding of 3; the lift must have refined the grid
    assert len(svals) > 5
    assert lift[-1] - lift[0] == pytest.approx(3.0, abs=1e-12)


def test_lift_unwrap_failure():
    rng = np.random.default_rng(0)
    with pytest.raises(UnwrapError):
        lift_circle_samples(lambda s: rng.uniform(), 8, max_samples=64)


def test_winding_requires_closed(sphere1, q):
    with pytest.raises(ValueError):
        winding_number(sphere1, mixing_family(sphere1, 1.0), q)


def test_winding_constant_family(sphere1, q):
    assert winding_number(sphere1, constant_family(invariant_loop(sphere1, DIR_A)), q, s_samples=8) == 0


def test_winding_subgroup_rotation(sphere1, q):
    fam = subgroup_rotation_family(sphere1, turns=1.0)
    assert winding_number(sphere1, fam, q, s_samples=16) == 0


def test_winding_stable_under_doubling(sphere1, q):
    fam = closed_mixing_family(sphere1, 0.6)
    w16 = winding_number(sphere1, fam, q, s_samples=16)
    w32 = winding_number(sphere1, fam, q, s_samples=32)
    assert w16 == w32 == 0


def test_winding_additive_under_concatenation(sphere1, q):
    rot = subgroup_rotation_family(sphere1, turns=1.0)
    mix = closed_mixing_family(sphere1, 0.5)
    w_rot = winding_number(sphere1, rot, q, s_samples=16)
    w_mix = winding_number(sphere1, mix, q, s_samples=16)
    w_cat = winding_number(sphere1, concatenate(rot, mix), q, s_samples=32)
    assert w_cat == w_rot + w_mix


def test_winding_homotopy_invariance(sphere1, q):
    # two explicitly homotopic closed families (amplitude scaling deforms
    # one into the other) must have equal winding
    w_a = winding_number(sphere1, closed_mixing_family(sphere1, 0.3), q, s_samples=16)
    w_b = winding_number(sphere1, closed_mixing_family(sphere1, 0.9), q, s_samples=16)
    assert w_a == w_b


def test_winding_consistent_with_one_form_sum(sphere1, q):
    # the integral of the one-form over the family agrees with minus the
    # winding before rounding
    fam = subgroup_rotation_family(sphere1, turns=1.0)
    svals = np.linspace(0.0, 1.0, 9)[:-1]
    total = sum(family_omega(sphere1, fam, float(s), q) for s in svals) / 8.0
    w = winding_number(sphere1, fam, q, s_samples=16)
    assert abs(-total - w) < 1e-3


def test_double_integral_constant_family(sphere1, q):
    val = double_integral_check(sphere1, constant_family(invariant_loop(sphere1, DIR_A)), q, s_nodes=4)
    assert abs(val) < 1e-12


def test_double_integral_subgroup_family(sphere1, q):
    val = double_integral_check(sphere1, subgroup_rotation_family(sphere1, turns=1.0), q, s_nodes=8)
    assert abs(val) < 1e-6


def test_double_integral_perturbed_family(sphere1, q):
    # degree-zero perturbation of the constant family; oracle: the winding
    # is zero, so the double integral must vanish
    fam = closed_mixing_family(sphere1, 0.4)
    assert winding_number(sphere1, fam, q, s_samples=16) == 0
    assert abs(double_integral_check(sphere1, fam, q, s_nodes=8)) < 1e-4


def test_loop_at_cache(sphere1):
    fam = subgroup_rotation_family(sphere1, turns=1.0)
    assert fam.loop_at(0.25) is fam.loop_at(0.25)
