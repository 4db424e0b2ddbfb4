"""Numerical holonomy of prequantum transport on the integer-level sphere.

The package computes the holonomy of the natural line-bundle transport along
loops of Hamiltonian flows on the sphere whose rescaled area form has total
integral n, together with the mod-1 action of a loop, the loop-space
one-form on families of loops, and integer winding numbers of closed
families.  Closed-form SU(2) flows provide exact oracles for every
integrator in the package.
"""

__version__ = "0.1.0"

from .dynamics import (
    HamiltonianLoop,
    IntegrationError,
    LoopClosureError,
    TimeDepHamiltonian,
    Trajectory,
    constant_hamiltonian,
    hamiltonian_vector_field,
    integrate_isotopy,
    normalize,
    reparametrize,
    scale_hamiltonian,
    zero_hamiltonian,
)
from .families import (
    DerivativeCheck,
    LoopFamily,
    UnwrapError,
    closed_mixing_family,
    concatenate,
    constant_family,
    double_integral_check,
    kappa_derivative_check,
    lift_circle_samples,
    mixing_family,
    phase_lift,
    scaling_family,
    subgroup_rotation_family,
    winding_number,
)
from .holonomy import (
    PhaseState,
    UnitPhase,
    action_integral,
    base_point_spread,
    berry_phase,
    circle_distance,
    kappa,
    kappa_at_fixed_point,
    product_loop,
    transport_phase,
)
from .sphere import (
    Chart,
    ChartDomainError,
    OrbitSphere,
    fibonacci_sphere,
    integrate_over_sphere,
    omega_area_triangle,
    omega_eval,
    potential_eval,
    sphere_point,
    spherical_coords,
    unit_vector,
)
from .su2 import (
    DIR_A,
    DIR_B,
    DIR_Z,
    AlgebraDirection,
    SU2Element,
    act,
    closed_form_flow,
    exp_su2,
    invariant_field,
    invariant_hamiltonian,
    invariant_loop,
    mixing_flow,
    mixing_loop,
)

__all__ = [name for name in dir() if not name.startswith("_")]
