"""Multipeakon and multikink weak solutions of the two-component
zero-stretching Holm-Staley system, with symmetry group actions and
distributional verification."""

from .ansatz import (
    FieldOffset, KinkState, PeakonState, TestFunction, ZERO_OFFSET,
    convected_pairing, eval_kink_field, eval_peakon_field, momentum_pairing,
    kink_profile, peakon_profile, validate_kink_profile, validate_peak_profile,
)
from .closed_form import (
    ConservedQuantity, ExactFlow, KinkPairParams, coincident_peakon_flow,
    conserved_kappa, matched_kink_flow, matched_kink_positions,
    relative_kink_velocity, stationary_kink_flow, traveling_kink_fields,
)
from .dynamics import (
    Event, IntegratorConfig, StateDerivative, StepSizeUnderflow, Trajectory,
    integrate, kink_rhs, pack_state, peakon_rhs, unpack_state,
)
from .quadrature import QuadratureConfig, QuadratureConvergenceError, integrate_panels
from .symmetry import (
    SymmetryTransform, apply_to_kink, apply_to_peakon, apply_transform,
    verify_symmetry,
)
from .verify import (
    InsufficientSamples, ResidualReport, StencilCrossesEvent, TestBattery,
    ValidityViolated, compare_to_oracle, conservation_drift, make_battery,
    ode_residual, weak_residual,
)

__version__ = "0.1.0"
