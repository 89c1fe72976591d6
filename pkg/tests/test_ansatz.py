"""Field evaluation, distributional pairings and shape validators.

Expected values are either immediate hand arithmetic or frozen from an
independent oracle computed in this file (error-function integrals, or the
mollified momentum pairing integral(u phi + u_x phi_x)).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zerohs import (FieldOffset, KinkState, PeakonState, TestFunction,
                    convected_pairing, eval_kink_field, eval_peakon_field,
                    kink_profile, momentum_pairing, peakon_profile,
                    validate_kink_profile, validate_peak_profile)
from zerohs.quadrature import integrate_panels

LN2 = math.log(2.0)


# --- states and fields -------------------------------------------------------

def test_state_invariants():
    with pytest.raises(ValueError, match="positive integer"):
        PeakonState(0, [1.0], [0.0], [1.0], [0.0])
    with pytest.raises(ValueError, match="positive integer"):
        KinkState(-2, [1.0], [0.0], [1.0], [0.0])
    with pytest.raises(ValueError, match="identically zero"):
        PeakonState(1, [0.0], [0.0], [1.0], [0.0])
    with pytest.raises(ValueError, match="equal length"):
        PeakonState(1, [1.0, 2.0], [0.0], [1.0], [0.0])
    # zero u-field is representable with a nonzero position marker
    PeakonState(1, [0.0], [1.0], [1.0], [0.0])


def test_states_immutable():
    s = PeakonState(1, [1.0], [0.0], [1.0], [0.0])
    with pytest.raises(ValueError):
        s.p[0] = 2.0


def test_eval_peakon_point_values():
    s = PeakonState(1, [2.0], [0.0], [1.0], [0.0])
    assert eval_peakon_field(s, 0.0) == (2.0, 1.0)
    u, v = eval_peakon_field(s, LN2)
    assert abs(u - 1.0) < 1e-15 and abs(v - 0.5) < 1e-15


def test_eval_peakon_two_atoms():
    s = PeakonState(2, [1.0, -1.0], [0.0, 1.0], [1.0], [0.0])
    u, v = eval_peakon_field(s, 0.5)
    assert u == 0.0  # symmetric cancellation
    assert abs(v - math.exp(-0.5)) < 1e-15


def test_eval_peakon_offset_and_vectorized():
    s = PeakonState(1, [1.0], [0.0], [1.0], [0.0])
    x = np.linspace(-2, 2, 9)
    u, v = eval_peakon_field(s, x, FieldOffset(0.25, -0.5))
    assert u.shape == x.shape
    assert abs(u[4] - 1.25) < 1e-15 and abs(v[4] - 0.5) < 1e-15


def test_eval_kink_point_values():
    s = KinkState(1, [1.0], [0.0], [1.0], [0.0])
    assert eval_kink_field(s, 0.0)[0] == 0.0            # sgn(0) = 0
    u10 = eval_kink_field(s, 10.0)[0]
    assert abs(u10 - (math.exp(-10.0) - 1.0)) < 1e-15
    assert eval_kink_field(s, -10.0)[0] == -u10          # odd about the center


@settings(derandomize=True, max_examples=60)
@given(st.floats(-30, 30), st.floats(-3, 3), st.floats(-3, 3))
def test_kink_field_bounded(x, c1, c2):
    s = KinkState(1, [c1, c2], [-1.0, 2.0], [1.0], [0.0])
    u, _ = eval_kink_field(s, x)
    assert abs(u) <= abs(c1) + abs(c2) + 1e-12


def test_peakon_field_continuous_at_atom():
    s = PeakonState(1, [1.5], [0.3], [1.0], [0.0])
    eps = 1e-9
    left, _ = eval_peakon_field(s, 0.3 - eps)
    right, _ = eval_peakon_field(s, 0.3 + eps)
    at, _ = eval_peakon_field(s, 0.3)
    assert abs(left - at) < 1e-8 and abs(right - at) < 1e-8


# --- momentum pairings -------------------------------------------------------

def test_peakon_momentum_atom_at_peak():
    s = PeakonState(1, [3.0], [1.0], [1.0], [0.0])
    phi = TestFunction(1.0, 1.0)
    assert momentum_pairing(s, phi, "u") == 3.0


def test_kink_momentum_odd_integrand():
    s = KinkState(1, [1.0], [0.0], [1.0], [0.0])
    phi = TestFunction(0.0, 1.0)   # even about the kink center
    assert abs(momentum_pairing(s, phi, "u")) < 1e-14


def test_kink_momentum_one_sided():
    # independent oracle: integral of sgn(x) * gaussian(center 2, width 1/2)
    # equals width sqrt(2 pi) erf(4 / sqrt 2)
    s = KinkState(1, [1.0], [0.0], [1.0], [0.0])
    phi = TestFunction(2.0, 0.5)
    expected = -0.5 * math.sqrt(2.0 * math.pi) * math.erf(4.0 / math.sqrt(2.0))
    assert abs(momentum_pairing(s, phi, "u") - expected) < 1e-12


def test_peakon_momentum_matches_mollified_oracle():
    # independent oracle: <(1 - dxx) u, phi> = integral(u phi + u_x phi_x)
    # after one integration by parts, with panels split at every atom.
    # Since (1 - dxx) exp(-|x|) = 2 delta(x), the operator pairing is exactly
    # twice the atomic pairing sum_i p_i phi(q_i); both sides of the weak
    # residual use the atomic normalization, so the factor is global.
    s = PeakonState(2, [1.2, -0.7], [-0.4, 0.9], [2.0], [0.3])
    phi = TestFunction(0.2, 0.8)
    lo, hi = phi.support()

    def integrand(x):
        u, _ = eval_peakon_field(s, x)
        u_x = -(np.sign(x[:, None] - s.q) * np.exp(-np.abs(x[:, None] - s.q))) @ s.p
        return u * phi(x) + u_x * phi.deriv(x)

    oracle = integrate_panels(integrand, lo, hi, breaks=s.q)
    assert abs(2.0 * momentum_pairing(s, phi, "u") - oracle) < 1e-8


def test_momentum_offset_term():
    s = PeakonState(1, [1.0], [0.0], [1.0], [0.0])
    phi = TestFunction(0.0, 1.0)
    base = momentum_pairing(s, phi, "u")
    with_off = momentum_pairing(s, phi, "u", FieldOffset(0.5, 0.0))
    assert abs(with_off - base - 0.5 * phi.integral()) < 1e-14
    # v-side unaffected by du
    assert momentum_pairing(s, phi, "v", FieldOffset(0.5, 0.0)) == \
        momentum_pairing(s, phi, "v")


@settings(derandomize=True, max_examples=40)
@given(st.floats(-4, 4).filter(lambda a: abs(a) > 1e-3))
def test_momentum_linear_in_amplitudes(alpha):
    base = PeakonState(1, [1.0, -0.5], [0.0, 1.0], [1.0], [0.0])
    scaled = PeakonState(1, alpha * base.p, base.q, [1.0], [0.0])
    phi = TestFunction(0.3, 0.7)
    lhs = momentum_pairing(scaled, phi, "u")
    rhs = alpha * momentum_pairing(base, phi, "u")
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


# --- convected pairings ------------------------------------------------------

def test_convected_peakon_coincident_atoms():
    s = PeakonState(1, [1.0], [0.0], [1.0], [0.0])
    phi = TestFunction(0.0, 1.0)
    assert convected_pairing(s, phi, "u") == 0.0   # sgn(0)=0 and phi'(0)=0


def test_convected_peakon_reduces_to_phi_prime_term_when_coincident():
    b = 3
    s = PeakonState(b, [1.3], [0.4], [0.8], [0.4])
    phi = TestFunction(-0.2, 0.6)
    expected = -1.3 * (0.8 ** b) * phi.deriv(np.array([0.4]))[0]
    assert abs(convected_pairing(s, phi, "u") - expected) < 1e-15


def test_convected_kink_value():
    s = KinkState(1, [1.0], [LN2], [1.0], [0.0])
    phi = TestFunction(LN2, 1.0)   # phi(p) = 1
    # v(ln 2) = -(1/2), so -2 c v^b phi = 1
    assert abs(convected_pairing(s, phi, "u") - 1.0) < 1e-15


def test_convected_kink_stationary_center():
    s = KinkState(4, [1.7], [0.3], [-2.0], [0.3])
    phi = TestFunction(0.3, 0.5)
    assert convected_pairing(s, phi, "u") == 0.0
    assert convected_pairing(s, phi, "v") == 0.0


# --- shape validators --------------------------------------------------------

def test_peak_at_atom():
    s = PeakonState(1, [2.0], [0.0], [1.0], [5.0])
    prof = peakon_profile(s, "u")
    dl, dr = prof.one_sided_slopes(0.0)
    assert dl == 2.0 and dr == -2.0
    assert validate_peak_profile(prof, 0.0)


def test_kink_center_is_not_a_peak():
    s = KinkState(1, [1.0], [0.0], [1.0], [0.0])
    prof = kink_profile(s, "u")
    assert prof.one_sided_slopes(0.0) == (-1.0, -1.0)
    assert not validate_peak_profile(prof, 0.0)


def test_smooth_point_is_not_a_peak():
    s = PeakonState(1, [1.0], [0.0], [1.0], [5.0])
    assert not validate_peak_profile(peakon_profile(s, "u"), 1.0)


def test_zero_amplitude_atom_flagged():
    s = PeakonState(1, [0.0, 1.0], [0.0, 4.0], [1.0], [0.0])
    assert not validate_peak_profile(peakon_profile(s, "u"), 0.0)


def test_single_kink_profile_valid():
    s = KinkState(1, [1.0], [0.0], [1.0], [0.0])
    assert validate_kink_profile(s, "u")


def test_two_opposed_kinks_not_monotone():
    s = KinkState(1, [1.0, -1.0], [0.0, 5.0], [1.0], [0.0])
    assert not validate_kink_profile(s, "u")


def test_degenerate_zero_kink_profile_valid():
    s = KinkState(1, [0.0], [0.0], [1.0], [0.0])
    assert validate_kink_profile(s, "u")


def test_test_function_tail_below_support_cut():
    phi = TestFunction(1.0, 2.0)
    lo, hi = phi.support()
    assert phi(lo) < 1e-13 and phi(hi) < 1e-13
    with pytest.raises(ValueError):
        TestFunction(0.0, 0.0)
