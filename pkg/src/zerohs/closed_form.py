"""Exact solutions and conserved quantities of the reduced systems.

These closed forms are the independent oracles for the integrator and the
weak-residual checker: a single peakon pair conserves p^b + P^b, coincident
equal-power peakons translate rigidly, a kink pair with coincident centers
is stationary, and a kink pair whose amplitudes satisfy a1^b = (-1)^b a2^b
keeps its separation and translates at a common constant speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ansatz import KinkState, PeakonState
from .dynamics import Trajectory, pack_state
from .util import ipow

__all__ = [
    "ConservedQuantity", "conserved_kappa", "real_root",
    "ExactFlow", "coincident_peakon_flow", "stationary_kink_flow",
    "KinkPairParams", "relative_kink_velocity",
    "matched_kink_positions", "matched_kink_flow", "traveling_kink_fields",
    "SPEED_CONVENTIONS",
]


@dataclass(frozen=True)
class ConservedQuantity:
    """The invariant p^b + P^b of a single peakon pair.

    Constant along the flow as long as the positions do not cross; on the
    coincident branch q = Q it is constant trivially because both
    amplitudes are.
    """

    kappa: float
    b: int

    def is_valid(self, state: PeakonState) -> bool:
        """True while the separated-positions hypothesis holds."""
        return np.sign(state.q[0] - state.Q[0]) != 0.0


def conserved_kappa(state: PeakonState) -> ConservedQuantity:
    """Conserved amplitude combination of a 1 + 1 peakon state."""
    if state.n_u != 1 or state.n_v != 1:
        raise ValueError("kappa is defined for single-pair states (N = M = 1)")
    value = float(ipow(state.p[0], state.b) + ipow(state.P[0], state.b))
    return ConservedQuantity(kappa=value, b=state.b)


def real_root(c: float, b: int) -> float:
    """Real b-th root: defined for c >= 0, or any c when b is odd."""
    if c >= 0.0:
        return float(c) ** (1.0 / b)
    if b % 2 == 1:
        return -((-float(c)) ** (1.0 / b))
    raise ValueError(f"no real {b}-th root of negative value {c!r}")


@dataclass(frozen=True)
class ExactFlow:
    """Closed-form trajectory generator: state_at(t) evaluates exactly."""

    state_at: Callable[[float], PeakonState | KinkState]
    notes: tuple[str, ...] = field(default=())

    def sample(self, times) -> Trajectory:
        times = np.asarray(times, dtype=float)
        template = self.state_at(float(times[0]))
        samples = np.stack([pack_state(self.state_at(float(t))) for t in times])
        steps = np.diff(times)
        dt = float(steps[0]) if len(steps) and np.allclose(steps, steps[0], rtol=1e-12) else None
        return Trajectory(template=template, times=times, samples=samples,
                          dt=dt, method="closed-form")


COINCIDENT_PEAKON_NOTE = (
    "coincident peakon pair: velocity is -(amplitude)^b, so a positive pair "
    "drifts leftward; the naive traveling-phase reading exp(-|x - c t + x0|) "
    "with rightward speed +c does not satisfy the position equations")


def coincident_peakon_flow(b: int, c: float, q0: float = 0.0,
                           opposite: bool = False) -> ExactFlow:
    """Rigidly translating peakon pair with coincident positions q = Q.

    Amplitudes are the real b-th root of c (for the u = v branch) or the
    pair (root, -root) for the u = -v branch, which needs even b so that
    p^b = P^b still holds. Both positions move at the constant velocity
    -P^b dictated by the position equations.
    """
    amp = real_root(c, b)
    if opposite:
        if b % 2 != 0:
            raise ValueError("the u = -v branch requires even b")
        amp_v = -amp
    else:
        amp_v = amp
    velocity = -ipow(amp_v, b)

    def state_at(t: float) -> PeakonState:
        pos = q0 + velocity * t
        return PeakonState(b, [amp], [pos], [amp_v], [pos])

    return ExactFlow(state_at, notes=(COINCIDENT_PEAKON_NOTE,))


def stationary_kink_flow(b: int, c: float, ctilde: float, k: float = 0.0) -> ExactFlow:
    """Single kink in each field, both centered at k: stationary.

    Each field vanishes at the shared center (sgn(0) = 0), so both position
    derivatives are exactly zero for every b and every amplitude pair.
    """
    state = KinkState(b, [c], [k], [ctilde], [k])

    def state_at(t: float) -> KinkState:
        return state

    return ExactFlow(state_at)


@dataclass(frozen=True)
class KinkPairParams:
    """One kink in each field: amplitudes a1 (u) and a2 (v), separation x0.

    ``mismatch`` is ((-1)^b a2^b - a1^b) / a1^b; the pair keeps a constant
    separation exactly when it vanishes, i.e. when a1^b = (-1)^b a2^b.
    """

    b: int
    a1: float
    a2: float
    x0: float = 0.0

    def __post_init__(self):
        if self.b < 1 or not isinstance(self.b, (int, np.integer)):
            raise ValueError("b must be a positive integer")
        if self.a1 * self.a2 == 0.0:
            raise ValueError("kink amplitudes a1, a2 must be nonzero")

    @property
    def mismatch(self) -> float:
        sign = 1.0 if self.b % 2 == 0 else -1.0
        a1b = ipow(self.a1, self.b)
        return (sign * ipow(self.a2, self.b) - a1b) / a1b

    @property
    def is_matched(self) -> bool:
        sign = 1.0 if self.b % 2 == 0 else -1.0
        return ipow(self.a1, self.b) == sign * ipow(self.a2, self.b)

    def state_at_positions(self, p: float, q: float) -> KinkState:
        return KinkState(self.b, [self.a1], [p], [self.a2], [q])


def relative_kink_velocity(params: KinkPairParams, delta: float) -> float:
    """Separation velocity (p - q)' of the kink pair at separation delta.

    Equals -(+/-)a1^b * mismatch * (sgn(delta) (exp(-|delta|) - 1))^b with
    the parity sign (-1)^(b+1); identically zero for matched amplitudes.
    """
    b = params.b
    parity = 1.0 if b % 2 == 1 else -1.0
    coeff = parity * ipow(params.a1, b) * params.mismatch
    # same exp ufunc as the rhs evaluation, so power-of-two amplitude grids
    # reproduce the rhs difference p' - q' bit for bit
    e1 = float(np.exp(-np.abs(np.array([delta])))[0]) - 1.0
    shape = ipow(float(np.sign(delta)), b) * ipow(e1, b)
    return float(coeff * shape)


SPEED_CONVENTIONS = ("ode", "mirrored")

MATCHED_KINK_NOTE = (
    "matched kink pair: for odd b the sign of the common speed is a known "
    "transcription pitfall; the 'ode' convention is the one that satisfies "
    "the kink position equations, the 'mirrored' convention multiplies the "
    "speed by (-1)^b and fails them for odd b (both agree for even b)")


def _common_speed(params: KinkPairParams, convention: str) -> float:
    if convention not in SPEED_CONVENTIONS:
        raise ValueError(f"speed convention must be one of {SPEED_CONVENTIONS}")
    if not params.is_matched:
        raise ValueError(
            "matched kink pair requires a1^b = (-1)^b a2^b "
            f"(got a1^b={ipow(params.a1, params.b)!r}, a2^b={ipow(params.a2, params.b)!r})")
    b = params.b
    shape = ipow(np.sign(params.x0), b) * ipow(math.exp(-abs(params.x0)) - 1.0, b)
    speed = -ipow(params.a2, b) * shape
    if convention == "mirrored" and b % 2 == 1:
        speed = -speed
    return float(speed)


def matched_kink_positions(params: KinkPairParams, t: float,
                           convention: str = "ode") -> tuple[float, float]:
    """Positions (p, q) = (s t + x0, s t) of the co-moving kink pair.

    The pair exists under the matched-amplitude hypothesis
    a1^b = (-1)^b a2^b, which freezes the separation at x0. With x0 = 0 the
    pair is stationary. See MATCHED_KINK_NOTE for the two speed
    conventions exposed for odd b.
    """
    s = _common_speed(params, convention)
    return (s * t + params.x0, s * t)


def matched_kink_flow(params: KinkPairParams, convention: str = "ode") -> ExactFlow:
    """Exact trajectory generator for the co-moving kink pair."""
    s = _common_speed(params, convention)

    def state_at(t: float) -> KinkState:
        return params.state_at_positions(s * t + params.x0, s * t)

    return ExactFlow(state_at, notes=(MATCHED_KINK_NOTE,))


def traveling_kink_fields(params: KinkPairParams, x, t: float,
                          convention: str = "ode"):
    """(u, v) of the co-moving kink pair at position x and time t."""
    from .ansatz import eval_kink_field
    p, q = matched_kink_positions(params, t, convention)
    return eval_kink_field(params.state_at_positions(p, q), x)
