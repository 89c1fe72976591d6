"""Peakon and kink field ansatz for the two-component zero-stretching
Holm-Staley system

    m_t = v^b m_x,   n_t = u^b n_x,   m = u - u_xx,   n = v - v_xx,

with b a positive integer.

Fields are finite sums of peakons ``p_i * exp(-|x - q_i|)`` or kinks
``c_i * sgn(x - p_i) * (exp(-|x - p_i|) - 1)``, optionally shifted by an
additive constant (the offset produced by the b = 1 boost symmetry). The
momentum densities are then a sum of Dirac atoms (peakons) or a piecewise
constant function (kinks), and all distributional pairings against smooth
test functions reduce to finite sums plus, for kinks, one piecewise-smooth
integral.

Sign convention: sgn(0) = 0 throughout. Coincident positions therefore
contribute nothing to the signed sums, which is exactly what makes the
constant-amplitude coincident branch and the stationary kink work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, integrate_panels
from .util import as_readonly, ipow

__all__ = [
    "PeakonState", "KinkState", "FieldOffset", "TestFunction", "ZERO_OFFSET",
    "eval_peakon_field", "eval_kink_field",
    "momentum_pairing", "convected_pairing",
    "Profile", "peakon_profile", "kink_profile",
    "validate_peak_profile", "validate_kink_profile",
]


def _check_b(b) -> int:
    if not isinstance(b, (int, np.integer)) or isinstance(b, bool) or b < 1:
        raise ValueError("b must be a positive integer")
    return int(b)


@dataclass(frozen=True, eq=False)
class PeakonState:
    """Multipeakon parameters at one instant.

    u(x) = sum_i p[i] * exp(-|x - q[i]|)  with N = len(p) atoms,
    v(x) = sum_j P[j] * exp(-|x - Q[j]|)  with M = len(P) atoms.

    Amplitudes may pass through zero dynamically (the atom disappears from
    the field); the shape validators flag such degenerate atoms.
    """

    b: int
    p: np.ndarray
    q: np.ndarray
    P: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", _check_b(self.b))
        for name in ("p", "q", "P", "Q"):
            object.__setattr__(self, name, as_readonly(getattr(self, name)))
        if len(self.p) != len(self.q) or len(self.p) < 1:
            raise ValueError("p and q must have equal length >= 1")
        if len(self.P) != len(self.Q) or len(self.P) < 1:
            raise ValueError("P and Q must have equal length >= 1")
        if not (np.any(self.p != 0.0) or np.any(self.q != 0.0)):
            raise ValueError("(p, q) must not be identically zero")
        if not (np.any(self.P != 0.0) or np.any(self.Q != 0.0)):
            raise ValueError("(P, Q) must not be identically zero")

    @property
    def n_u(self) -> int:
        return len(self.p)

    @property
    def n_v(self) -> int:
        return len(self.P)


@dataclass(frozen=True, eq=False)
class KinkState:
    """Multikink parameters at one instant.

    u(x) = sum_i c[i] * sgn(x - p[i]) * (exp(-|x - p[i]|) - 1),
    v(x) = sum_j ctilde[j] * sgn(x - q[j]) * (exp(-|x - q[j]|) - 1).

    The amplitudes c and ctilde are constants of the motion; only the
    positions p and q evolve.
    """

    b: int
    c: np.ndarray
    p: np.ndarray
    ctilde: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", _check_b(self.b))
        for name in ("c", "p", "ctilde", "q"):
            object.__setattr__(self, name, as_readonly(getattr(self, name)))
        if len(self.c) != len(self.p) or len(self.c) < 1:
            raise ValueError("c and p must have equal length >= 1")
        if len(self.ctilde) != len(self.q) or len(self.ctilde) < 1:
            raise ValueError("ctilde and q must have equal length >= 1")

    @property
    def n_u(self) -> int:
        return len(self.c)

    @property
    def n_v(self) -> int:
        return len(self.ctilde)


@dataclass(frozen=True)
class FieldOffset:
    """Additive constants carried by u and v.

    Stays (0, 0) for plain ansatz states; the b = 1 boost symmetry is the
    only operation that produces a nonzero offset.
    """

    du: float = 0.0
    dv: float = 0.0

    def swapped(self) -> "FieldOffset":
        return FieldOffset(self.dv, self.du)

    def negated(self) -> "FieldOffset":
        return FieldOffset(-self.du, -self.dv)

    def scaled(self, factor: float) -> "FieldOffset":
        return FieldOffset(factor * self.du, factor * self.dv)


ZERO_OFFSET = FieldOffset()

_SUPPORT_RADII = 8.0  # exp(-8^2/2) ~ 1.3e-14, below quadrature tolerance


@dataclass(frozen=True)
class TestFunction:
    """Gaussian bump exp(-(x - center)^2 / (2 width^2)).

    Treated as compactly supported on center +- 8 width; the tail beyond
    is under 2e-14 and therefore invisible at quadrature tolerance.
    """

    __test__ = False  # not a pytest collectable despite the name

    center: float
    width: float

    def __post_init__(self):
        if not (self.width > 0.0 and math.isfinite(self.width)):
            raise ValueError("test function width must be positive and finite")

    def __call__(self, x):
        z = (x - self.center) / self.width
        return np.exp(-0.5 * z * z)

    def deriv(self, x):
        return -(x - self.center) / (self.width * self.width) * self(x)

    def support(self) -> tuple[float, float]:
        r = _SUPPORT_RADII * self.width
        return (self.center - r, self.center + r)

    def integral(self) -> float:
        """Full-line integral; the truncated tail is below 1e-14 of it."""
        return self.width * math.sqrt(2.0 * math.pi)


def _blocks(state, which: str):
    """Amplitudes and positions of the requested field component."""
    if which not in ("u", "v"):
        raise ValueError("which must be 'u' or 'v'")
    if isinstance(state, PeakonState):
        return (state.p, state.q) if which == "u" else (state.P, state.Q)
    if isinstance(state, KinkState):
        return (state.c, state.p) if which == "u" else (state.ctilde, state.q)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _offset_of(offset: FieldOffset | None, which: str) -> float:
    if offset is None:
        return 0.0
    return offset.du if which == "u" else offset.dv


def _peakon_component(amps, pos, x):
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x[..., None] - pos))
    return e @ amps


def _kink_component(amps, pos, x):
    x = np.asarray(x, dtype=float)
    d = x[..., None] - pos
    return (np.sign(d) * (np.exp(-np.abs(d)) - 1.0)) @ amps


def eval_peakon_field(state: PeakonState, x, offset: FieldOffset = ZERO_OFFSET):
    """Evaluate (u, v) of a multipeakon state at x (scalar or array)."""
    u = offset.du + _peakon_component(state.p, state.q, x)
    v = offset.dv + _peakon_component(state.P, state.Q, x)
    return u, v


def eval_kink_field(state: KinkState, x, offset: FieldOffset = ZERO_OFFSET):
    """Evaluate (u, v) of a multikink state at x (scalar or array).

    Each summand is bounded by its |amplitude|, so |u| <= sum |c| + |du|.
    """
    u = offset.du + _kink_component(state.c, state.p, x)
    v = offset.dv + _kink_component(state.ctilde, state.q, x)
    return u, v


def momentum_pairing(state, phi: TestFunction, which: str = "u",
                     offset: FieldOffset = ZERO_OFFSET,
                     quad: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Distributional pairing of the momentum (m for 'u', n for 'v') with phi.

    Peakons: the momentum is a sum of Dirac atoms, so the pairing is
    sum_i amp_i * phi(pos_i). Kinks: the momentum is the piecewise constant
    -sum_i amp_i * sgn(x - pos_i), integrated against phi by Gauss-Legendre
    panels broken at each kink position inside the support. A constant field
    offset contributes offset * integral(phi) in both cases.
    """
    amps, pos = _blocks(state, which)
    off = _offset_of(offset, which)
    base = off * phi.integral() if off != 0.0 else 0.0
    if isinstance(state, PeakonState):
        return float(np.dot(amps, phi(pos))) + base
    lo, hi = phi.support()

    def integrand(x: np.ndarray) -> np.ndarray:
        return -(np.sign(x[:, None] - pos) @ amps) * phi(x)

    return integrate_panels(integrand, lo, hi, breaks=pos, config=quad) + base


def convected_pairing(state, phi: TestFunction, which: str = "u",
                      offset: FieldOffset = ZERO_OFFSET) -> float:
    """Pairing of the convected momentum flux with phi.

    For the u-equation this is <v^b m_x, phi>; for the v-equation,
    <u^b n_x, phi>. Peakon momenta differentiate to dipole atoms, giving

        -sum_i amp_i * (b w^(b-1) w_x phi + w^b phi')(pos_i),

    where w is the opposite field (offset included) and w_x uses sgn(0) = 0
    at coincident positions. Kink momenta differentiate to
    -2 sum_i amp_i delta(x - pos_i), giving -2 sum_i amp_i w(pos_i)^b phi(pos_i).
    """
    amps, pos = _blocks(state, which)
    other = "v" if which == "u" else "u"
    other_amps, other_pos = _blocks(state, other)
    w_off = _offset_of(offset, other)
    b = state.b

    d = pos[:, None] - other_pos
    e = np.exp(-np.abs(d))
    w = w_off + e @ other_amps
    if isinstance(state, PeakonState):
        w_x = -(np.sign(d) * e) @ other_amps
        terms = b * ipow(w, b - 1) * w_x * phi(pos) + ipow(w, b) * phi.deriv(pos)
        return -float(np.dot(amps, terms))
    w_at_pos = w_off + (np.sign(d) * (e - 1.0)) @ other_amps
    return -2.0 * float(np.dot(amps, ipow(w_at_pos, b) * phi(pos)))


# --- shape validation ------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """1-D profile with analytic one-sided derivatives.

    ``one_sided_slopes(x0)`` returns (left limit, right limit) of the
    derivative at x0; both limits exist for every ansatz profile.
    """

    value: Callable[[float], float]
    one_sided_slopes: Callable[[float], tuple[float, float]]


def peakon_profile(state: PeakonState, which: str = "u",
                   offset: FieldOffset = ZERO_OFFSET) -> Profile:
    amps, pos = _blocks(state, which)
    off = _offset_of(offset, which)

    def value(x0: float) -> float:
        return off + float(_peakon_component(amps, pos, float(x0)))

    def slopes(x0: float) -> tuple[float, float]:
        d = float(x0) - pos
        e = np.exp(-np.abs(d))
        smooth = -float(np.dot(amps, np.sign(d) * e))
        at = float(np.dot(amps, (d == 0.0) * 1.0))  # atoms centered at x0
        return (smooth + at, smooth - at)

    return Profile(value, slopes)


def kink_profile(state: KinkState, which: str = "u",
                 offset: FieldOffset = ZERO_OFFSET) -> Profile:
    amps, pos = _blocks(state, which)
    off = _offset_of(offset, which)

    def value(x0: float) -> float:
        return off + float(_kink_component(amps, pos, float(x0)))

    def slopes(x0: float) -> tuple[float, float]:
        # d/dx [sgn(x-p)(exp(-|x-p|)-1)] = -exp(-|x-p|) away from p, and the
        # two one-sided limits agree at p, so the slope is one-sided-smooth.
        s = -float(np.dot(amps, np.exp(-np.abs(float(x0) - pos))))
        return (s, s)

    return Profile(value, slopes)


def validate_peak_profile(profile: Profile, x0: float, rtol: float = 1e-12) -> bool:
    """True iff the profile has a genuine peak at x0.

    A peak requires finite one-sided derivative limits that are exact
    opposites and nonzero. Degenerate atoms (zero amplitude) fail the
    nonzero requirement.
    """
    dl, dr = profile.one_sided_slopes(x0)
    if not (math.isfinite(dl) and math.isfinite(dr)):
        return False
    scale = max(abs(dl), abs(dr))
    if scale == 0.0:
        return False
    return abs(dr + dl) <= rtol * scale


def validate_kink_profile(state: KinkState, which: str = "u", grid=None,
                          offset: FieldOffset = ZERO_OFFSET) -> bool:
    """True iff the sampled component is monotone and bounded by sum |amps|.

    Monotonicity is non-strict; the bound allows the offset plus a small
    floating slack.
    """
    amps, pos = _blocks(state, which)
    if grid is None:
        lo = float(np.min(pos)) - 12.0
        hi = float(np.max(pos)) + 12.0
        grid = np.linspace(lo, hi, 2001)
    grid = np.asarray(grid, dtype=float)
    vals = _offset_of(offset, which) + _kink_component(amps, pos, grid)
    steps = np.diff(vals)
    monotone = bool(np.all(steps >= 0.0) or np.all(steps <= 0.0))
    bound = float(np.sum(np.abs(amps))) + abs(_offset_of(offset, which))
    bounded = bool(np.all(np.abs(vals) <= bound + 1e-12 * (1.0 + bound)))
    return monotone and bounded
