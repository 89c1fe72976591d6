"""Finite-dimensional dynamics of the peakon and kink ansatz parameters.

The multipeakon system couples amplitudes and positions,

    p_i' =  b p_i S_i^(b-1) T_i,      q_i' = -S_i^b,
    S_i  =  sum_j P_j exp(-|q_i - Q_j|),
    T_i  =  sum_j P_j sgn(q_i - Q_j) exp(-|q_i - Q_j|),

with the mirrored equations for (P, Q) driven by (p, q). The multikink
system moves positions only,

    p_i' = -( sum_j ctilde_j sgn(p_i - q_j) (exp(-|p_i - q_j|) - 1) )^b,

and the mirrored equation for q_i driven by (c, p). Both use sgn(0) = 0,
and all integer powers are evaluated by repeated multiplication so that
negative bases behave exactly.

Integration is classical fixed-step RK4 by default (deterministic, clean
4th-order convergence); an adaptive step-doubling variant is available.
Crossings of any u-position with any v-position are non-smooth points of
the right-hand side; they are detected per step, located by bisection on
the dense linear interpolant, logged, and either halt the run (default) or
restart it at the event time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .ansatz import FieldOffset, KinkState, PeakonState, ZERO_OFFSET
from .util import ipow

__all__ = [
    "StateDerivative", "IntegratorConfig", "Event", "Trajectory",
    "StepSizeUnderflow", "peakon_rhs", "kink_rhs", "integrate",
    "pack_state", "unpack_state", "state_layout",
]

EVENT_LOCATE_TOL = 1e-10   # bisection width in t for event location
EVENT_DEADBAND = 1e-9      # |distance| below which a pair counts as coincident
MIN_ADAPTIVE_DT = 1e-14


class StepSizeUnderflow(RuntimeError):
    """Adaptive step control drove dt below the representable floor."""


@dataclass(frozen=True)
class StateDerivative:
    """Time derivative of a state, split into the four parameter blocks.

    For kink states both amplitude blocks are identically zero.
    """

    u_amplitudes: np.ndarray
    v_amplitudes: np.ndarray
    u_positions: np.ndarray
    v_positions: np.ndarray

    def packed(self) -> np.ndarray:
        return np.concatenate([self.u_amplitudes, self.v_amplitudes,
                               self.u_positions, self.v_positions])


@dataclass(frozen=True)
class Layout:
    """Slices of the packed vector [amps_u, amps_v, pos_u, pos_v]."""

    n_u: int
    n_v: int

    @property
    def amps_u(self) -> slice:
        return slice(0, self.n_u)

    @property
    def amps_v(self) -> slice:
        return slice(self.n_u, self.n_u + self.n_v)

    @property
    def pos_u(self) -> slice:
        k = self.n_u + self.n_v
        return slice(k, k + self.n_u)

    @property
    def pos_v(self) -> slice:
        k = self.n_u + self.n_v
        return slice(k + self.n_u, k + self.n_u + self.n_v)

    @property
    def amplitudes(self) -> slice:
        return slice(0, self.n_u + self.n_v)

    @property
    def positions(self) -> slice:
        return slice(self.n_u + self.n_v, 2 * (self.n_u + self.n_v))

    @property
    def size(self) -> int:
        return 2 * (self.n_u + self.n_v)


def state_layout(state) -> Layout:
    return Layout(state.n_u, state.n_v)


def pack_state(state) -> np.ndarray:
    """Flatten to [amps_u, amps_v, pos_u, pos_v]."""
    if isinstance(state, PeakonState):
        return np.concatenate([state.p, state.P, state.q, state.Q])
    if isinstance(state, KinkState):
        return np.concatenate([state.c, state.ctilde, state.p, state.q])
    raise TypeError(f"unsupported state type {type(state).__name__}")


def unpack_state(template, y: np.ndarray):
    """Rebuild a state of the template's shape from a packed vector."""
    lay = state_layout(template)
    if isinstance(template, PeakonState):
        return PeakonState(template.b, y[lay.amps_u], y[lay.pos_u],
                           y[lay.amps_v], y[lay.pos_v])
    return KinkState(template.b, y[lay.amps_u], y[lay.pos_u],
                     y[lay.amps_v], y[lay.pos_v])


def _peakon_block(b: int, amps, pos, other_amps, other_pos):
    """(d_amps, d_pos) for one peakon block driven by the opposite field.

    Both blocks of the system go through this single code path, which is
    what makes the u/v swap an exact (bit-identical) symmetry of the
    computed flow.
    """
    d = pos[:, None] - other_pos
    e = np.exp(-np.abs(d))
    s = e @ other_amps
    t = (np.sign(d) * e) @ other_amps
    d_amps = b * amps * ipow(s, b - 1) * t
    d_pos = -ipow(s, b)
    return d_amps, d_pos


def _kink_block(b: int, pos, other_amps, other_pos):
    d = pos[:, None] - other_pos
    inner = (np.sign(d) * (np.exp(-np.abs(d)) - 1.0)) @ other_amps
    return -ipow(inner, b)


def peakon_rhs(state: PeakonState) -> StateDerivative:
    """Right-hand side of the multipeakon system."""
    dp, dq = _peakon_block(state.b, state.p, state.q, state.P, state.Q)
    dP, dQ = _peakon_block(state.b, state.P, state.Q, state.p, state.q)
    return StateDerivative(dp, dP, dq, dQ)


def kink_rhs(state: KinkState) -> StateDerivative:
    """Right-hand side of the multikink system; amplitudes do not move."""
    dp = _kink_block(state.b, state.p, state.ctilde, state.q)
    dq = _kink_block(state.b, state.q, state.c, state.p)
    return StateDerivative(np.zeros_like(state.c), np.zeros_like(state.ctilde),
                           dp, dq)


def rhs_vector_field(template) -> Callable[[np.ndarray], np.ndarray]:
    """Packed-vector right-hand side matching the template's kind."""
    lay = state_layout(template)
    b = template.b
    if isinstance(template, PeakonState):
        def f(y: np.ndarray) -> np.ndarray:
            pu, pv = y[lay.amps_u], y[lay.amps_v]
            qu, qv = y[lay.pos_u], y[lay.pos_v]
            dpu, dqu = _peakon_block(b, pu, qu, pv, qv)
            dpv, dqv = _peakon_block(b, pv, qv, pu, qu)
            return np.concatenate([dpu, dpv, dqu, dqv])
        return f

    def f(y: np.ndarray) -> np.ndarray:
        cu, cv = y[lay.amps_u], y[lay.amps_v]
        pu, pv = y[lay.pos_u], y[lay.pos_v]
        dpu = _kink_block(b, pu, cv, pv)
        dpv = _kink_block(b, pv, cu, pu)
        return np.concatenate([np.zeros_like(cu), np.zeros_like(cv), dpu, dpv])
    return f


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_span: tuple[float, float] = (0.0, 1.0)
    method: str = "rk4"            # "rk4" or "rk4-adaptive"
    tol: float = 1e-10             # adaptive local error target per step
    event_policy: str = "halt"     # "halt" or "cross"

    def __post_init__(self):
        if self.method not in ("rk4", "rk4-adaptive"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.event_policy not in ("halt", "cross"):
            raise ValueError(f"unknown event policy {self.event_policy!r}")
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if not (self.tol > 0.0 and np.isfinite(self.tol)):
            raise ValueError("tol must be positive and finite")
        t0, t1 = self.t_span
        if not (np.isfinite(t0) and np.isfinite(t1) and t1 > t0):
            raise ValueError("t_span must be a finite nonempty interval")


@dataclass(frozen=True)
class Event:
    t: float
    kind: str   # "crossing" or "touch"
    i: int      # index into the u-position block
    j: int      # index into the v-position block


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered samples of one integrated (or exactly generated) state.

    ``samples[k]`` is the packed vector [amps_u, amps_v, pos_u, pos_v] at
    ``times[k]``. The template carries b and the block shapes; the offset
    is nonzero only after a boost transform.
    """

    template: PeakonState | KinkState
    times: np.ndarray
    samples: np.ndarray
    offset: FieldOffset = ZERO_OFFSET
    events: tuple[Event, ...] = ()
    dt: float | None = None
    method: str = "rk4"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "samples", samples)
        if times.ndim != 1 or samples.shape != (len(times), state_layout(self.template).size):
            raise ValueError("trajectory samples do not match template layout")
        if len(times) >= 2 and not np.all(np.diff(times) > 0.0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def kind(self) -> str:
        return "peakon" if isinstance(self.template, PeakonState) else "kink"

    @property
    def layout(self) -> Layout:
        return state_layout(self.template)

    def state(self, k: int):
        return unpack_state(self.template, self.samples[k])

    def state_at(self, t: float):
        return unpack_state(self.template, self.sample_at(t))

    def sample_at(self, t: float) -> np.ndarray:
        """Dense linear interpolant of the packed samples."""
        times = self.times
        if not (times[0] <= t <= times[-1]):
            raise ValueError(f"t={t} outside trajectory span "
                             f"[{times[0]}, {times[-1]}]")
        k = int(np.searchsorted(times, t, side="right") - 1)
        if k >= len(times) - 1:
            return self.samples[-1].copy()
        w = (t - times[k]) / (times[k + 1] - times[k])
        return (1.0 - w) * self.samples[k] + w * self.samples[k + 1]

    def spatial_hull(self) -> tuple[float, float]:
        pos = self.samples[:, self.layout.positions]
        return float(np.min(pos)), float(np.max(pos))

    def uniform_dt(self, rtol: float = 1e-9) -> float:
        """Common sample spacing; raises ValueError if spacing varies."""
        steps = np.diff(self.times)
        if len(steps) == 0:
            raise ValueError("trajectory has a single sample")
        h = float(steps[0])
        if np.any(np.abs(steps - h) > rtol * max(h, 1e-300)):
            raise ValueError("trajectory samples are not uniformly spaced")
        return h

    def replace(self, **kw) -> "Trajectory":
        return replace(self, **kw)


def _rk4_step(f, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _pair_distances(lay: Layout, y: np.ndarray) -> np.ndarray:
    return y[lay.pos_u][:, None] - y[lay.pos_v][None, :]


def _locate_crossing(t0: float, t1: float, d0: float, d1: float) -> float:
    """Bisect the linear interpolant of the pair distance to EVENT_LOCATE_TOL."""
    lo, hi = t0, t1
    flo = d0
    while hi - lo > EVENT_LOCATE_TOL:
        mid = 0.5 * (lo + hi)
        w = (mid - t0) / (t1 - t0)
        fmid = (1.0 - w) * d0 + w * d1
        if fmid == 0.0:
            return mid
        if (flo < 0.0) != (fmid < 0.0):
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _first_event(lay: Layout, t0: float, t1: float,
                 y0: np.ndarray, y1: np.ndarray,
                 skip: tuple[int, int] | None = None) -> Event | None:
    """Earliest position crossing inside one step, if any.

    A pair already inside the deadband at the step start (typically just
    after a located event) is not re-reported, and the pair named by
    ``skip`` (the event just handled) is ignored for this one step; a pair
    landing exactly on zero is reported as a touch.
    """
    d0 = _pair_distances(lay, y0)
    d1 = _pair_distances(lay, y1)
    armed = np.abs(d0) > EVENT_DEADBAND
    if skip is not None:
        armed[skip] = False
    crossing = armed & (d0 * d1 < 0.0)
    touch = armed & (d1 == 0.0)
    if not (np.any(crossing) or np.any(touch)):
        return None
    best: Event | None = None
    for i, j in np.argwhere(crossing | touch):
        if crossing[i, j]:
            t_ev = _locate_crossing(t0, t1, float(d0[i, j]), float(d1[i, j]))
            kind = "crossing"
        else:
            t_ev, kind = t1, "touch"
        if best is None or t_ev < best.t:
            best = Event(t_ev, kind, int(i), int(j))
    return best


def integrate(state, config: IntegratorConfig) -> Trajectory:
    """Integrate the peakon or kink system for one state.

    Deterministic: identical inputs give bit-identical trajectories. The
    sample grid is t0 + k dt (plus a shorter final step when the span is
    not a multiple of dt); adaptive runs sample at every accepted step.
    """
    f = rhs_vector_field(state)
    lay = state_layout(state)
    t0, t1 = config.t_span
    y = pack_state(state)
    times = [t0]
    samples = [y.copy()]
    events: list[Event] = []
    tiny = 1e-12 * max(1.0, abs(t1 - t0))

    just_crossed: list[tuple[int, int] | None] = [None]

    def handle_event(t_now: float, y_now: np.ndarray, t_next: float,
                     y_next: np.ndarray) -> tuple[float, np.ndarray, bool]:
        """Re-steps onto the event time. Returns (t, y, halt)."""
        ev = _first_event(lay, t_now, t_next, y_now, y_next,
                          skip=just_crossed[0])
        just_crossed[0] = None
        if ev is None:
            times.append(t_next)
            samples.append(y_next.copy())
            return t_next, y_next, False
        # keep the event sample strictly after t_now so times stay increasing
        t_ev = min(max(ev.t, t_now + EVENT_LOCATE_TOL), t_next)
        ev = Event(t_ev, ev.kind, ev.i, ev.j)
        y_ev = _rk4_step(f, y_now, t_ev - t_now)
        events.append(ev)
        times.append(t_ev)
        samples.append(y_ev.copy())
        just_crossed[0] = (ev.i, ev.j)
        return t_ev, y_ev, config.event_policy == "halt"

    if config.method == "rk4":
        t_anchor, k, t, halted = t0, 0, t0, False
        while t < t1 - tiny and not halted:
            target = min(t_anchor + (k + 1) * config.dt, t1)
            h = target - t
            y_next = _rk4_step(f, y, h)
            t_new, y_new, halted = handle_event(t, y, target, y_next)
            if t_new != target and not halted:   # crossed and continuing
                t_anchor, k = t_new, 0
            else:
                k += 1
            t, y = t_new, y_new
    else:
        t, h, halted = t0, min(config.dt, t1 - t0), False
        while t < t1 - tiny and not halted:
            h = min(h, t1 - t)
            if h < MIN_ADAPTIVE_DT:
                raise StepSizeUnderflow(
                    f"adaptive step fell below {MIN_ADAPTIVE_DT:g} at t={t!r}")
            y_full = _rk4_step(f, y, h)
            y_half = _rk4_step(f, _rk4_step(f, y, 0.5 * h), 0.5 * h)
            err = float(np.max(np.abs(y_half - y_full))) / 15.0
            if not np.isfinite(err):
                h *= 0.1
                continue
            if err > config.tol:
                h *= max(0.1, 0.9 * (config.tol / err) ** 0.2)
                continue
            t_new, y_new, halted = handle_event(t, y, t + h, y_half)
            t, y = t_new, y_new
            if err > 0.0:
                h *= min(4.0, max(0.1, 0.9 * (config.tol / err) ** 0.2))
            else:
                h *= 4.0

    return Trajectory(template=state, times=np.array(times),
                      samples=np.array(samples), events=tuple(events),
                      dt=config.dt if config.method == "rk4" else None,
                      method=config.method)
