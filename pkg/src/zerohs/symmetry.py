"""Group actions on trajectories: the continuous point symmetries of the
system and its discrete symmetries.

Continuous actions (group parameter epsilon):

  translate-x   positions shift by epsilon
  translate-t   sample times shift by epsilon
  scale         amplitudes gain e^eps, time contracts by e^(-eps b)
  boost         (b = 1 only) positions gain -eps t and both fields gain
                the additive constant eps, recorded as a FieldOffset

Discrete actions:

  reflect-xt    (x, t) -> (-x, -t)
  swap-uv       exchange the u and v parameter blocks
  negate-uv     negate both fields (even b only)
  negate-tuv    negate both fields and reverse time (odd b only)

All act on the parameter paths of a trajectory; the ansatz family is
closed under each of them, except that boost adds the constant offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import FieldOffset, KinkState, PeakonState
from .dynamics import Event, Trajectory

__all__ = [
    "SymmetryTransform", "CONTINUOUS_KINDS", "DISCRETE_KINDS", "ALL_KINDS",
    "apply_to_peakon", "apply_to_kink", "apply_transform", "verify_symmetry",
]

CONTINUOUS_KINDS = ("translate-x", "translate-t", "scale", "boost")
DISCRETE_KINDS = ("reflect-xt", "swap-uv", "negate-uv", "negate-tuv")
ALL_KINDS = CONTINUOUS_KINDS + DISCRETE_KINDS


@dataclass(frozen=True)
class SymmetryTransform:
    """One group element; epsilon is meaningful for continuous kinds only."""

    kind: str
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown symmetry kind {self.kind!r}")
        if self.kind in DISCRETE_KINDS and self.epsilon != 0.0:
            raise ValueError(f"{self.kind} takes no group parameter")
        if not np.isfinite(self.epsilon):
            raise ValueError("epsilon must be finite")


def _swapped_template(template):
    if isinstance(template, PeakonState):
        return PeakonState(template.b, template.P, template.Q, template.p, template.q)
    return KinkState(template.b, template.ctilde, template.q, template.c, template.p)


def apply_transform(transform: SymmetryTransform, traj: Trajectory) -> Trajectory:
    """Apply a symmetry to a trajectory, returning the transformed one."""
    kind = transform.kind
    eps = transform.epsilon
    b = traj.template.b
    lay = traj.layout
    times = traj.times.copy()
    samples = traj.samples.copy()
    offset = traj.offset
    events = traj.events
    template = traj.template
    dt = traj.dt

    if kind == "translate-x":
        samples[:, lay.positions] += eps
    elif kind == "translate-t":
        times = times + eps
        events = tuple(Event(ev.t + eps, ev.kind, ev.i, ev.j) for ev in events)
    elif kind == "scale":
        grow = np.exp(eps)
        shrink = np.exp(-eps * b)
        samples[:, lay.amplitudes] *= grow
        times = shrink * times
        offset = offset.scaled(grow)
        events = tuple(Event(shrink * ev.t, ev.kind, ev.i, ev.j) for ev in events)
        if dt is not None:
            dt = shrink * dt
    elif kind == "boost":
        if b != 1:
            raise ValueError("boost is a symmetry of the b = 1 system only")
        samples[:, lay.positions] -= eps * times[:, None]
        offset = FieldOffset(offset.du + eps, offset.dv + eps)
    elif kind == "reflect-xt":
        times = -times[::-1]
        samples = samples[::-1].copy()
        samples[:, lay.positions] *= -1.0
        events = tuple(Event(-ev.t, ev.kind, ev.i, ev.j) for ev in reversed(events))
    elif kind == "swap-uv":
        order = np.r_[np.arange(*lay.amps_v.indices(lay.size)),
                      np.arange(*lay.amps_u.indices(lay.size)),
                      np.arange(*lay.pos_v.indices(lay.size)),
                      np.arange(*lay.pos_u.indices(lay.size))]
        samples = samples[:, order]
        template = _swapped_template(template)
        offset = offset.swapped()
        events = tuple(Event(ev.t, ev.kind, ev.j, ev.i) for ev in events)
    elif kind == "negate-uv":
        if b % 2 != 0:
            raise ValueError("negating both fields is a symmetry for even b only")
        samples[:, lay.amplitudes] *= -1.0
        offset = offset.negated()
    elif kind == "negate-tuv":
        if b % 2 != 1:
            raise ValueError("time-reversed negation is a symmetry for odd b only")
        times = -times[::-1]
        samples = samples[::-1].copy()
        samples[:, lay.amplitudes] *= -1.0
        offset = offset.negated()
        events = tuple(Event(-ev.t, ev.kind, ev.i, ev.j) for ev in reversed(events))

    return Trajectory(template=template, times=times, samples=samples,
                      offset=offset, events=events, dt=dt, method=traj.method)


def apply_to_peakon(transform: SymmetryTransform, traj: Trajectory) -> Trajectory:
    if traj.kind != "peakon":
        raise TypeError("apply_to_peakon expects a peakon trajectory")
    return apply_transform(transform, traj)


def apply_to_kink(transform: SymmetryTransform, traj: Trajectory) -> Trajectory:
    if traj.kind != "kink":
        raise TypeError("apply_to_kink expects a kink trajectory")
    return apply_transform(transform, traj)


def verify_symmetry(transform: SymmetryTransform, traj: Trajectory,
                    checker: str = "ode", factor: float = 10.0,
                    battery_size: int | None = None,
                    battery_seed: int | None = None):
    """Check that a transform maps a valid trajectory to a valid one.

    Runs the selected checker on the original trajectory to establish a
    baseline, transforms, and requires the transformed residual to stay
    within ``factor`` times the baseline. Boosted trajectories leave the
    plain ansatz family (their parameter paths obey a different ODE), so
    only the weak checker applies to them.
    """
    from . import verify as _verify

    if checker not in ("ode", "weak"):
        raise ValueError("checker must be 'ode' or 'weak'")
    if checker == "ode" and transform.kind == "boost":
        raise ValueError("boost results carry a field offset; use the weak checker")

    kw = {}
    if battery_size is not None:
        kw["size"] = battery_size
    if battery_seed is not None:
        kw["seed"] = battery_seed

    if checker == "weak":
        baseline = _verify.weak_residual(traj, _verify.make_battery(traj, **kw))
    else:
        baseline = _verify.ode_residual(traj)

    transformed = apply_transform(transform, traj)
    tol = factor * baseline.max_residual
    if checker == "weak":
        report = _verify.weak_residual(
            transformed, _verify.make_battery(transformed, **kw), tolerance=tol)
    else:
        report = _verify.ode_residual(transformed, tolerance=tol)
    report.meta["baseline_max_residual"] = baseline.max_residual
    report.meta["transform"] = {"kind": transform.kind, "epsilon": transform.epsilon}
    report.meta["factor"] = factor
    return report
