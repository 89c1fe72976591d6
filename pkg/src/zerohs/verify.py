"""Independent correctness arbiters for computed trajectories.

The weak checker tests the defining distributional identity directly:
for every test function phi, d/dt <m, phi> must equal <v^b m_x, phi>
(and the v-equation with the roles of u and v exchanged). The time
derivative is a 4th-order central difference of the momentum pairing over
trajectory samples, so exact solutions leave only an O(dt^4) stencil
residual. The ODE checker compares the same finite-difference stencil of
the raw parameters against the right-hand side field. The two are
equivalent characterizations of the ansatz solutions, and the test suite
leans on that: a trajectory passing one checker must pass the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .ansatz import PeakonState, TestFunction, convected_pairing, momentum_pairing
from .dynamics import Trajectory, rhs_vector_field
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig

__all__ = [
    "ResidualReport", "TestBattery", "make_battery",
    "weak_residual", "ode_residual", "conservation_drift", "compare_to_oracle",
    "InsufficientSamples", "StencilCrossesEvent", "ValidityViolated",
    "WEAK_TOLERANCE", "ODE_TOLERANCE",
]

WEAK_TOLERANCE = 1e-6   # weak-residual pass level at dt = 1e-3
ODE_TOLERANCE = 1e-9    # ODE-residual pass level for smooth RK4 segments

DEFAULT_BATTERY_SIZE = 20
DEFAULT_BATTERY_SEED = 0
BATTERY_MARGIN = 3.0
BATTERY_WIDTHS = (0.25, 2.0)


class InsufficientSamples(RuntimeError):
    """Too few samples, or sample spacing unsuitable for the FD stencil."""


class StencilCrossesEvent(RuntimeError):
    """A logged event sits strictly inside a finite-difference stencil."""


class ValidityViolated(RuntimeError):
    """A hypothesis required by the monitored quantity fails on a sample."""


@dataclass(frozen=True)
class TestBattery:
    """Deterministic battery of Gaussian test functions."""

    functions: tuple[TestFunction, ...]
    seed: int

    def __iter__(self):
        return iter(self.functions)

    def __len__(self) -> int:
        return len(self.functions)


def make_battery(trajectory: Trajectory, size: int = DEFAULT_BATTERY_SIZE,
                 seed: int = DEFAULT_BATTERY_SEED) -> TestBattery:
    """Gaussians with seeded centers over the spatial hull +- 3, widths in
    [0.25, 2]. Centers are drawn first, then widths, so a given seed pins
    the battery bit for bit.
    """
    if size < 1:
        raise ValueError("battery size must be >= 1")
    lo, hi = trajectory.spatial_hull()
    rng = np.random.default_rng(seed)
    centers = rng.uniform(lo - BATTERY_MARGIN, hi + BATTERY_MARGIN, size)
    widths = rng.uniform(BATTERY_WIDTHS[0], BATTERY_WIDTHS[1], size)
    funcs = tuple(TestFunction(float(c), float(w)) for c, w in zip(centers, widths))
    return TestBattery(functions=funcs, seed=seed)


@dataclass(frozen=True)
class ResidualReport:
    """Residual magnitudes per equation, with aggregates and a verdict.

    ``entries[eq]`` holds one magnitude per test function (weak checker)
    or per interior sample (ODE checker); aggregates are computed from
    exactly that table.
    """

    checker: str
    entries: dict[str, np.ndarray]
    max_residual: float
    rms_residual: float
    tolerance: float
    passed: bool
    dt: float | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "checker": self.checker,
            "entries": {k: [float(x) for x in v] for k, v in self.entries.items()},
            "max_residual": self.max_residual,
            "rms_residual": self.rms_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "dt": self.dt,
            "meta": dict(self.meta),
        }


def _finish_report(checker: str, entries: dict[str, np.ndarray], tolerance: float,
                   dt: float | None, meta: dict) -> ResidualReport:
    flat = np.concatenate([np.asarray(v, dtype=float).ravel() for v in entries.values()])
    max_r = float(np.max(flat))
    rms_r = float(math.sqrt(float(np.mean(flat * flat))))
    return ResidualReport(checker=checker, entries=entries, max_residual=max_r,
                          rms_residual=rms_r, tolerance=tolerance,
                          passed=bool(max_r <= tolerance), dt=dt, meta=meta)


def _fd4(values: np.ndarray, h: float) -> np.ndarray:
    """4th-order central first derivative along axis 0 (loses 2 samples per end)."""
    v = values
    return (v[0:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)


def _uniform_dt_or_raise(trajectory: Trajectory) -> float:
    if len(trajectory) < 5:
        raise InsufficientSamples(
            f"need at least 5 samples for the FD stencil, got {len(trajectory)}")
    try:
        return trajectory.uniform_dt()
    except ValueError as exc:
        raise InsufficientSamples(str(exc)) from None


def _equations(which: str) -> tuple[str, ...]:
    if which == "both":
        return ("u", "v")
    if which in ("u", "v"):
        return (which,)
    raise ValueError("which must be 'u', 'v' or 'both'")


def weak_residual(trajectory: Trajectory, battery: TestBattery | None = None,
                  which: str = "both",
                  quad: QuadratureConfig = DEFAULT_QUADRATURE,
                  tolerance: float = WEAK_TOLERANCE) -> ResidualReport:
    """Distributional residual of a trajectory over a test battery.

    For each test function and interior sample time, the residual is the
    FD4 time derivative of the momentum pairing minus the convected
    pairing at the center sample; the table keeps the max over time per
    test function and equation.
    """
    h = _uniform_dt_or_raise(trajectory)
    if battery is None:
        battery = make_battery(trajectory)
    states = [trajectory.state(k) for k in range(len(trajectory))]
    interior = states[2:-2]
    offset = trajectory.offset

    entries: dict[str, np.ndarray] = {}
    for eq in _equations(which):
        per_phi = np.empty(len(battery))
        for idx, phi in enumerate(battery):
            pairings = np.array([
                momentum_pairing(s, phi, eq, offset, quad) for s in states])
            ddt = _fd4(pairings, h)
            conv = np.array([
                convected_pairing(s, phi, eq, offset) for s in interior])
            per_phi[idx] = float(np.max(np.abs(ddt - conv)))
        entries[eq] = per_phi
    meta = {"battery_size": len(battery), "battery_seed": battery.seed,
            "quadrature": {"order": quad.order, "panels": quad.panels,
                           "rtol": quad.rtol}}
    return _finish_report("weak", entries, tolerance, h, meta)


def ode_residual(trajectory: Trajectory,
                 tolerance: float = ODE_TOLERANCE) -> ResidualReport:
    """FD4 derivative of the raw parameters against the right-hand side.

    Raises StencilCrossesEvent when a logged event lies strictly inside
    any evaluated stencil: the flow is not smooth across a crossing, so
    the stencil order claim would be void there.
    """
    times = trajectory.times
    # the stencils of the interior samples jointly cover the open span, so
    # any strictly interior event contaminates at least one of them; this
    # is diagnosed before the spacing check because it is the sharper reason
    for ev in trajectory.events:
        if times[0] < ev.t < times[-1]:
            raise StencilCrossesEvent(
                f"event at t={ev.t!r} lies inside a differencing stencil")
    h = _uniform_dt_or_raise(trajectory)

    f = rhs_vector_field(trajectory.template)
    fd = _fd4(trajectory.samples, h)
    rhs = np.stack([f(trajectory.samples[i])
                    for i in range(2, len(trajectory) - 2)])
    diff = np.abs(fd - rhs)
    lay = trajectory.layout
    u_cols = np.r_[np.arange(*lay.amps_u.indices(lay.size)),
                   np.arange(*lay.pos_u.indices(lay.size))]
    v_cols = np.r_[np.arange(*lay.amps_v.indices(lay.size)),
                   np.arange(*lay.pos_v.indices(lay.size))]
    entries = {"u": np.max(diff[:, u_cols], axis=1),
               "v": np.max(diff[:, v_cols], axis=1)}
    return _finish_report("ode", entries, tolerance, h, {})


def conservation_drift(trajectory: Trajectory) -> float:
    """Relative drift of p^b + P^b along a 1 + 1 peakon trajectory.

    Valid when the positions stay separated throughout, or on the pure
    coincident branch (where both amplitudes are constants and the drift
    is trivially zero). A trajectory that is coincident on some samples
    only has crossed the hypothesis and raises ValidityViolated.
    """
    template = trajectory.template
    if not isinstance(template, PeakonState) or template.n_u != 1 or template.n_v != 1:
        raise ValueError("conservation drift is defined for 1 + 1 peakon trajectories")
    lay = trajectory.layout
    sep = trajectory.samples[:, lay.pos_u][:, 0] - trajectory.samples[:, lay.pos_v][:, 0]
    coincident = sep == 0.0
    if np.any(coincident) and not np.all(coincident):
        raise ValidityViolated("positions coincide on a proper subset of samples")
    from .util import ipow
    b = template.b
    amps = trajectory.samples[:, lay.amplitudes]
    kappa = ipow(amps[:, 0], b) + ipow(amps[:, 1], b)
    kappa0 = float(kappa[0])
    return float(np.max(np.abs(kappa - kappa0)) / max(1.0, abs(kappa0)))


def compare_to_oracle(trajectory: Trajectory, flow) -> float:
    """Max absolute parameter deviation from an exact flow, over all samples."""
    ref0 = flow.state_at(float(trajectory.times[0]))
    template = trajectory.template
    if type(ref0) is not type(template) or ref0.b != template.b \
            or ref0.n_u != template.n_u or ref0.n_v != template.n_v:
        raise ValueError("oracle flow shape does not match the trajectory")
    from .dynamics import pack_state
    refs = np.stack([pack_state(flow.state_at(float(t))) for t in trajectory.times])
    return float(np.max(np.abs(trajectory.samples - refs)))
