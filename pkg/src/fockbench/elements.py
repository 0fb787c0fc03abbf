"""Fock-space optical elements and their sequential execution."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .dynamics import (
    DEFAULT_CONFIG,
    BandedHamiltonian,
    PropagatorConfig,
    Trajectory,
    build_hamiltonian,
    evolve,
    kerr_diagonal,
    kerr_free_phase,
    trajectory_segment,
)
from .errors import DomainError
from .hilbert import StateVector, SystemParams, apply_phase_profile


@dataclass(frozen=True)
class Prism:
    phi_p: float


@dataclass(frozen=True)
class KerrWait:
    t: float
    delta: float

    def __post_init__(self):
        if self.t < 0:
            raise DomainError("durations must be non-negative")


@dataclass(frozen=True)
class Pump:
    eps_p: complex
    delta: float
    t: float

    def __post_init__(self):
        if self.t < 0:
            raise DomainError("durations must be non-negative")


@dataclass(frozen=True)
class Displace:
    beta: complex


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    phi: Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


class MeasureKind(enum.Enum):
    POPULATIONS = "pn"
    MOMENTS = "moments"


@dataclass(frozen=True)
class Measure:
    kind: MeasureKind
    label: str


Element = Union[Prism, KerrWait, Pump, Displace, PhaseProfile, Measure]


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Non-destructive snapshot taken by a Measure element."""

    label: str
    time_cursor: float
    kind: MeasureKind
    populations: Optional[np.ndarray]
    mean: float
    variance: float
    norm: float
    stderr: Optional[np.ndarray] = None


# -- design solvers ----------------------------------------------------------------


@dataclass(frozen=True)
class LensDesign:
    n_center: float
    t_phi: float
    delta_L: float
    phi0: float


def local_kerr(n: float, params: SystemParams) -> float:
    """Effective self-Kerr -phi''(n)/t = K4 + K6 (n - 1) of the undriven mode."""
    return params.k4 + params.k6 * (n - 1.0)


def design_lens(n_center: float, t_phi: float, params: SystemParams) -> LensDesign:
    """Detuning that makes the Kerr phase stationary at ``n_center`` and the resulting curvature."""
    if not t_phi > 0:
        raise DomainError("t_phi must be positive")
    if params.k4 == 0:
        raise DomainError("k4 must be nonzero")
    nc = n_center
    delta = 0.5 * params.k4 * (2 * nc - 1) + params.k6 / 6.0 * (3 * nc**2 - 6 * nc + 2)
    phi0 = 0.5 * local_kerr(nc, params) * t_phi
    return LensDesign(n_center, t_phi, delta, phi0)


@dataclass(frozen=True)
class ImagingPlan:
    t_u: float
    t_f: float
    t_v: float
    M: float
    n0: float

    def residual(self) -> float:
        """Relative violation of 1/t_u + 1/t_v = 1/t_f."""
        return abs(1.0 / self.t_u + 1.0 / self.t_v - 1.0 / self.t_f) * self.t_f


def imaging_plan(t_u: float, t_f: float, n0: float) -> ImagingPlan:
    if not t_f > 0:
        raise DomainError("focal time must be positive")
    if math.isinf(t_u):
        return ImagingPlan(t_u, t_f, t_f, 0.0, n0)
    if not t_u > t_f:
        raise DomainError("object inside the focal time forms no real image")
    t_v = 1.0 / (1.0 / t_f - 1.0 / t_u)
    return ImagingPlan(t_u, t_f, t_v, t_v / t_u, n0)


def ideal_image(object_amps, M: float, n0: float) -> np.ndarray:
    """Inverted image magnified by M about n0.

    The image amplitude at n is read from the object at n0 - (n - n0)/M, so
    a feature at n0 + s lands at n0 - M s; off-grid reads interpolate the
    real and imaginary parts linearly.
    """
    if not M > 0:
        raise DomainError("magnification must be positive")
    c = np.asarray(object_amps, dtype=complex)
    n = np.arange(c.size, dtype=float)
    src = n0 - (n - n0) / M
    out = np.interp(src, n, c.real, left=0.0, right=0.0) + 1j * np.interp(src, n, c.imag, left=0.0, right=0.0)
    nrm = np.linalg.norm(out)
    if nrm == 0:
        raise DomainError("image falls outside the basis")
    return out / nrm


# -- execution -----------------------------------------------------------------------


def _duration(step) -> float:
    return step.t if isinstance(step, (KerrWait, Pump)) else 0.0


def _snapshot(step: Measure, amps: np.ndarray, cursor: float, norm: float, keep=False) -> MeasurementRecord:
    p = np.abs(amps) ** 2
    tot = p.sum()
    n = np.arange(p.size)
    mean = float(p @ n / tot)
    var = float(p @ (n - mean) ** 2 / tot)
    pops = p.copy() if keep or step.kind is MeasureKind.POPULATIONS else None
    return MeasurementRecord(step.label, cursor, step.kind, pops, mean, var, norm)


def _pump_hamiltonian(step: Pump, params: SystemParams, dim: int) -> BandedHamiltonian:
    return build_hamiltonian(params.with_(delta=step.delta, eps_p=step.eps_p), dim)


def run_elements(state: StateVector, steps: Sequence[Element], params: SystemParams,
                 cfg: PropagatorConfig = DEFAULT_CONFIG, rng: Optional[np.random.Generator] = None,
                 keep_populations: bool = False):
    """Execute ``steps`` in order; returns (final state, measurement records).

    With ``params.kappa > 0`` a generator ``rng`` is required and the call
    runs a single quantum trajectory with photon loss on every timed step;
    use :func:`average_trajectories` for ensemble populations.
    """
    from .states import displace

    dissipative = params.kappa > 0
    if dissipative and rng is None:
        raise DomainError("dissipative runs need a random generator (one trajectory per call)")
    traj = Trajectory(state.normalized().amps.copy(), rng) if dissipative else None
    cur = state
    cursor = 0.0
    records = []
    for step in steps:
        if isinstance(step, Measure):
            amps = traj.amps if dissipative else cur.amps
            records.append(_snapshot(step, amps, cursor, float(np.linalg.norm(amps)), keep_populations))
            continue
        if dissipative:
            cur = StateVector(traj.amps)
        if isinstance(step, Prism):
            cur = apply_phase_profile(cur, lambda n, p=step.phi_p: n * p)
        elif isinstance(step, PhaseProfile):
            cur = apply_phase_profile(cur, step.phi)
        elif isinstance(step, Displace):
            cur = displace(cur, step.beta, cfg)
        elif isinstance(step, KerrWait):
            if dissipative:
                H = BandedHamiltonian(kerr_diagonal(params, cur.dim, delta=step.delta), np.zeros(cur.dim - 1))
                trajectory_segment(traj, H, step.t, params.kappa, cfg)
            else:
                cur = kerr_free_phase(cur, params.with_(delta=step.delta), step.t)
        elif isinstance(step, Pump):
            H = _pump_hamiltonian(step, params, cur.dim)
            if dissipative:
                trajectory_segment(traj, H, step.t, params.kappa, cfg)
            else:
                cur = evolve(cur, H, step.t, cfg)
        else:
            raise DomainError(f"unknown element {step!r}")
        if dissipative and not isinstance(step, (KerrWait, Pump)):
            traj.amps = cur.amps.copy()
        cursor += _duration(step)
    if dissipative:
        cur = StateVector(traj.amps)
    return cur, records


def average_trajectories(state: StateVector, steps: Sequence[Element], params: SystemParams,
                         trials: int, seed: int, cfg: PropagatorConfig = DEFAULT_CONFIG):
    """Ensemble-averaged measurement records over ``trials`` trajectories (seeds seed+i)."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    sums = None
    for i in range(trials):
        _, recs = run_elements(state, steps, params, cfg, rng=np.random.default_rng(seed + i),
                               keep_populations=True)
        if sums is None:
            sums = [[r, np.zeros(state.dim), np.zeros(state.dim)] for r in recs]
        for acc, r in zip(sums, recs):
            p = r.populations
            acc[1] += p
            acc[2] += p * p
    out = []
    for r, s1, s2 in sums:
        mean = s1 / trials
        err = np.sqrt(np.maximum(s2 / trials - mean**2, 0.0) / max(trials - 1, 1))
        n = np.arange(state.dim)
        m = float(mean @ n)
        v = float(mean @ (n - m) ** 2)
        pops = mean if r.kind is MeasureKind.POPULATIONS else None
        out.append(MeasurementRecord(r.label, r.time_cursor, r.kind, pops, m, v, float(mean.sum()), err))
    return out

