"""Propagation of Fock-space amplitudes under the driven Kerr Hamiltonian.

The Hamiltonian is tridiagonal in the Fock basis: a number-dependent
diagonal (detuning, self-Kerr and the optional qubit-conditioned shift)
plus the pump coupling eps_p * sqrt(n+1) on the superdiagonal, i.e.
H = sum_n d_n |n><n| + eps_p a + conj(eps_p) a^dagger.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import propagators as _prop
from .errors import DimensionMismatch, DomainError
from .hilbert import QubitLevel, StateVector, SystemParams

JUMP_TIME_RESOLUTION = 1e-4  # us


class Method(enum.Enum):
    KRYLOV = "krylov"
    CHEBYSHEV = "chebyshev"
    DENSE = "dense"


@dataclass(frozen=True)
class PropagatorConfig:
    method: Method = Method.KRYLOV
    step: float = 0.25
    tol: float = 1e-10

    def __post_init__(self):
        if not 0 < self.tol <= 1e-4:
            raise DomainError("tol must lie in (0, 1e-4]")
        if not self.step > 0:
            raise DomainError("step must be positive")


DEFAULT_CONFIG = PropagatorConfig()


@dataclass(frozen=True, eq=False)
class BandedHamiltonian:
    """Tridiagonal generator: ``diag`` (N) and superdiagonal ``offdiag`` (N-1)."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, copy=True)
        d = d.astype(complex if np.iscomplexobj(d) else float)
        h = np.array(self.offdiag, dtype=complex, copy=True).reshape(-1)
        if h.size != max(d.size - 1, 0):
            raise DimensionMismatch("offdiag must have length dim - 1")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(h))):
            raise DomainError("Hamiltonian entries must be finite")
        d.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", h)

    @property
    def dim(self) -> int:
        return self.diag.size

    @property
    def is_diagonal(self) -> bool:
        return not np.any(self.offdiag)

    def matvec(self, v):
        return _prop.tridiag_matvec(self.diag, self.offdiag, np.asarray(v, dtype=complex))

    def to_dense(self):
        return _prop.tridiag_dense(self.diag, self.offdiag)

    def with_damping(self, kappa: float) -> "BandedHamiltonian":
        """Effective non-Hermitian generator H - i (kappa/2) n."""
        n = np.arange(self.dim)
        return BandedHamiltonian(self.diag - 0.5j * kappa * n, self.offdiag)


def kerr_diagonal(params: SystemParams, dim: int, qubit=QubitLevel.GROUND, delta=None):
    n = np.arange(dim, dtype=float)
    dl = params.delta if delta is None else delta
    d = dl * n - 0.5 * params.k4 * n * (n - 1) - params.k6 / 6.0 * n * (n - 1) * (n - 2)
    if qubit is QubitLevel.EXCITED:
        d = d - params.chi * n + 0.5 * params.ke * n * (n - 1)
    return d


def build_hamiltonian(params: SystemParams, dim: int, qubit=QubitLevel.GROUND) -> BandedHamiltonian:
    d = kerr_diagonal(params, dim, qubit)
    h = params.eps_p * np.sqrt(np.arange(1, dim, dtype=float))
    return BandedHamiltonian(d, h)


def _expm_apply(H: BandedHamiltonian, v, t, cfg: PropagatorConfig):
    if H.is_diagonal:
        return np.exp(-1j * H.diag * t) * v
    if cfg.method is Method.KRYLOV:
        return _prop.krylov_expm(H.diag, H.offdiag, v, t, tol=cfg.tol, step=cfg.step)
    if cfg.method is Method.CHEBYSHEV:
        return _prop.chebyshev_expm(H.diag, H.offdiag, v, t, tol=cfg.tol, step=cfg.step)
    return _prop.dense_expm(H.diag, H.offdiag, v, t)


def evolve(state: StateVector, H: BandedHamiltonian, t: float, cfg: PropagatorConfig = DEFAULT_CONFIG) -> StateVector:
    """Return exp(-i H t)|state>."""
    if t < 0:
        raise DomainError("evolution time must be non-negative")
    if state.dim != H.dim:
        raise DimensionMismatch(f"state dim {state.dim} vs Hamiltonian dim {H.dim}")
    if t == 0:
        return state
    return StateVector(_expm_apply(H, state.amps, t, cfg))


def kerr_free_phase(state: StateVector, params: SystemParams, t: float) -> StateVector:
    """Exact undriven evolution on the ground branch: c_n -> c_n exp(-i d_n t)."""
    if t < 0:
        raise DomainError("evolution time must be non-negative")
    d = kerr_diagonal(params, state.dim)
    return StateVector(state.amps * np.exp(-1j * d * t))


def accumulated_phase(params: SystemParams, dim: int, t: float) -> np.ndarray:
    """Phase imprinted by :func:`kerr_free_phase` (the sign of the exponent included)."""
    return -kerr_diagonal(params, dim) * t


# -- quantum trajectories ----------------------------------------------------


@dataclass
class Trajectory:
    """Conditional state of one Monte Carlo wave-function run.

    ``amps`` is kept normalized; ``threshold`` is the remaining squared norm
    at which the next jump fires, rescaled after every renormalization.
    """

    amps: np.ndarray
    rng: np.random.Generator
    threshold: float = field(default=-1.0)
    jumps: int = 0

    def __post_init__(self):
        if self.threshold < 0:
            self.threshold = self.rng.random()


def _lower(v):
    """Annihilation operator applied to an amplitude vector."""
    out = np.zeros_like(v)
    out[:-1] = np.sqrt(np.arange(1, v.size)) * v[1:]
    return out


def trajectory_segment(traj: Trajectory, H: BandedHamiltonian, t: float, kappa: float,
                       cfg: PropagatorConfig = DEFAULT_CONFIG) -> Trajectory:
    """Advance a trajectory by ``t`` under H with jump operator sqrt(kappa) a."""
    Heff = H.with_damping(kappa)
    remaining = t
    while remaining > 0:
        v1 = _expm_apply(Heff, traj.amps, remaining, cfg)
        p1 = float(np.vdot(v1, v1).real)
        if p1 > traj.threshold:
            traj.amps = v1 / np.sqrt(p1)
            traj.threshold /= p1
            return traj
        # bisect the first crossing of the squared norm through the threshold
        lo, hi = 0.0, remaining
        vhi = v1
        while hi - lo > JUMP_TIME_RESOLUTION:
            mid = 0.5 * (lo + hi)
            vm = _expm_apply(Heff, traj.amps, mid, cfg)
            if float(np.vdot(vm, vm).real) > traj.threshold:
                lo = mid
            else:
                hi, vhi = mid, vm
        jumped = _lower(vhi)
        nj = np.linalg.norm(jumped)
        if nj == 0.0:
            # no photons left to lose; the no-jump evolution is the exact result
            traj.amps = vhi / np.linalg.norm(vhi)
        else:
            traj.amps = jumped / nj
        traj.jumps += 1
        traj.threshold = traj.rng.random()
        remaining -= hi
    return traj


@dataclass(frozen=True, eq=False)
class TrajectoryAverage:
    times: np.ndarray
    populations: np.ndarray  # shape (len(times), dim)
    stderr: np.ndarray
    trials: int

    @property
    def final(self) -> np.ndarray:
        return self.populations[-1]


def evolve_mcwf(state: StateVector, H: BandedHamiltonian, t: float, kappa: float, trials: int,
                seed: int, times=None, cfg: PropagatorConfig = DEFAULT_CONFIG) -> TrajectoryAverage:
    """Trajectory-averaged populations at ``times`` (default: just ``t``).

    Trajectory i draws from ``numpy.random.default_rng(seed + i)``.
    """
    if kappa <= 0:
        raise DomainError("kappa must be positive for trajectory evolution")
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if state.dim != H.dim:
        raise DimensionMismatch(f"state dim {state.dim} vs Hamiltonian dim {H.dim}")
    grid = np.array([t] if times is None else sorted(times), dtype=float)
    if grid.size == 0 or grid[0] < 0:
        raise DomainError("record times must be non-negative")
    acc = np.zeros((grid.size, state.dim))
    acc2 = np.zeros_like(acc)
    for i in range(trials):
        traj = Trajectory(state.normalized().amps.copy(), np.random.default_rng(seed + i))
        now = 0.0
        for k, tk in enumerate(grid):
            if tk > now:
                trajectory_segment(traj, H, tk - now, kappa, cfg)
                now = tk
            p = np.abs(traj.amps) ** 2
            acc[k] += p
            acc2[k] += p * p
    mean = acc / trials
    var = np.maximum(acc2 / trials - mean**2, 0.0)
    stderr = np.sqrt(var / max(trials - 1, 1))
    return TrajectoryAverage(grid, mean, stderr, trials)


# -- flattened-coupling propagator ----------------------------------------------


def kspace_propagate(state: StateVector, eps_p: complex, nbar: float, t: float) -> StateVector:
    """Propagate with the coupling sqrt(n+1) frozen to sqrt(nbar).

    Plane waves e^{ikn} are then exact eigenvectors with energy
    2 sqrt(nbar) |eps_p| cos(k + arg eps_p); the boundary is periodic.
    """
    if nbar <= 0:
        raise DomainError("nbar must be positive")
    N = state.dim
    k = 2.0 * np.pi * np.fft.fftfreq(N)
    omega = 2.0 * np.sqrt(nbar) * abs(eps_p) * np.cos(k + np.angle(eps_p))
    C = np.fft.fft(state.amps)
    return StateVector(np.fft.ifft(C * np.exp(-1j * omega * t)))
