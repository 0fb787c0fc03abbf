"""Displacement, phase-space slingshot preparation and Wigner evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import DEFAULT_CONFIG, BandedHamiltonian, PropagatorConfig, evolve, kerr_diagonal
from .errors import DomainError, TruncationError
from .hilbert import DEVICE, StateVector, SystemParams, dg_state, fidelity

WIGNER_MAX_DIM = 128
SLINGSHOT_MAX_RESIDUAL = 0.01


def _lower_expectation(state: StateVector) -> complex:
    c = state.amps
    return complex(np.vdot(c[:-1], np.sqrt(np.arange(1, state.dim)) * c[1:]))


def displacement_generator(beta: complex, dim: int) -> BandedHamiltonian:
    """H with exp(-iH) = D(beta) = exp(beta a^dagger - conj(beta) a)."""
    h = -1j * np.conj(beta) * np.sqrt(np.arange(1, dim, dtype=float))
    return BandedHamiltonian(np.zeros(dim), h)


def displaced_mean(state: StateVector, beta: complex) -> float:
    """Mean photon number after D(beta), from the first moments of ``state``."""
    p = state.populations
    mean = float(p @ np.arange(state.dim))
    return mean + 2.0 * float(np.real(np.conj(beta) * _lower_expectation(state))) + abs(beta) ** 2


def displace(state: StateVector, beta: complex, cfg: PropagatorConfig = DEFAULT_CONFIG) -> StateVector:
    if beta == 0:
        return state
    m = max(displaced_mean(state, beta), 0.0)
    if m + 10.0 * math.sqrt(m) >= state.dim:
        raise TruncationError(f"displaced mean {m:.1f} leaves no headroom in dim={state.dim}")
    return evolve(state, displacement_generator(beta, state.dim), 1.0, cfg)


@dataclass(frozen=True)
class SlingshotSpec:
    n1: float
    n2: float
    r1: float
    r2: float
    theta: float
    sigma: float
    beta: Optional[complex] = None
    cutoff: int = 35
    kerr_time: Optional[float] = None  # us; enables the Kerr-aware displacement model

    def __post_init__(self):
        if self.cutoff < 1:
            raise DomainError("cutoff must be at least 1")
        b2 = abs(self.displacement) ** 2
        lo, hi = min(self.n1, self.n2) / 4.0, 4.0 * max(self.n1, self.n2)
        if not lo <= b2 <= hi:
            raise DomainError(f"|beta|^2={b2:.1f} outside [{lo:.1f}, {hi:.1f}]")

    @property
    def displacement(self) -> complex:
        return math.sqrt(0.5 * (self.n1 + self.n2)) if self.beta is None else self.beta


def _kerr_drive(beta: complex, dim: int, duration: float, params: SystemParams) -> BandedHamiltonian:
    """Constant drive realizing D(beta) over ``duration`` on top of the undriven Kerr mode."""
    d = kerr_diagonal(params.with_(delta=0.0), dim)
    h = -1j * np.conj(beta) / duration * np.sqrt(np.arange(1, dim, dtype=float))
    return BandedHamiltonian(d, h)


def _reverse(state: StateVector, H: BandedHamiltonian, t: float, cfg) -> StateVector:
    # exp(+iHt) = exp(-i(-H)t)
    return evolve(state, BandedHamiltonian(-H.diag, -H.offdiag), t, cfg)


def shift_to_origin(target: StateVector, spec: SlingshotSpec, params: SystemParams = DEVICE,
                    cfg: PropagatorConfig = DEFAULT_CONFIG) -> StateVector:
    """Low-energy counterpart of ``target`` before the final displacement."""
    beta = spec.displacement
    if spec.kerr_time is None:
        return displace(target, -beta, cfg)
    return _reverse(target, _kerr_drive(beta, target.dim, spec.kerr_time, params), spec.kerr_time, cfg)


def truncation_residual(state: StateVector, cutoff: int) -> float:
    """Population on indices >= cutoff."""
    return float(np.sum(state.populations[cutoff:]))


def slingshot_prepare(spec: SlingshotSpec, dim: int, params: SystemParams = DEVICE,
                      cfg: PropagatorConfig = DEFAULT_CONFIG):
    """Build a DG state by displacing a ``cutoff``-dimensional state.

    Returns (low_dim_state, final_state, residual) where residual is the
    population the shifted target has beyond the cutoff.
    """
    target = dg_state(spec.n1, spec.n2, spec.r1, spec.r2, spec.theta, spec.sigma, dim)
    shifted = shift_to_origin(target, spec, params, cfg)
    residual = truncation_residual(shifted, spec.cutoff)
    if residual > SLINGSHOT_MAX_RESIDUAL:
        raise TruncationError(f"slingshot residual {residual:.3g} exceeds {SLINGSHOT_MAX_RESIDUAL}")
    low = StateVector(shifted.amps[: spec.cutoff]).normalized()
    embedded = low.embed(dim)
    beta = spec.displacement
    if spec.kerr_time is None:
        final = displace(embedded, beta, cfg)
    else:
        final = evolve(embedded, _kerr_drive(beta, dim, spec.kerr_time, params), spec.kerr_time, cfg)
    return low, final, residual


def slingshot_fidelity(spec: SlingshotSpec, dim: int, **kw) -> float:
    _, final, _ = slingshot_prepare(spec, dim, **kw)
    target = dg_state(spec.n1, spec.n2, spec.r1, spec.r2, spec.theta, spec.sigma, dim)
    return fidelity(final, target)


def _working_dim(state: StateVector, radius: float) -> int:
    reach = math.sqrt(state.dim) + radius
    need = reach**2 + 10.0 * reach + 16.0
    return int(32 * math.ceil(max(need, state.dim) / 32.0))


def wigner(state: StateVector, grid, cfg: PropagatorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """W(alpha) = (2/pi) sum_n (-1)^n |<n|D(-alpha)|state>|^2 on the points of ``grid``."""
    if state.dim > WIGNER_MAX_DIM:
        raise DomainError(f"wigner evaluation limited to dim <= {WIGNER_MAX_DIM}")
    pts = np.asarray(grid, dtype=complex)
    flat = pts.reshape(-1)
    radius = float(np.abs(flat).max()) if flat.size else 0.0
    work = state.embed(_working_dim(state, radius))
    parity = (-1.0) ** np.arange(work.dim)
    out = np.empty(flat.size)
    for i, a in enumerate(flat):
        s = work if a == 0 else evolve(work, displacement_generator(-a, work.dim), 1.0, cfg)
        out[i] = 2.0 / np.pi * float(parity @ s.populations)
    return out.reshape(pts.shape)
