"""Truncated Fock-space states, system constants and basic metrics.

Amplitudes live on indices n = 0..N-1. Frequencies are angular (rad/us)
and times are in microseconds; the helpers ``mhz``, ``khz`` and ``hz`` turn
an ordinary frequency f into the angular value 2*pi*f in those units.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import DimensionMismatch, DomainError, TruncationError

TWO_PI = 2.0 * np.pi
NORM_TOL = 1e-9
COHERENT_TAIL_TOL = 1e-9


def mhz(f):
    """Angular frequency (rad/us) of an ordinary frequency in MHz."""
    return TWO_PI * f


def khz(f):
    return TWO_PI * f * 1e-3


def hz(f):
    return TWO_PI * f * 1e-6


def to_mhz(omega):
    """Inverse of :func:`mhz`."""
    return omega / TWO_PI


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable normalized-or-not amplitude vector over a truncated basis."""

    amps: np.ndarray

    def __post_init__(self):
        a = np.array(self.amps, dtype=complex, copy=True).reshape(-1)
        if a.size < 1:
            raise DomainError("state dimension must be at least 1")
        if not np.all(np.isfinite(a)):
            raise DomainError("state amplitudes must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.populations)))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return StateVector(self.amps / nrm)

    def embed(self, dim: int) -> "StateVector":
        """Zero-pad (or truncate) to ``dim`` basis states without renormalizing."""
        out = np.zeros(dim, dtype=complex)
        m = min(dim, self.dim)
        out[:m] = self.amps[:m]
        return StateVector(out)

    def __repr__(self):
        mean, var = moments(self)
        return f"StateVector(dim={self.dim}, mean={mean:.6g}, var={var:.6g})"


class QubitLevel(enum.Enum):
    GROUND = "g"
    EXCITED = "e"


@dataclass(frozen=True)
class SystemParams:
    """Constants of the driven Kerr mode, all angular (rad/us) except kappa (1/us)."""

    delta: float = 0.0
    k4: float = 0.0
    k6: float = 0.0
    chi: float = 0.0
    ke: float = 0.0
    eps_p: complex = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        vals = [self.delta, self.k4, self.k6, self.chi, self.ke, abs(self.eps_p), self.kappa]
        if not all(math.isfinite(float(v)) for v in vals):
            raise DomainError("system parameters must be finite")
        if self.kappa < 0:
            raise DomainError("kappa must be non-negative")

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


# Device constants used by the built-in scenarios.
T1_US = 1600.0
DEVICE = SystemParams(
    delta=0.0,
    k4=khz(2.18),
    k6=hz(1.0),
    chi=mhz(0.596),
    ke=khz(0.52),
    eps_p=mhz(0.88),
    kappa=0.0,
)


def default_dim(nbar: float) -> int:
    """Smallest multiple of 64 that is >= nbar + 12*sqrt(nbar) + 32."""
    need = nbar + 12.0 * math.sqrt(max(nbar, 0.0)) + 32.0
    return int(64 * math.ceil(need / 64.0))


def _check_dim(dim):
    if int(dim) != dim or dim < 1:
        raise DomainError(f"dim must be a positive integer, got {dim!r}")
    return int(dim)


def fock_state(n: int, dim: int) -> StateVector:
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise DomainError(f"Fock index {n} outside basis of size {dim}")
    a = np.zeros(dim, dtype=complex)
    a[n] = 1.0
    return StateVector(a)


def coherent_state(alpha: complex, dim: int) -> StateVector:
    """Coherent state with amplitude ``alpha``; raises if the truncated tail is too heavy."""
    dim = _check_dim(dim)
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return fock_state(0, dim)
    # probability of n >= dim for a Poisson variable of mean lam
    tail = float(gammainc(dim, lam))
    if tail >= COHERENT_TAIL_TOL:
        raise TruncationError(f"coherent tail mass {tail:.3g} beyond dim={dim}")
    n = np.arange(dim)
    logmag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1.0) - 0.5 * lam
    amps = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    return StateVector(amps).normalized()


def gaussian_state(center: float, sigma: float, dim: int) -> StateVector:
    """Real Gaussian envelope whose POPULATION has standard deviation ``sigma``."""
    dim = _check_dim(dim)
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if not 0 <= center <= dim - 1:
        raise DomainError(f"center {center} outside [0, {dim - 1}]")
    n = np.arange(dim)
    amps = np.exp(-((n - center) ** 2) / (4.0 * sigma**2))
    return StateVector(amps).normalized()


def dg_state(n1, n2, r1, r2, theta, sigma, dim) -> StateVector:
    """Double-Gaussian superposition r1|G_n1> + r2 e^{i theta}|G_n2>, normalized."""
    if n1 == n2:
        raise DomainError("the two peaks must be distinct")
    if r1 < 0 or r2 < 0 or (r1 == 0 and r2 == 0):
        raise DomainError("weights must be non-negative and not both zero")
    g1 = gaussian_state(n1, sigma, dim).amps
    g2 = gaussian_state(n2, sigma, dim).amps
    return StateVector(r1 * g1 + r2 * np.exp(1j * theta) * g2).normalized()


def slit_sigma(amplitude_width: float) -> float:
    """Population width of a Gaussian written as exp(-(n-m)^2 / (2 w^2)) in amplitude."""
    return amplitude_width / math.sqrt(2.0)


PhaseSpec = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def apply_phase_profile(state: StateVector, phi: PhaseSpec) -> StateVector:
    """Return c_n exp(i phi(n)); ``phi`` is an array or a function of the index array."""
    n = np.arange(state.dim)
    ph = phi(n) if callable(phi) else np.asarray(phi, dtype=float)
    ph = np.broadcast_to(ph, (state.dim,))
    return StateVector(state.amps * np.exp(1j * ph))


def moments(state: StateVector) -> tuple[float, float]:
    p = state.populations
    n = np.arange(state.dim)
    mean = float(p @ n)
    var = float(p @ (n - mean) ** 2)
    return mean, var


def width(state: StateVector) -> float:
    return math.sqrt(max(moments(state)[1], 0.0))


def population(state: StateVector, n: int) -> float:
    if not 0 <= n < state.dim:
        return 0.0
    return float(abs(state.amps[n]) ** 2)


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims differ: {a.dim} vs {b.dim}")
    return float(min(abs(np.vdot(a.amps, b.amps)) ** 2, 1.0))
