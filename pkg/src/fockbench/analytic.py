"""Closed-form paraxial predictions for Gaussian wavepackets in Fock space.

A beam c_n ~ exp[-(n-n0)^2/(4 sigma^2) + i k0 (n-n0) + i phi0 (n-n0)^2]
propagating under a weak pump behaves like a paraxial optical beam with
diffusion coefficient D = sqrt(n0) * eps_p. The pump magnitude enters here;
its phase is folded into k0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class GaussianBeam:
    n0: float
    sigma: float
    k0: float = 0.0
    phi0: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.n0, self.sigma, self.k0, self.phi0)):
            raise DomainError("beam parameters must be finite")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")


def _diffusion(beam: GaussianBeam, eps_p: float) -> float:
    return math.sqrt(beam.n0) * abs(eps_p)


def free_prop_center_width(beam: GaussianBeam, eps_p: float, t: float) -> tuple[float, float]:
    """Drifting, spreading beam without a lens phase."""
    D = _diffusion(beam, eps_p)
    nc = beam.n0 - 2.0 * beam.k0 * D * t
    sig = math.sqrt(beam.sigma**2 + (D * t / beam.sigma) ** 2)
    return nc, sig


def refracted_mean(nbar: float, phi_p: float, eps_p: float, t: float) -> float:
    if not nbar > 0:
        raise DomainError("nbar must be positive")
    return nbar - 2.0 * math.sqrt(nbar) * math.sin(phi_p) * abs(eps_p) * t


def lens_width(beam: GaussianBeam, eps_p: float, t: float) -> float:
    D = _diffusion(beam, eps_p)
    s2 = beam.sigma**2
    return beam.sigma * math.sqrt((1.0 - 4.0 * D * beam.phi0 * t) ** 2 + (D * t / s2) ** 2)


def focal_time(beam: GaussianBeam, eps_p: float) -> float:
    """Time of minimum width; negative for a diverging (phi0 < 0) lens."""
    if beam.phi0 == 0:
        raise DomainError("a beam without quadratic phase has no focus")
    D = _diffusion(beam, eps_p)
    if D == 0:
        raise DomainError("no propagation without a pump")
    return beam.phi0 / (D * (4.0 * beam.phi0**2 + 1.0 / (4.0 * beam.sigma**4)))


def min_width(beam: GaussianBeam) -> float:
    return beam.sigma / math.sqrt(1.0 + 16.0 * beam.phi0**2 * beam.sigma**4)


def phi0_for_focal_time(n0: float, sigma: float, eps_p: float, t_focus: float) -> float:
    """Converging quadratic-phase coefficient whose exact focal time is ``t_focus``.

    Inverts :func:`focal_time`; of the two roots the one connected to the
    thin-lens value 1/(4 D t) is returned.
    """
    D = math.sqrt(n0) * abs(eps_p)
    if not (D > 0 and t_focus > 0):
        raise DomainError("need a pump and a positive focal time")
    a = 4.0 * D * t_focus
    c = D * t_focus / (4.0 * sigma**4)
    disc = 1.0 - 4.0 * a * c
    if disc < 0:
        raise DomainError("focal time shorter than the beam can reach")
    return (1.0 + math.sqrt(disc)) / (2.0 * a)


def newton_focus(nbar: float, delta_tilde: float, k4: float) -> float:
    if k4 == 0:
        raise DomainError("k4 must be nonzero")
    return nbar + delta_tilde / k4
