"""Fock-camera and self-Kerr spectrometer models with their linear fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError, SingularFit
from .hilbert import StateVector

CONFIDENCE = 0.95


def camera_model(n, chi: float, ke: float):
    """Qubit frequency shift -n chi - n(n-1) ke/2 with n photons in the cavity."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise DomainError("photon number must be non-negative")
    out = -n * chi - 0.5 * n * (n - 1) * ke
    return float(out) if out.ndim == 0 else out


def _linear_fit(A, y):
    """Least squares with 95% half-widths from the linearized covariance."""
    m, p = A.shape
    if np.linalg.matrix_rank(A) < p:
        raise SingularFit(f"design matrix has rank < {p}")
    if m <= p:
        raise SingularFit(f"need more than {p} points, got {m}")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = m - p
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    hw = stats.t.ppf(0.5 + CONFIDENCE / 2, dof) * np.sqrt(np.diag(cov))
    return coef, hw, float(np.sqrt(np.mean(resid**2)))


@dataclass(frozen=True)
class CameraFit:
    chi: float
    ke: float
    residual_rms: float
    chi_half_width: float
    ke_half_width: float


def fit_camera(points) -> CameraFit:
    """Uniform-weight fit of (n, shift) pairs to :func:`camera_model`."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n, y = pts[:, 0], pts[:, 1]
    A = np.column_stack([-n, -0.5 * n * (n - 1)])
    if np.unique(n).size < 3:
        if n.size == 0 or np.linalg.matrix_rank(A) < 2:
            raise SingularFit("camera fit needs three distinct photon numbers (Ke unresolved)")
        raise SingularFit("camera fit needs at least three distinct photon numbers")
    (chi, ke), hw, rms = _linear_fit(A, y)
    return CameraFit(float(chi), float(ke), rms, float(hw[0]), float(hw[1]))


def spectrometer_detuning(n0, k4: float, k6: float):
    """Pump detuning that focuses onto photon number n0 (stationary Kerr phase)."""
    n0 = np.asarray(n0, dtype=float)
    return 0.5 * k6 * n0**2 + (k4 - k6) * n0 + (-0.5 * k4 + k6 / 3.0)


@dataclass(frozen=True)
class K6Fit:
    slope: float
    intercept: float
    k6: float
    k4_input: float
    slope_half_width: float
    k6_half_width: float
    n_ref: float


def fit_k6(pairs, k4: float) -> K6Fit:
    """Straight-line fit of detuning versus focal photon number.

    The slope equals K6 n + K4 - K6 at the window center, so
    K6 = (slope - K4) / (mean(n0) - 1).
    """
    pts = np.asarray(pairs, dtype=float).reshape(-1, 2)
    n0, delta = pts[:, 0], pts[:, 1]
    if pts.shape[0] < 3:
        raise SingularFit("K6 fit needs at least three points")
    A = np.column_stack([n0, np.ones_like(n0)])
    (slope, icpt), hw, _ = _linear_fit(A, delta)
    nref = float(np.mean(n0))
    if nref == 1.0:
        raise SingularFit("window centered at n=1 does not constrain K6")
    k6 = (slope - k4) / (nref - 1.0)
    return K6Fit(float(slope), float(icpt), float(k6), k4, float(hw[0]), float(hw[0] / abs(nref - 1.0)), nref)


def lorentzian(x, linewidth: float):
    """Peak-normalized Lorentzian with full width ``linewidth`` at half maximum."""
    return 1.0 / (1.0 + (2.0 * np.asarray(x) / linewidth) ** 2)


def number_splitting_spectrum(state, chi: float, ke: float, linewidth: float, probe_grid):
    """Qubit flip probability versus probe detuning for a cavity population.

    ``state`` is a StateVector or a population array. Each Fock component n
    contributes a Lorentzian of weight P(n) centered at camera_model(n).
    """
    if not linewidth > 0:
        raise DomainError("linewidth must be positive")
    p = state.populations if isinstance(state, StateVector) else np.asarray(state, dtype=float)
    n = np.nonzero(p > 0)[0]
    centers = camera_model(n, chi, ke)
    grid = np.asarray(probe_grid, dtype=float)
    L = lorentzian(grid[:, None] - centers[None, :], linewidth)
    return np.clip(L @ p[n], 0.0, 1.0)
