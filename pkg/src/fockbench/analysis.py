"""Fits and figures of merit for photon-number distributions.

Nonlinear fits use scipy's Levenberg-Marquardt driver with analytic
Jacobians. Reported half-widths are 95% Student-t intervals from the
linearized covariance at the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal, stats

from .calibration import _linear_fit
from .errors import DomainError, FitDiverged, PeakNotFound, SingularFit

CONFIDENCE = 0.95
NYQUIST_SPACING = 2.0


def _half_widths(jac, resid, npar):
    m = resid.size
    dof = max(m - npar, 1)
    s2 = float(resid @ resid) / dof
    try:
        cov = s2 * np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        return np.full(npar, np.inf)
    return stats.t.ppf(0.5 + CONFIDENCE / 2, dof) * np.sqrt(np.abs(np.diag(cov)))


# -- Gaussian-enveloped cosine ------------------------------------------------------


@dataclass(frozen=True)
class FringeFit:
    amplitude: float
    alpha0: float
    x: float
    n0: float
    theta: float
    half_widths: tuple
    cost: float

    def model(self, n):
        return gauss_cos(n, self.amplitude, self.alpha0, self.x, self.n0, self.theta)


def gauss_cos(n, A, alpha0, x, n0, theta):
    u = np.asarray(n, dtype=float) - n0
    return A * np.exp(-alpha0 * u**2) * np.cos(2 * np.pi * u / x + theta)


def _gauss_cos_jac(p, u, theta):
    A, a0, x = p
    env = np.exp(-a0 * u**2)
    arg = 2 * np.pi * u / x + theta
    c, s = np.cos(arg), np.sin(arg)
    return np.column_stack([env * c, -A * u**2 * env * c, A * env * s * 2 * np.pi * u / x**2])


def fit_gauss_cos(populations, theta: float, n0: float, x_grid=None, n=None) -> FringeFit:
    """Fit A exp(-alpha0 (n-n0)^2) cos(2 pi (n-n0)/x + theta) with theta and n0 fixed.

    Starts are taken over ``x_grid`` (default: 40 log-spaced spacings from
    3 to 80 photons); the lowest-cost optimum wins and ties go to the
    smaller spacing.
    """
    y = np.asarray(populations, dtype=float)
    n = np.arange(y.size, dtype=float) if n is None else np.asarray(n, dtype=float)
    u = n - n0
    grid = np.geomspace(3.0, 80.0, 40) if x_grid is None else np.asarray(x_grid, dtype=float)
    yrms = float(np.sqrt(np.mean(y**2)))
    if yrms == 0:
        raise FitDiverged("no signal to fit")
    # envelope start from the second moment of |y| about n0
    w = np.abs(y)
    var = float(w @ u**2 / w.sum())
    a_start = 1.0 / (4.0 * max(var, 1.0))
    best = None
    for x0 in grid:
        basis = np.exp(-a_start * u**2) * np.cos(2 * np.pi * u / x0 + theta)
        A0 = float(basis @ y / max(basis @ basis, 1e-300))
        p0 = np.array([A0 if A0 != 0 else yrms, a_start, x0])

        def res(p):
            return gauss_cos(n, p[0], p[1], p[2], n0, theta) - y

        try:
            with np.errstate(over="ignore", invalid="ignore"):
                sol = optimize.least_squares(res, p0, jac=lambda p: _gauss_cos_jac(p, u, theta), method="lm",
                                             xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=200)
        except (ValueError, np.linalg.LinAlgError):
            continue
        A, a0, x = sol.x
        # spacings at or below 2 photons alias onto longer ones on the integer grid
        if not (np.all(np.isfinite(sol.x)) and x > NYQUIST_SPACING and a0 >= 0):
            continue
        cost = float(np.sqrt(np.mean(sol.fun**2)))
        if best is None or cost < best[0] * (1 - 1e-9) or (abs(cost - best[0]) <= 1e-9 * best[0] and x < best[1].x[2]):
            best = (cost, sol)
    if best is None or best[0] > 0.5 * yrms:
        raise FitDiverged("no start reached a residual below half the data RMS")
    cost, sol = best
    hw = _half_widths(sol.jac, sol.fun, 3)
    A, a0, x = sol.x
    return FringeFit(float(A), float(a0), float(x), n0, theta, tuple(float(h) for h in hw), cost)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    slope_half_width: float
    intercept_half_width: float


def fringe_scaling(series) -> ScalingFit:
    """Straight-line fit of spacing x against 1/d."""
    pts = np.asarray(series, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 3:
        raise SingularFit("need at least three (d, x) pairs")
    inv = 1.0 / pts[:, 0]
    (slope, icpt), hw, _ = _linear_fit(np.column_stack([inv, np.ones_like(inv)]), pts[:, 1])
    return ScalingFit(float(slope), float(icpt), float(hw[0]), float(hw[1]))


def fringe_visibility(populations, center: float, spacing: float) -> float:
    """Modulation depth of a pattern relative to its locally averaged envelope.

    The envelope is a centered boxcar one fringe wide; the visibility is
    (max - min)/(max + min) of pattern/envelope within one spacing of center.
    """
    p = np.asarray(populations, dtype=float)
    L = max(int(round(spacing)), 1)
    env = np.convolve(p, np.ones(L) / L, mode="same")
    lo = max(int(math.floor(center - spacing)), 0)
    hi = min(int(math.ceil(center + spacing)) + 1, p.size)
    r = p[lo:hi] / np.where(env[lo:hi] > 0, env[lo:hi], np.inf)
    r = r[np.isfinite(r)]
    if r.size == 0 or r.max() + r.min() == 0:
        return 0.0
    return float((r.max() - r.min()) / (r.max() + r.min()))


# -- Gaussian profiles ------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianFit:
    mean: float
    sigma: float
    amplitude: float
    half_widths: tuple

    def model(self, n):
        return gaussian(n, self.amplitude, self.mean, self.sigma)


def gaussian(n, a, mu, s):
    return a * np.exp(-((np.asarray(n, dtype=float) - mu) ** 2) / (2 * s * s))


def _gauss_jac(n, a, mu, s):
    e = np.exp(-((n - mu) ** 2) / (2 * s * s))
    return np.column_stack([e, a * e * (n - mu) / s**2, a * e * (n - mu) ** 2 / s**3])


def _fit_gauss_sum(n, y, p0):
    k = len(p0) // 3

    def model(p):
        return sum(gaussian(n, *p[3 * i: 3 * i + 3]) for i in range(k))

    def jac(p):
        return np.hstack([_gauss_jac(n, *p[3 * i: 3 * i + 3]) for i in range(k)])

    try:
        with np.errstate(over="ignore", invalid="ignore"):
            sol = optimize.least_squares(lambda p: model(p) - y, np.asarray(p0, float), jac=jac, method="lm",
                                         xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=5000)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise FitDiverged(str(exc)) from exc
    if not np.all(np.isfinite(sol.x)):
        raise FitDiverged("non-finite parameters")
    yrms = float(np.sqrt(np.mean(y**2)))
    if np.sqrt(np.mean(sol.fun**2)) > 0.5 * yrms:
        raise FitDiverged("residual exceeds half the data RMS")
    return sol


def _moment_start(n, y, center, halfwin):
    sel = np.abs(n - center) <= halfwin
    w = np.clip(y[sel], 0, None)
    mu = float(w @ n[sel] / w.sum())
    s = math.sqrt(max(float(w @ (n[sel] - mu) ** 2 / w.sum()), 0.25))
    return mu, s


def fit_gaussian(populations, n=None) -> GaussianFit:
    y = np.asarray(populations, dtype=float)
    n = np.arange(y.size, dtype=float) if n is None else np.asarray(n, dtype=float)
    if np.any(y < -1e-15):
        raise DomainError("populations must be non-negative")
    if np.count_nonzero(y > 1e-15) < 5:
        raise FitDiverged("need at least five nonzero bins")
    i = int(np.argmax(y))
    # width start from the number of bins above half maximum
    s0 = max(np.count_nonzero(y >= 0.5 * y[i]) / 2.355, 0.5)
    sol = _fit_gauss_sum(n, y, [y[i], n[i], s0])
    a, mu, s = sol.x
    hw = _half_widths(sol.jac, sol.fun, 3)
    return GaussianFit(float(mu), float(abs(s)), float(a), (float(hw[1]), float(hw[2]), float(hw[0])))


def peak_position(populations, halfwin: int = 5) -> float:
    """Sub-bin location of the highest maximum from a local Gaussian fit."""
    y = np.asarray(populations, dtype=float)
    i = int(np.argmax(y))
    lo, hi = max(i - halfwin, 0), min(i + halfwin + 1, y.size)
    n = np.arange(lo, hi, dtype=float)
    try:
        return fit_gaussian(y[lo:hi], n).mean
    except FitDiverged:
        return float(i)


@dataclass(frozen=True)
class TwoGaussianFit:
    peak1: GaussianFit
    peak2: GaussianFit
    separation: float
    height_ratio: float  # amplitude of the upper-n peak over the lower-n peak


def fit_two_gaussians(populations, n=None, min_distance: int = 3) -> TwoGaussianFit:
    y = np.asarray(populations, dtype=float)
    n = np.arange(y.size, dtype=float) if n is None else np.asarray(n, dtype=float)
    if np.any(y < -1e-15):
        raise DomainError("populations must be non-negative")
    if np.count_nonzero(y > 1e-15) < 10:
        raise FitDiverged("need at least ten nonzero bins")
    idx, _ = signal.find_peaks(np.concatenate([[-np.inf], y, [-np.inf]]), distance=min_distance)
    idx = idx - 1
    if idx.size < 2:
        raise PeakNotFound("fewer than two local maxima")
    top = np.sort(idx[np.argsort(y[idx])[-2:]])
    half = max(abs(n[top[1]] - n[top[0]]) / 2.0, 2.0)
    p0 = []
    for j in top:
        mu, s = _moment_start(n, y, n[j], half)
        p0 += [y[j], n[j], min(s, half)]
    sol = _fit_gauss_sum(n, y, p0)
    hw = _half_widths(sol.jac, sol.fun, 6)
    fits = [GaussianFit(float(sol.x[3 * i + 1]), float(abs(sol.x[3 * i + 2])), float(sol.x[3 * i]),
                        (float(hw[3 * i + 1]), float(hw[3 * i + 2]), float(hw[3 * i]))) for i in range(2)]
    fits.sort(key=lambda g: g.mean)
    return TwoGaussianFit(fits[0], fits[1], fits[1].mean - fits[0].mean, fits[1].amplitude / fits[0].amplitude)


# -- metrics -------------------------------------------------------------------------------


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DomainError("arrays must have equal length")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DomainError("cosine similarity of a zero vector")
    return float(np.clip(a @ b / (na * nb), 0.0, 1.0))


def metrology_gain_db(nbar: float, sigma: float) -> float:
    """Displacement-sensing gain over the coherent state, 20 log10(sqrt(nbar)/sigma)."""
    if not (nbar > 0 and sigma > 0):
        raise DomainError("nbar and sigma must be positive")
    return 20.0 * math.log10(math.sqrt(nbar) / sigma)


def metrology_summary(nbar: float, sigma: float) -> dict:
    """Gain plus the compression factor sqrt(nbar)/sigma and its 10 log10 value."""
    fold = math.sqrt(nbar) / sigma
    return {
        "gain_db": metrology_gain_db(nbar, sigma),
        "compression_fold": fold,
        "compression_fold_db": 10.0 * math.log10(fold),
    }

