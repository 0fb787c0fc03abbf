"""Exponential integrators for tridiagonal generators.

Every routine acts on a vector through ``matvec`` of a tridiagonal matrix
given by its diagonal ``d`` (possibly complex, for non-Hermitian effective
Hamiltonians) and superdiagonal ``h``; the subdiagonal is ``conj(h)``.
All compute v(t) = exp(-i H t) v.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.special import jv

from .errors import ConvergenceError, DomainError

KRYLOV_MAX_DIM = 40
MAX_SUBSTEPS = 200_000
DENSE_MAX_DIM = 128


def tridiag_matvec(d, h, v):
    y = d * v
    y[:-1] += h * v[1:]
    y[1:] += np.conj(h) * v[:-1]
    return y


def tridiag_dense(d, h):
    return np.diag(d.astype(complex)) + np.diag(h, 1) + np.diag(np.conj(h), -1)


def gershgorin_bounds(d, h):
    """Real interval containing the spectrum of a Hermitian tridiagonal matrix."""
    r = np.zeros(d.size)
    r[:-1] += np.abs(h)
    r[1:] += np.abs(h)
    dr = np.real(d)
    return float(np.min(dr - r)), float(np.max(dr + r))


def _arnoldi(d, h, v, m):
    """Orthonormal Krylov basis with two-pass Gram-Schmidt.

    Returns (V, Hm, beta_next, m_used). ``beta_next`` is the norm of the
    residual direction, zero on happy breakdown.
    """
    n = v.size
    m = min(m, n)
    V = np.zeros((m + 1, n), dtype=complex)
    Hm = np.zeros((m + 1, m), dtype=complex)
    V[0] = v
    for j in range(m):
        w = tridiag_matvec(d, h, V[j])
        for _ in range(2):
            c = V[: j + 1].conj() @ w
            w -= c @ V[: j + 1]
            Hm[: j + 1, j] += c
        nb = np.linalg.norm(w)
        Hm[j + 1, j] = nb
        if nb < 1e-13 * max(1.0, np.abs(Hm[: j + 1, j]).max()):
            return V[: j + 1], Hm[: j + 1, : j + 1], 0.0, j + 1
        V[j + 1] = w / nb
    return V[:m], Hm[:m, :m], float(np.real(Hm[m, m - 1])), m


def krylov_expm(d, h, v, t, tol=1e-10, step=None, m_max=KRYLOV_MAX_DIM):
    """exp(-i H t) v by restarted Krylov projection with adaptive substeps.

    The local error of a substep dt is estimated as
    beta * h_{m+1,m} * |[exp(-i dt H_m) e_1]_m| and must stay below
    ``tol * dt / t`` so the accumulated error is bounded by ``tol``.
    """
    v = np.asarray(v, dtype=complex).copy()
    if t == 0.0:
        return v
    if t < 0:
        raise DomainError("negative time")
    # shift by the mean diagonal; the resulting phase is restored at the end
    shift = complex(np.mean(d))
    ds = d - shift
    scale = np.abs(ds).max() + 2.0 * (np.abs(h).max() if h.size else 0.0)
    dt = t if step is None else min(step, t)
    if scale > 0:
        dt = min(dt, 0.5 * m_max / scale)
    elapsed = 0.0
    nsteps = 0
    while elapsed < t * (1 - 1e-15):
        dt = min(dt, t - elapsed)
        beta = np.linalg.norm(v)
        if beta == 0.0:
            break
        V, Hm, hnext, m = _arnoldi(ds, h, v / beta, m_max)
        while True:
            nsteps += 1
            if nsteps > MAX_SUBSTEPS:
                raise ConvergenceError("Krylov propagator exceeded its substep cap")
            E = scipy.linalg.expm(-1j * dt * Hm)
            u = E[:, 0]
            err = beta * abs(hnext) * abs(u[-1])
            if err <= tol * dt / t or hnext == 0.0:
                break
            dt *= 0.5
            if dt < 1e-14 * t:
                raise ConvergenceError("Krylov substep underflow")
        v = beta * (u @ V)
        elapsed += dt
        if err < 0.1 * tol * dt / t:
            dt *= 1.5
    return v * np.exp(-1j * shift * t)


def chebyshev_expm(d, h, v, t, tol=1e-10, step=None, max_terms=4000):
    """exp(-i H t) v by a Chebyshev-Bessel series (Hermitian H only)."""
    v = np.asarray(v, dtype=complex).copy()
    if t == 0.0:
        return v
    if t < 0:
        raise DomainError("negative time")
    if np.any(np.abs(np.imag(d)) > 0):
        raise DomainError("Chebyshev propagation requires a Hermitian generator")
    lo, hi = gershgorin_bounds(d, h)
    c = 0.5 * (hi + lo)
    r = max(0.5 * (hi - lo), 1e-300)
    dn = (np.real(d) - c) / r
    hn = h / r
    nsub = 1 if step is None else max(1, int(np.ceil(t / step)))
    dt = t / nsub
    x = r * dt
    # number of terms: Bessel J_k(x) decays super-exponentially once k > x
    K = int(x + 10 * np.cbrt(x) + 20)
    while K < max_terms and abs(jv(K, x)) > tol * 1e-3:
        K += 10
    if K >= max_terms:
        raise ConvergenceError("Chebyshev series needs too many terms; reduce step")
    k = np.arange(K + 1)
    coef = (2.0 - (k == 0)) * (-1j) ** k * jv(k, x)
    phase = np.exp(-1j * c * dt)
    for _ in range(nsub):
        t0 = v
        t1 = tridiag_matvec(dn, hn, v)
        acc = coef[0] * t0 + coef[1] * t1
        for kk in range(2, K + 1):
            t0, t1 = t1, 2.0 * tridiag_matvec(dn, hn, t1) - t0
            acc += coef[kk] * t1
        v = phase * acc
    return v


def dense_expm(d, h, v, t):
    """Reference exp(-i H t) v through scaling-and-squaring on the dense matrix."""
    if d.size > DENSE_MAX_DIM:
        raise DomainError(f"dense oracle is limited to dim <= {DENSE_MAX_DIM}")
    return scipy.linalg.expm(-1j * t * tridiag_dense(d, h)) @ np.asarray(v, dtype=complex)
