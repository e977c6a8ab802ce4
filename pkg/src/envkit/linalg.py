"""Dense complex linear-algebra kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The helpers here
add the validation and conventions the rest of the package relies on:
ascending eigenvalues, descending singular values, and the SVD written as
``A = left @ diag(s) @ right.T`` (transpose, not conjugate transpose).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import NonSquare, NotHermitian, TooFewSamples, ZeroMatrix

DEFAULT_TOL = 1e-10


class EigenSystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class SvdResult(NamedTuple):
    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def fro(a) -> float:
    return float(np.linalg.norm(a))


def hermiticity_residual(h: np.ndarray) -> float:
    return fro(h - dagger(h))


def unitarity_residual(u: np.ndarray) -> float:
    u = np.asarray(u)
    return fro(dagger(u) @ u - np.eye(u.shape[1]))


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_residual(u) <= tol


def _check_hermitian(h, tol: float) -> np.ndarray:
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise NonSquare(f"matrix of shape {h.shape} is not square")
    res = hermiticity_residual(h)
    if res > tol * max(1.0, fro(h)):
        raise NotHermitian(f"||H - H^dagger||_F = {res:.3e} exceeds {tol:.1e}", res)
    return h


def hermitian_eig(h, tol: float = DEFAULT_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    h = _check_hermitian(h, tol)
    w, v = np.linalg.eigh((h + dagger(h)) / 2)
    return EigenSystem(w, v)


def complex_svd(a, tol: float = DEFAULT_TOL) -> SvdResult:
    """Full SVD ``a = left @ Sigma @ right.T`` with square unitary factors."""
    a = as_matrix(a)
    if fro(a) <= tol:
        raise ZeroMatrix("cannot decompose a zero matrix")
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    return SvdResult(u, s, vh.T)


def rectangular_diag(s, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=complex)
    k = min(len(s), *shape)
    out[np.arange(k), np.arange(k)] = s[:k]
    return out


def unitary_exp(h, t: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return exp(-i H t) from the eigendecomposition of ``h``."""
    w, v = hermitian_eig(h, tol)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def integrate_sampled(values, dt: float):
    """Integrate uniformly spaced samples along the first axis.

    Composite Simpson for odd sample counts, trapezoid otherwise.
    """
    y = np.asarray(values)
    if y.ndim == 0 or y.shape[0] < 2:
        raise TooFewSamples("need at least two samples")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if y.shape[0] % 2 == 1:
        return integrate.simpson(y, dx=dt, axis=0)
    return integrate.trapezoid(y, dx=dt, axis=0)


def polar_unitary(a: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition of a square matrix."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def fix_phase(v: np.ndarray) -> tuple[np.ndarray, complex]:
    """Rotate ``v`` so its largest-magnitude entry is real positive.

    Returns the rotated array and the phase factor that was applied.
    Ties are broken by the first index in flattened order.
    """
    flat = v.ravel()
    i = int(np.argmax(np.abs(flat) - 1e-12 * np.arange(flat.size)))
    if abs(flat[i]) == 0:
        return v, 1.0
    ph = np.conj(flat[i]) / abs(flat[i])
    return v * ph, ph


def orthonormal_completion(cols: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a full unitary; given columns come first."""
    cols = np.asarray(cols, dtype=complex)
    n, d = cols.shape
    if d == n:
        return cols.copy()
    proj = np.eye(n) - cols @ dagger(cols)
    w, v = np.linalg.eigh((proj + dagger(proj)) / 2)
    rest = v[:, np.argsort(w)[::-1][: n - d]]
    return np.hstack([cols, rest])
