"""Pure and mixed states on tensor-product spaces.

Flattening is row-major throughout: the first factor is the slowest index,
so a bipartite amplitude vector reshapes to the ``dS x dE`` matrix Psi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from . import linalg
from .errors import (
    BadSubsystemIndex,
    LengthMismatch,
    NonOrthonormalBasis,
    NotNormalized,
)

DEGENERACY_RTOL = 1e-8


@dataclass(frozen=True)
class PureState:
    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if any(d < 1 for d in dims):
            raise ValueError(f"bad dims {dims}")
        if amps.size != prod(dims):
            raise LengthMismatch(f"{amps.size} amplitudes for dims {dims}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > 1e-10:
            raise NotNormalized(f"state norm {norm:.12g}", abs(norm - 1))
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, dims, amplitudes) -> "PureState":
        a = np.asarray(amplitudes, dtype=complex).ravel()
        return cls(dims, a / np.linalg.norm(a))

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to (first factor) x (all remaining factors)."""
        return self.amplitudes.reshape(self.dims[0], -1)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    dims: tuple[int, ...]
    matrix: np.ndarray
    tol: float = field(default=1e-10, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        m = linalg.as_matrix(self.matrix)
        n = prod(dims)
        if m.shape != (n, n):
            raise LengthMismatch(f"matrix shape {m.shape} does not match dims {dims}")
        tol = self.tol
        herm = linalg.hermiticity_residual(m)
        if herm > tol:
            raise ValueError(f"density matrix not Hermitian (residual {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1) > tol:
            raise NotNormalized(f"trace {tr:.12g}", abs(tr - 1))
        m = (m + m.conj().T) / 2
        if np.linalg.eigvalsh(m)[0] < -tol:
            raise ValueError("density matrix has negative eigenvalues")
        m.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def as_density(rho) -> DensityMatrix:
    return rho.density() if isinstance(rho, PureState) else rho


@dataclass(frozen=True)
class MultiplicityPartition:
    groups: tuple[tuple[int, ...], ...]

    @property
    def counts(self) -> dict[int, int]:
        """r_k: number of groups of size k."""
        out: dict[int, int] = {}
        for g in self.groups:
            out[len(g)] = out.get(len(g), 0) + 1
        return dict(sorted(out.items()))

    @property
    def rank(self) -> int:
        return sum(len(g) for g in self.groups)


@dataclass(frozen=True)
class SchmidtDecomposition:
    coeffs: np.ndarray
    omega_s: np.ndarray
    omega_e: np.ndarray
    rank: int
    partition: MultiplicityPartition

    @property
    def left_basis(self) -> np.ndarray:
        return self.omega_s[:, : self.rank]

    @property
    def right_basis(self) -> np.ndarray:
        return self.omega_e[:, : self.rank]

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,ik,jk->ij", self.coeffs, self.left_basis, self.right_basis).ravel()


def pure_from_matrix(psi_matrix) -> PureState:
    m = linalg.as_matrix(psi_matrix)
    norm = linalg.fro(m)
    if abs(norm - 1) > 1e-4:
        raise NotNormalized(f"Frobenius norm {norm:.8g} outside renormalization window", abs(norm - 1))
    return PureState(m.shape, (m / norm).ravel())


def product_state(*vectors) -> PureState:
    amps = np.array([1.0 + 0j])
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        amps = np.kron(amps, v / np.linalg.norm(v))
    return PureState(tuple(len(np.atleast_1d(v)) for v in vectors), amps)


def group_degenerate(values, rtol: float = DEGENERACY_RTOL) -> MultiplicityPartition:
    """Transitive-closure grouping of equal-magnitude values.

    ``|a| ~ |b|`` when ``||a| - |b|| <= rtol * max(|a|, |b|)``.
    """
    mags = np.abs(np.asarray(values))
    n = mags.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(mags[i] - mags[j]) <= rtol * max(mags[i], mags[j]):
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return MultiplicityPartition(tuple(tuple(g) for g in sorted(groups.values())))


def schmidt(state: PureState, tol: float = 1e-10, rtol: float = DEGENERACY_RTOL) -> SchmidtDecomposition:
    """Schmidt decomposition of a bipartite pure state.

    Each ``|s_k>`` is phase-fixed so its largest component is real positive;
    the compensating phase goes into ``|e_k>``, keeping coefficients real.
    """
    if len(state.dims) != 2:
        raise ValueError(f"schmidt needs a bipartite state, got dims {state.dims}")
    left, s, right = linalg.complex_svd(state.as_matrix(), tol)
    left = left.copy()
    right = right.copy()
    for k in range(left.shape[1]):
        left[:, k], ph = linalg.fix_phase(left[:, k])
        if k < len(s):
            right[:, k] = right[:, k] / ph
    rank = int(np.sum(s > tol))
    for k in range(rank, right.shape[1]):
        right[:, k], _ = linalg.fix_phase(right[:, k])
    coeffs = s[:rank].real.copy()
    return SchmidtDecomposition(coeffs, left, right, rank, group_degenerate(coeffs, rtol))


def _check_keep(dims, keep) -> tuple[int, ...]:
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep or any(k < 0 or k >= len(dims) for k in keep):
        raise BadSubsystemIndex(f"keep={keep} invalid for {len(dims)} subsystems")
    return keep


def partial_trace(matrix: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out every factor not listed in ``keep``; kept factors stay in order."""
    dims = tuple(dims)
    keep = _check_keep(dims, keep)
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    t = np.asarray(matrix).reshape(dims + dims)
    perm = list(keep) + traced + [n + i for i in keep] + [n + i for i in traced]
    t = t.transpose(perm)
    dk = prod(dims[i] for i in keep)
    dt = prod(dims[i] for i in traced)
    return np.trace(t.reshape(dk, dt, dk, dt), axis1=1, axis2=3)


def reduced_density(rho, keep) -> DensityMatrix:
    rho = as_density(rho)
    keep = _check_keep(rho.dims, keep)
    return DensityMatrix(tuple(rho.dims[i] for i in keep), partial_trace(rho.matrix, rho.dims, keep))


def entropy_of_spectrum(w) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log(w)))


def entropy(rho) -> float:
    """von Neumann entropy in nats."""
    return max(entropy_of_spectrum(as_density(rho).eigenvalues()), 0.0)


def purity(rho) -> float:
    m = as_density(rho).matrix
    return float(np.real(np.vdot(m, m)))


def check_orthonormal(cols, tol: float = 1e-10, name: str = "basis") -> np.ndarray:
    cols = np.asarray(cols, dtype=complex)
    if cols.ndim == 1:
        cols = cols[:, None]
    res = linalg.fro(cols.conj().T @ cols - np.eye(cols.shape[1]))
    if res > tol:
        raise NonOrthonormalBasis(f"{name} columns not orthonormal (residual {res:.3e})", res)
    return cols


def branch_state(coeffs, system_basis, env_bases) -> PureState:
    """Sum_k c_k |s_k> (x) |e_k^(1)> (x) ... (x) |e_k^(n)>."""
    c = np.asarray(coeffs, dtype=complex)
    if abs(np.sum(np.abs(c) ** 2) - 1) > 1e-10:
        raise NotNormalized("branch coefficients not normalized")
    bases = [check_orthonormal(system_basis, name="system")]
    bases += [check_orthonormal(b, name=f"environment {j + 1}") for j, b in enumerate(env_bases)]
    for b in bases:
        if b.shape[1] < c.size:
            raise LengthMismatch(f"basis has {b.shape[1]} columns for {c.size} branches")
    amps = 0
    for k, ck in enumerate(c):
        term = np.array([ck])
        for b in bases:
            term = np.kron(term, b[:, k])
        amps = amps + term
    return PureState(tuple(b.shape[0] for b in bases), amps)
