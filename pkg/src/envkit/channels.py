"""CPTP maps in Kraus form, Choi analysis and decoherence-free-subspace
(DFS) detection/synthesis."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from . import linalg
from .errors import (
    BadParam,
    BadProbabilities,
    ComplementNotTracePreserving,
    DimensionMismatch,
    NotTracePreserving,
    ShapeMismatch,
)
from .states import DensityMatrix, as_density, check_orthonormal


@dataclass(frozen=True)
class KrausChannel:
    dim: int
    kraus: tuple[np.ndarray, ...]

    @property
    def dim_in(self) -> int:
        return self.dim

    @property
    def dim_out(self) -> int:
        return self.dim

    def __len__(self):
        return len(self.kraus)

    def completion_residual(self) -> float:
        return completion_residual(self.kraus)

    def __call__(self, m: np.ndarray) -> np.ndarray:
        """Apply the map to an arbitrary (not necessarily physical) matrix."""
        return sum(k @ m @ k.conj().T for k in self.kraus)


def completion_residual(kraus) -> float:
    d = kraus[0].shape[1]
    s = sum(k.conj().T @ k for k in kraus)
    return linalg.fro(s - np.eye(d))


def new_channel(kraus, tol: float = 1e-9) -> KrausChannel:
    mats = [linalg.as_matrix(k) for k in kraus]
    if not mats:
        raise ShapeMismatch("empty Kraus list")
    shape = mats[0].shape
    if shape[0] != shape[1]:
        raise ShapeMismatch(f"non-square Kraus operator {shape}; only dim_in = dim_out is supported")
    if any(m.shape != shape for m in mats):
        raise ShapeMismatch("Kraus operators differ in shape")
    res = completion_residual(mats)
    if res > tol:
        raise NotTracePreserving(f"||sum K^dagger K - I||_F = {res:.3e}", res)
    for m in mats:
        m.setflags(write=False)
    return KrausChannel(shape[0], tuple(mats))


def identity_channel(dim: int) -> KrausChannel:
    return new_channel([np.eye(dim)])


def unitary_channel(u) -> KrausChannel:
    return new_channel([u])


def apply(ch: KrausChannel, rho) -> DensityMatrix:
    rho = as_density(rho)
    if rho.matrix.shape[0] != ch.dim:
        raise DimensionMismatch(f"channel dim {ch.dim} vs state dim {rho.matrix.shape[0]}")
    out = ch(rho.matrix)
    return DensityMatrix(rho.dims, (out + out.conj().T) / 2, tol=1e-8)


def embed(op: np.ndarray, dims, factor: int) -> np.ndarray:
    """``op`` acting on one tensor factor, identity elsewhere."""
    left = prod(dims[:factor])
    right = prod(dims[factor + 1:])
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def apply_local(ch: KrausChannel, rho, factor: int) -> DensityMatrix:
    """Apply ``ch`` to one factor of a multipartite state."""
    rho = as_density(rho)
    if not 0 <= factor < len(rho.dims) or rho.dims[factor] != ch.dim:
        raise DimensionMismatch(f"channel dim {ch.dim} does not fit factor {factor} of {rho.dims}")
    dims = rho.dims
    n = len(dims)
    t = rho.matrix.reshape(dims + dims)
    out = np.zeros_like(t)
    for k in ch.kraus:
        x = np.moveaxis(np.tensordot(k, t, axes=([1], [factor])), 0, factor)
        x = np.moveaxis(np.tensordot(x, k.conj(), axes=([n + factor], [1])), -1, n + factor)
        out += x
    m = out.reshape(rho.matrix.shape)
    return DensityMatrix(dims, (m + m.conj().T) / 2, tol=1e-8)


def apply_product(channels, rho) -> DensityMatrix:
    """Apply a list of local channels, one per factor (None means identity)."""
    rho = as_density(rho)
    if len(channels) != len(rho.dims):
        raise DimensionMismatch(f"{len(channels)} channels for {len(rho.dims)} factors")
    for i, ch in enumerate(channels):
        if ch is not None:
            rho = apply_local(ch, rho, i)
    return rho


def tensor(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    return new_channel([np.kron(x, y) for x in a.kraus for y in b.kraus])


# -- Choi analysis ---------------------------------------------------------


@dataclass(frozen=True)
class ChoiReport:
    choi: np.ndarray
    eigenvalues: np.ndarray
    kraus_rank: int
    canonical_kraus: tuple[np.ndarray, ...]


def choi_matrix(kraus, dim: int) -> np.ndarray:
    """J = sum_ij |i><j| (x) Phi(|i><j|), input factor first."""
    j = np.zeros((dim * dim, dim * dim), dtype=complex)
    for k in kraus:
        v = k.T.reshape(-1)  # v[i*d + o] = K[o, i]
        j += np.outer(v, v.conj())
    return j


def kraus_from_choi(j: np.ndarray, dim: int, rank_rtol: float = 1e-10):
    w, v = np.linalg.eigh((j + j.conj().T) / 2)
    w, v = w[::-1], v[:, ::-1]
    cutoff = rank_rtol * max(w[0], 0.0)
    keep = w > cutoff
    ops = tuple(np.sqrt(wi) * v[:, i].reshape(dim, dim).T for i, wi in enumerate(w) if keep[i])
    return w, ops


def choi_report(ch: KrausChannel, rank_tol: float = 1e-10) -> ChoiReport:
    """Choi matrix, Kraus rank and Hilbert-Schmidt-orthogonal canonical Kraus set.

    ``rank_tol`` is relative to the largest Choi eigenvalue.
    """
    j = choi_matrix(ch.kraus, ch.dim)
    w, ops = kraus_from_choi(j, ch.dim, rank_tol)
    return ChoiReport(j, w, len(ops), ops)


def restricted_kraus_rank(kraus, basis: np.ndarray, rank_tol: float = 1e-10) -> int:
    """Kraus rank of X -> sum_mu B^dag K_mu B X B^dag K_mu^dag B on span(B)."""
    blocks = [basis.conj().T @ k @ basis for k in kraus]
    j = choi_matrix(blocks, basis.shape[1])
    w = np.linalg.eigvalsh(j)
    return int(np.sum(w > rank_tol * max(w[-1], 0.0)))


# -- standard channels -----------------------------------------------------


def weyl_operators(dim: int):
    """Generalized Pauli X^a Z^b, a, b in [0, dim)."""
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))
    for a in range(dim):
        for b in range(dim):
            yield a, b, np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)


def standard_channel(kind: str, param: float, dim: int = 2, basis=None) -> KrausChannel:
    """Depolarizing, amplitude damping or dephasing channel.

    depolarizing(p): rho -> (1 - p) rho + p I/dim.
    amplitude_damping(p): qubit only, Kraus [[0, sqrt p], [0, 0]], diag(1, sqrt(1-p)).
    dephasing(p): {sqrt(1-p) I} plus {sqrt(p) |b_k><b_k|}; p = 1 is full dephasing
    in ``basis`` (columns, computational by default).
    """
    if not 0.0 <= param <= 1.0:
        raise BadParam(f"parameter {param} outside [0, 1]")
    if kind == "depolarizing":
        ops = []
        for a, b, w in weyl_operators(dim):
            weight = 1 - param + param / dim**2 if a == b == 0 else param / dim**2
            if weight > 0:
                ops.append(np.sqrt(weight) * w)
        return new_channel(ops)
    if kind == "amplitude_damping":
        if dim != 2:
            raise BadParam("amplitude damping is defined for a qubit")
        g1 = np.array([[0, np.sqrt(param)], [0, 0]], dtype=complex)
        g2 = np.array([[1, 0], [0, np.sqrt(1 - param)]], dtype=complex)
        return new_channel([g1, g2])
    if kind == "dephasing":
        b = np.eye(dim, dtype=complex) if basis is None else check_orthonormal(basis)
        if b.shape != (dim, dim):
            raise BadParam(f"dephasing basis must be {dim}x{dim}")
        ops = [np.sqrt(1 - param) * np.eye(dim)] if param < 1 else []
        if param > 0:
            ops += [np.sqrt(param) * np.outer(b[:, k], b[:, k].conj()) for k in range(dim)]
        return new_channel(ops)
    raise BadParam(f"unknown channel kind {kind!r}")


def random_cptp(dim: int, rng: np.random.Generator, rank: int | None = None) -> KrausChannel:
    """Random channel from a Wishart Choi matrix made trace preserving by
    J -> (A^{-1/2} (x) I) J (A^{-1/2} (x) I), A = Tr_out J."""
    rank = dim * dim if rank is None else rank
    g = rng.standard_normal((dim * dim, rank)) + 1j * rng.standard_normal((dim * dim, rank))
    j = g @ g.conj().T
    a = np.trace(j.reshape(dim, dim, dim, dim), axis1=1, axis2=3)
    w, v = np.linalg.eigh(a)
    a_inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    corr = np.kron(a_inv_sqrt, np.eye(dim))
    j = corr @ j @ corr.conj().T
    _, ops = kraus_from_choi(j, dim)
    return new_channel(ops)


# -- DFS form ---------------------------------------------------------------


@dataclass(frozen=True)
class DfsReport:
    is_dfs: bool
    support_unitary: np.ndarray | None
    probabilities: np.ndarray
    complement_kraus: tuple[np.ndarray, ...]
    complement_basis: np.ndarray
    residuals: dict[str, float] = field(default_factory=dict)


def dfs_check(ch: KrausChannel, support, tol: float = 1e-8) -> DfsReport:
    """Test whether every Kraus operator has the form (sqrt(p_mu) U) + gamma_mu
    with respect to span(support) and its orthogonal complement.

    The verdict uses gauge-invariant residuals: the leakage between support
    and complement summed over all Kraus operators, and the weight of the
    support-restricted Choi matrix outside its dominant eigenvector. ``U``,
    ``p_mu`` and ``gamma_mu`` are then read off the channel's own Kraus set.
    """
    sup = check_orthonormal(support, tol=1e-8, name="support")
    d = sup.shape[1]
    if d > ch.dim or sup.shape[0] != ch.dim:
        raise DimensionMismatch(f"support of shape {sup.shape} for channel dim {ch.dim}")
    full = linalg.orthonormal_completion(sup)
    comp = full[:, d:]
    blocks = [full.conj().T @ k @ full for k in ch.kraus]
    leak = np.sqrt(sum(linalg.fro(b[d:, :d]) ** 2 + linalg.fro(b[:d, d:]) ** 2 for b in blocks))
    on_sup = [b[:d, :d] for b in blocks]

    # Restricted Choi matrix: rank one iff all support blocks share one operator.
    j = choi_matrix(on_sup, d)
    w, v = np.linalg.eigh((j + j.conj().T) / 2)
    mixing = float(np.sum(w[:-1].clip(min=0)))
    k = np.sqrt(max(w[-1], 0.0)) * v[:, -1].reshape(d, d).T
    unitarity = linalg.unitarity_residual(k)
    u = linalg.polar_unitary(k)
    u, _ = linalg.fix_phase(u)

    amps = np.array([np.trace(u.conj().T @ m) / d for m in on_sup])
    prop = np.sqrt(sum(linalg.fro(m - a * u) ** 2 for m, a in zip(on_sup, amps)))
    probs = np.abs(amps) ** 2
    phases = np.where(np.abs(amps) > 1e-14, np.conj(amps) / np.maximum(np.abs(amps), 1e-300), 1.0)
    gammas = tuple(ph * b[d:, d:] for ph, b in zip(phases, blocks))
    residuals = {
        "leakage": float(leak),
        "support_mixing": mixing,
        "support_unitarity": float(unitarity),
        "proportionality": float(prop),
        "probability_sum": float(abs(probs.sum() - 1)),
    }
    if gammas and gammas[0].size:
        residuals["complement_completion"] = completion_residual(gammas)
    else:
        residuals["complement_completion"] = 0.0
    ok = all(r <= tol for r in residuals.values())
    return DfsReport(ok, u if ok else None, probs, gammas, comp, residuals)


def dfs_build(u_support, probs, complement_kraus=(), basis=None, tol: float = 1e-9) -> KrausChannel:
    """Channel with Kraus operators (sqrt(p_mu) U) + gamma_mu.

    ``basis`` is a unitary whose first d columns span the protected subspace
    (computational ordering by default). An empty ``complement_kraus`` means
    the protected subspace is the whole space.
    """
    u = linalg.as_matrix(u_support)
    d = u.shape[0]
    if not linalg.is_unitary(u, tol):
        raise BadParam("support operator is not unitary")
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p <= 0) or np.any(p > 1) or abs(p.sum() - 1) > 1e-9:
        raise BadProbabilities(f"probabilities {p} must lie in (0, 1] and sum to 1")
    gammas = [linalg.as_matrix(g) for g in complement_kraus]
    if gammas:
        if len(gammas) != p.size:
            raise BadProbabilities(f"{len(gammas)} complement operators for {p.size} probabilities")
        res = completion_residual(gammas)
        if res > tol:
            raise ComplementNotTracePreserving(f"complement completion residual {res:.3e}", res)
        m = gammas[0].shape[0]
    else:
        m = 0
    n = d + m
    b = np.eye(n, dtype=complex) if basis is None else linalg.as_matrix(basis)
    if b.shape != (n, n) or not linalg.is_unitary(b, 1e-8):
        raise DimensionMismatch(f"basis must be a {n}x{n} unitary")
    ops = []
    for mu, pm in enumerate(p):
        blk = np.zeros((n, n), dtype=complex)
        blk[:d, :d] = np.sqrt(pm) * u
        if m:
            blk[d:, d:] = gammas[mu]
        ops.append(b @ blk @ b.conj().T)
    return new_channel(ops)


def random_complement_kraus(m: int, count: int, rng: np.random.Generator):
    """``count`` operators on an m-dim space from a random isometry (Stinespring)."""
    if m == 0:
        return []
    z = rng.standard_normal((count * m, m)) + 1j * rng.standard_normal((count * m, m))
    q, _ = np.linalg.qr(z)
    return [q[i * m:(i + 1) * m, :] for i in range(count)]
