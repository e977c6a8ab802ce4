"""Envariance checks, envariant partner construction and the no-go harness.

A pure state is envariant under a local map on S when some local map on E
undoes it. For unitaries the partner is built block-by-block in the Schmidt
frame; for channels, purity of the intermediate state is a necessary
condition that random non-DFS channels violate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from ._rng import random_unitary, sub_rng
from .channels import (
    KrausChannel,
    apply_local,
    apply_product,
    dfs_build,
    dfs_check,
    random_complement_kraus,
    random_cptp,
)
from .errors import DimensionMismatch, NonUnitaryInput, NotAdmissible, NotPure
from .states import (
    DEGENERACY_RTOL,
    DensityMatrix,
    MultiplicityPartition,
    PureState,
    SchmidtDecomposition,
    as_density,
    group_degenerate,
    purity,
    reduced_density,
    schmidt,
)

ADMISSIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class EnvarianceVerdict:
    holds: bool
    residual: float
    tol: float
    phase: float | None = None
    fixed_point_residuals: dict[str, float] = field(default_factory=dict)
    certificate: dict[str, float] | None = None


@dataclass(frozen=True)
class PartnerSpec:
    """Block unitaries in the Schmidt frame, one per multiplicity group."""

    r_blocks: tuple[np.ndarray, ...]
    complement_unitary: np.ndarray


def _check_unitary(u, dim: int, name: str) -> np.ndarray:
    u = linalg.as_matrix(u)
    if u.shape != (dim, dim):
        raise DimensionMismatch(f"{name} has shape {u.shape}, expected {(dim, dim)}")
    return u


def unitary_envariance_check(psi: PureState, u_s, u_e, tol: float = 1e-9, strict: bool = False) -> EnvarianceVerdict:
    """Does (U_S (x) U_E)|psi> equal |psi> (up to a global phase unless strict)?"""
    ds, de = psi.dims
    u_s = _check_unitary(u_s, ds, "U_S")
    u_e = _check_unitary(u_e, de, "U_E")
    out = (u_s @ psi.as_matrix() @ u_e.T).ravel()
    ov = np.vdot(psi.amplitudes, out)
    alpha = 0.0 if strict or abs(ov) < 1e-300 else float(np.angle(ov))
    res = float(np.linalg.norm(out - np.exp(1j * alpha) * psi.amplitudes))
    return EnvarianceVerdict(res <= tol, res, tol, phase=alpha)


def multiplicity_partition(sd: SchmidtDecomposition, tol: float = DEGENERACY_RTOL) -> MultiplicityPartition:
    return group_degenerate(sd.coeffs, tol)


def _group_slices(partition: MultiplicityPartition):
    for g in partition.groups:
        yield np.asarray(g)


def partner_spec(psi: PureState, u_s, tol: float = ADMISSIBILITY_TOL) -> tuple[PartnerSpec, SchmidtDecomposition]:
    """Schmidt-frame blocks of U_S, or NotAdmissible if it is not block diagonal."""
    sd = schmidt(psi)
    d = sd.rank
    u_s = _check_unitary(u_s, psi.dims[0], "U_S")
    if not linalg.is_unitary(u_s, 1e-9):
        raise NonUnitaryInput("U_S is not unitary", linalg.unitarity_residual(u_s))
    r = sd.omega_s.conj().T @ u_s @ sd.omega_s
    leak = max(linalg.fro(r[:d, d:]), linalg.fro(r[d:, :d]))
    if leak > tol:
        raise NotAdmissible(f"U_S mixes the Schmidt support with its complement (residual {leak:.3e})", leak)
    part = multiplicity_partition(sd)
    mask = np.zeros((d, d), dtype=bool)
    blocks = []
    for g in _group_slices(part):
        mask[np.ix_(g, g)] = True
    cross = linalg.fro(np.where(mask, 0, r[:d, :d]))
    if cross > tol:
        raise NotAdmissible(f"U_S mixes distinct Schmidt coefficients (residual {cross:.3e})", cross)
    for g in _group_slices(part):
        blk = r[np.ix_(g, g)]
        res = linalg.unitarity_residual(blk)
        if res > tol:
            raise NotAdmissible(f"block for coefficients {g.tolist()} is not unitary (residual {res:.3e})", res)
        blocks.append(blk)
    return PartnerSpec(tuple(blocks), r[d:, d:]), sd


def partner_unitary(psi: PureState, u_s, tol: float = ADMISSIBILITY_TOL, complement=None) -> np.ndarray:
    """Unitary U_E with (U_S (x) U_E)|psi> = |psi>.

    In the Schmidt frame U_E is the complex conjugate of each block of U_S;
    on the environment complement it is ``complement`` (identity by default).
    """
    spec, sd = partner_spec(psi, u_s, tol)
    d = sd.rank
    de = psi.dims[1]
    r_e = np.eye(de, dtype=complex)
    for g, blk in zip(_group_slices(sd.partition), spec.r_blocks):
        r_e[np.ix_(g, g)] = blk.conj()
    if complement is not None:
        r_e[d:, d:] = _check_unitary(complement, de - d, "complement")
    return sd.omega_e @ r_e @ sd.omega_e.conj().T


def multipartite_partner(psi: PureState, u_s, tol: float = ADMISSIBILITY_TOL) -> np.ndarray:
    """Partner on E^(1) alone for U_S on S; other environments get identity."""
    dims = psi.dims
    if len(dims) < 3:
        raise DimensionMismatch("need at least two environments")
    t = psi.amplitudes.reshape(dims)
    order = [0] + list(range(2, len(dims))) + [1]
    rest = int(np.prod([dims[i] for i in order[:-1]]))
    swapped = PureState((rest, dims[1]), t.transpose(order).ravel())
    u_rest = np.kron(linalg.as_matrix(u_s), np.eye(rest // dims[0]))
    return partner_unitary(swapped, u_rest, tol)


def _fixed_point_residuals(rho: DensityMatrix, channels) -> dict[str, float]:
    out = {}
    for i, ch in enumerate(channels):
        if ch is None:
            continue
        red = reduced_density(rho, [i])
        out[f"factor_{i}"] = linalg.fro(ch(red.matrix) - red.matrix)
    return out


def channel_envariance_check(rho, phi_s: KrausChannel, phi_e: KrausChannel, tol: float = 1e-8) -> EnvarianceVerdict:
    rho = as_density(rho)
    if len(rho.dims) != 2:
        raise DimensionMismatch(f"bipartite state expected, got dims {rho.dims}")
    out = apply_product([phi_s, phi_e], rho)
    res = linalg.fro(out.matrix - rho.matrix)
    fp = _fixed_point_residuals(rho, [phi_s, phi_e])
    fp = {"S": fp["factor_0"], "E": fp["factor_1"]}
    cert = None
    if purity(rho) > 1 - 1e-8:
        cert = {
            "S": purity_certificate(rho, phi_s, "S"),
            "E": purity_certificate(rho, phi_e, "E"),
        }
    return EnvarianceVerdict(res <= tol, res, tol, fixed_point_residuals=fp, certificate=cert)


def purity_certificate(rho, phi: KrausChannel, side: str = "S") -> float:
    """Tr[sigma^2] of the intermediate state (Phi (x) I)(rho) or (I (x) Phi)(rho).

    A value below one rules out any partner channel on the other side.
    """
    rho = as_density(rho)
    if purity(rho) < 1 - 1e-8:
        raise NotPure(f"input purity {purity(rho):.10f}")
    factor = {"S": 0, "E": 1}[side.upper()]
    return purity(apply_local(phi, rho, factor))


def multipartite_envariance_check(rho_n, channels, tol: float = 1e-8) -> EnvarianceVerdict:
    rho_n = as_density(rho_n)
    if len(channels) != len(rho_n.dims):
        raise DimensionMismatch(f"{len(channels)} channels for {len(rho_n.dims)} factors")
    out = apply_product(channels, rho_n)
    res = linalg.fro(out.matrix - rho_n.matrix)
    fp = _fixed_point_residuals(rho_n, channels)
    cert = None
    if purity(rho_n) > 1 - 1e-8:
        cert = {f"factor_{i}": purity(apply_local(ch, rho_n, i)) for i, ch in enumerate(channels) if ch is not None}
    return EnvarianceVerdict(res <= tol, res, tol, fixed_point_residuals=fp, certificate=cert)


# -- no-go harness ---------------------------------------------------------


def random_admissible_blocks(partition: MultiplicityPartition, d: int, rng) -> np.ndarray:
    """Random d x d unitary, block diagonal over the multiplicity groups."""
    r = np.zeros((d, d), dtype=complex)
    for g in _group_slices(partition):
        r[np.ix_(g, g)] = random_unitary(len(g), rng)
    return r


def random_dfs_pair(psi: PureState, rng, n_kraus: int = 3, sd: SchmidtDecomposition | None = None):
    """A random envariance pair of DFS channels for ``psi``.

    The support action on S is a random admissible block unitary; the
    environment side gets the conjugate blocks. Both complements carry random
    non-unitary Kraus sets with independent probabilities.
    """
    sd = schmidt(psi) if sd is None else sd
    d = sd.rank
    ds, de = psi.dims
    r = random_admissible_blocks(sd.partition, d, rng)
    pair = []
    for dim, omega, blk in ((ds, sd.omega_s, r), (de, sd.omega_e, r.conj())):
        probs = rng.dirichlet(np.ones(n_kraus))
        gam = random_complement_kraus(dim - d, n_kraus, rng)
        pair.append(dfs_build(blk, probs, gam, basis=omega))
    return pair[0], pair[1]


@dataclass
class NogoReport:
    trials: int
    seed: int
    positive_passes: int = 0
    positive_dfs_passes: int = 0
    negative_falsified: int = 0
    negative_rejected_as_dfs: int = 0
    worst_positive_residual: float = 0.0
    worst_positive_dfs_residual: float = 0.0
    max_negative_purity: float = 0.0

    @property
    def all_passed(self) -> bool:
        return (
            self.positive_passes == self.trials
            and self.positive_dfs_passes == self.trials
            and self.negative_falsified == self.trials
        )


def nogo_experiment(
    psi: PureState,
    trials: int,
    seed: int,
    tol: float = 1e-8,
    purity_threshold: float = 1 - 1e-6,
    n_kraus: int = 3,
) -> NogoReport:
    """Both directions of the DFS no-go statement on random channels.

    Positive: random DFS pairs on the Schmidt supports must leave |psi><psi|
    fixed and pass ``dfs_check``. Negative: random full-Kraus-rank channels
    on S must drive the intermediate state's purity below
    ``purity_threshold``. Trial i draws from splitmix64(seed + i).
    """
    rep = NogoReport(trials, seed)
    if trials <= 0:
        return rep
    rho = psi.density()
    sd = schmidt(psi)
    for i in range(trials):
        rng = sub_rng(seed, i)
        phi_s, phi_e = random_dfs_pair(psi, rng, n_kraus, sd)
        v = channel_envariance_check(rho, phi_s, phi_e, tol)
        rep.positive_passes += v.holds
        rep.worst_positive_residual = max(rep.worst_positive_residual, v.residual)
        ds_ = dfs_check(phi_s, sd.left_basis, tol)
        de_ = dfs_check(phi_e, sd.right_basis, tol)
        rep.positive_dfs_passes += ds_.is_dfs and de_.is_dfs
        worst = max(max(ds_.residuals.values()), max(de_.residuals.values()))
        rep.worst_positive_dfs_residual = max(rep.worst_positive_dfs_residual, worst)

        while True:
            phi = random_cptp(psi.dims[0], rng)
            if not dfs_check(phi, sd.left_basis, tol).is_dfs:
                break
            rep.negative_rejected_as_dfs += 1
        pur = purity_certificate(rho, phi, "S")
        rep.negative_falsified += pur < purity_threshold
        rep.max_negative_purity = max(rep.max_negative_purity, pur)
    return rep


def aligned_gauge(kraus, support: np.ndarray):
    """Rotate a DFS Kraus set so only the first operator acts on the support.

    With Gamma_mu P = a_mu U P, the unitary mixing whose first row is
    conj(a) sends the whole support action into operator 0.
    """
    blocks = [support.conj().T @ k @ support for k in kraus]
    u = linalg.polar_unitary(max(blocks, key=linalg.fro))
    d = support.shape[1]
    a = np.array([np.trace(u.conj().T @ b) / d for b in blocks])
    a = a / np.linalg.norm(a)
    w = linalg.orthonormal_completion(a[:, None]).conj().T
    m = len(kraus)
    return [sum(w[nu, mu] * kraus[mu] for mu in range(m)) for nu in range(m)]


def support_gram(kraus, rho_s: np.ndarray) -> np.ndarray:
    """G[mu, nu] = Tr[rho_S K_mu^dagger K_nu]."""
    m = len(kraus)
    g = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            g[i, j] = np.trace(rho_s @ kraus[i].conj().T @ kraus[j])
    return g
