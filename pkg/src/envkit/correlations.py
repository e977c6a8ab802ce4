"""Mutual information, classical correlation and discord.

Classical correlation is optimized over rank-1 projective measurements on
the measured factor (dimension at most 4) with multi-start Nelder-Mead. The
first start is always the eigenbasis of the measured marginal; for pure and
classically correlated states that start is already optimal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from . import linalg
from ._rng import random_unitary, sub_rng
from .channels import KrausChannel, apply_local
from .errors import CompletionViolated, DimensionMismatch, NotEnvariancePair, UnsupportedDimension
from .states import DensityMatrix, as_density, entropy, entropy_of_spectrum, reduced_density

PROJECTIVE_CAVEAT = "minimum taken over rank-1 projective measurements, not general POVMs"


@dataclass(frozen=True)
class MeasurementSet:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(linalg.as_matrix(a) for a in self.operators)
        d = ops[0].shape[1]
        res = linalg.fro(sum(a.conj().T @ a for a in ops) - np.eye(d))
        if res > 1e-9:
            raise CompletionViolated(f"measurement completion residual {res:.3e}", res)
        object.__setattr__(self, "operators", ops)

    @classmethod
    def projective(cls, basis) -> "MeasurementSet":
        b = np.asarray(basis, dtype=complex)
        return cls(tuple(np.outer(b[:, a], b[:, a].conj()) for a in range(b.shape[1])))

    @property
    def dim(self) -> int:
        return self.operators[0].shape[1]


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iters: int = 500
    xatol: float = 1e-10
    fatol: float = 1e-12
    seed: int = 0


@dataclass(frozen=True)
class DiscordResult:
    mutual_information: float
    classical: float
    discord: float
    direction: str
    best_measurement: MeasurementSet
    optimizer_trace: list[dict] = field(default_factory=list)
    caveat: str = PROJECTIVE_CAVEAT


def mutual_information(rho) -> float:
    rho = as_density(rho)
    if len(rho.dims) != 2:
        raise DimensionMismatch("mutual information needs a bipartite state")
    return (
        entropy(reduced_density(rho, [0]))
        + entropy(reduced_density(rho, [1]))
        - entropy(rho)
    )


def multipartite_mutual_information(rho_n) -> float:
    rho_n = as_density(rho_n)
    if len(rho_n.dims) < 3:
        raise DimensionMismatch("need at least three factors")
    marg = sum(entropy(reduced_density(rho_n, [i])) for i in range(len(rho_n.dims)))
    return marg - entropy(rho_n)


def _oriented(rho: DensityMatrix, side: str) -> np.ndarray:
    """Density tensor with the measured factor first: shape (dm, du, dm, du)."""
    side = side.upper()
    if len(rho.dims) != 2:
        raise DimensionMismatch("bipartite state expected")
    ds, de = rho.dims
    t = rho.matrix.reshape(ds, de, ds, de)
    if side == "S":
        return t
    if side == "E":
        return t.transpose(1, 0, 3, 2)
    raise ValueError(f"side must be 'S' or 'E', got {side!r}")


def conditioned_entropy(rho, meas: MeasurementSet, side: str = "S"):
    """Outcome probabilities and sum_a p_a S(rho_{other|a}) for a measurement on ``side``."""
    rho = as_density(rho)
    t = _oriented(rho, side)
    dm, du = t.shape[:2]
    if meas.dim != dm:
        raise DimensionMismatch(f"measurement on dim {meas.dim} for factor of dim {dm}")
    probs, total = [], 0.0
    for a in meas.operators:
        e = a.conj().T @ a
        cond = np.einsum("ji,ixjy->xy", e, t)
        p = float(np.trace(cond).real)
        probs.append(p)
        if p >= 1e-12:
            total += p * entropy_of_spectrum(np.linalg.eigvalsh(cond / p))
    return np.array(probs), total


def _projective_objective(t: np.ndarray, basis: np.ndarray) -> float:
    cond = np.einsum("ia,ixjy,ja->axy", basis.conj(), t, basis)
    total = 0.0
    for c in cond:
        p = np.trace(c).real
        if p >= 1e-12:
            total += p * entropy_of_spectrum(np.linalg.eigvalsh(c / p))
    return total


def _bloch_basis(x) -> np.ndarray:
    th, ph = x
    c, s = np.cos(th / 2), np.sin(th / 2)
    return np.array([[c, -np.exp(-1j * ph) * s], [np.exp(1j * ph) * s, c]])


def _bloch_angles(v) -> np.ndarray:
    v, _ = linalg.fix_phase(v)
    th = 2 * np.arccos(np.clip(abs(v[0]), 0, 1))
    ph = np.angle(v[1]) - np.angle(v[0]) if abs(v[1]) > 1e-15 else 0.0
    return np.array([th, ph])


def _hermitian_from_params(x, d) -> np.ndarray:
    h = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, 1)
    n_off = len(iu[0])
    h[np.diag_indices(d)] = x[:d]
    h[iu] = x[d:d + n_off] + 1j * x[d + n_off:]
    return h + np.triu(h, 1).conj().T


def classical_correlation(rho, direction: str = "s-to-e", cfg: OptimizerConfig | None = None) -> DiscordResult:
    """J = S(rho_unmeasured) - min over measurements of the conditioned entropy."""
    cfg = cfg or OptimizerConfig()
    rho = as_density(rho)
    side = {"s-to-e": "S", "e-to-s": "E"}[direction.lower()]
    t = _oriented(rho, side)
    dm = t.shape[0]
    if dm > 4:
        raise UnsupportedDimension(f"measured factor has dimension {dm} > 4")
    marginal = np.einsum("ixjx->ij", t)
    unmeasured = np.einsum("ixiy->xy", t)
    s_other = entropy_of_spectrum(np.linalg.eigvalsh((unmeasured + unmeasured.conj().T) / 2))
    _, eigvecs = np.linalg.eigh((marginal + marginal.conj().T) / 2)

    trace: list[dict] = []
    best_val, best_basis = np.inf, None
    for r in range(max(cfg.restarts, 1)):
        rng = sub_rng(cfg.seed, r)
        if dm == 2:
            x0 = _bloch_angles(eigvecs[:, 0]) if r == 0 else np.array(
                [np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi)])

            def to_basis(x):
                return _bloch_basis(x)
        else:
            u0 = eigvecs if r == 0 else random_unitary(dm, rng)
            x0 = np.zeros(dm * dm)

            def to_basis(x, u0=u0):
                return u0 @ expm(1j * _hermitian_from_params(x, dm))

        def f(x, to_basis=to_basis):
            return _projective_objective(t, to_basis(x))

        start_val = f(x0)
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"maxiter": cfg.max_iters, "xatol": cfg.xatol, "fatol": cfg.fatol})
        x, val = (res.x, float(res.fun)) if res.fun <= start_val else (x0, start_val)
        if val < best_val:
            best_val, best_basis = val, to_basis(x)
        trace.append({"restart": r, "start": float(start_val), "value": val,
                      "best_so_far": float(best_val), "iterations": int(res.nit)})
    j = s_other - best_val
    i = mutual_information(rho)
    return DiscordResult(i, j, i - j, direction.lower(), MeasurementSet.projective(best_basis), trace)


def discord(rho, direction: str = "s-to-e", cfg: OptimizerConfig | None = None) -> DiscordResult:
    """D = I - J, from the same optimization run as ``classical_correlation``."""
    return classical_correlation(rho, direction, cfg)


@dataclass(frozen=True)
class InvarianceReport:
    passed: bool
    before: dict[str, float]
    after: dict[str, float]
    deltas: dict[str, float]
    tol: float


def invariance_check(
    rho,
    phi_s: KrausChannel,
    phi_e: KrausChannel,
    side: str = "S",
    direction: str = "s-to-e",
    tol: float = 1e-5,
    cfg: OptimizerConfig | None = None,
    pair_tol: float = 1e-8,
) -> InvarianceReport:
    """I, J and D before and after applying one half of an envariance pair."""
    from .envariance import channel_envariance_check

    rho = as_density(rho)
    v = channel_envariance_check(rho, phi_s, phi_e, pair_tol)
    if not v.holds:
        raise NotEnvariancePair(f"pair does not fix the state (residual {v.residual:.3e})", v.residual)
    factor, ch = (0, phi_s) if side.upper() == "S" else (1, phi_e)
    after_rho = apply_local(ch, rho, factor)
    vals = []
    for state in (rho, after_rho):
        r = discord(state, direction, cfg)
        vals.append({"I": r.mutual_information, "J": r.classical, "D": r.discord})
    deltas = {k: abs(vals[1][k] - vals[0][k]) for k in vals[0]}
    return InvarianceReport(all(x <= tol for x in deltas.values()), vals[0], vals[1], deltas, tol)
