"""Environment-assisted shortcuts to adiabaticity and thermofield-double checks.

Time is dimensionless with hbar = 1. A frame tracks the instantaneous
eigenvectors of H(t) along a uniform grid and accumulates, per level, the
dynamical plus geometric phase theta_k(t).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .channels import KrausChannel, apply_local
from .envariance import EnvarianceVerdict
from .errors import (
    DimensionMismatch,
    GapTooSmall,
    NonUnitaryInput,
    NotHermitianSample,
    ZeroProbabilityBranch,
)
from .states import PureState, purity

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HamiltonianPath:
    times: np.ndarray
    h_samples: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        h = np.asarray(self.h_samples, dtype=complex)
        if t.ndim != 1 or t.size < 2 or h.shape[0] != t.size or h.ndim != 3 or h.shape[1] != h.shape[2]:
            raise DimensionMismatch("need N times and N square Hamiltonian samples")
        steps = np.diff(t)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, abs(steps[0])):
            raise ValueError("time grid must be uniform and increasing")
        for ti, hi in zip(t, h):
            if linalg.hermiticity_residual(hi) > 1e-10:
                raise NotHermitianSample(f"H(t={ti:.6g}) is not Hermitian")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "h_samples", h)

    @classmethod
    def from_function(cls, h_of_t, t0: float, t1: float, steps: int) -> "HamiltonianPath":
        """Sample ``h_of_t`` on ``steps`` uniformly spaced points in [t0, t1]."""
        times = np.linspace(t0, t1, steps)
        return cls(times, np.array([h_of_t(t) for t in times], dtype=complex))

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def dim(self) -> int:
        return self.h_samples.shape[1]


@dataclass(frozen=True)
class AdiabaticFrame:
    times: np.ndarray
    energies: np.ndarray  # (N, d)
    vectors: np.ndarray  # (N, d, d); column k of vectors[i] is |s_k(t_i)>
    theta: np.ndarray  # (N, d)
    min_gap: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def regauge(self, phases) -> "AdiabaticFrame":
        """Same frame with |s_k(t)> multiplied by constant phases e^{i chi_k}."""
        ph = np.exp(1j * np.asarray(phases, dtype=float))
        return AdiabaticFrame(self.times, self.energies, self.vectors * ph, self.theta,
                              self.min_gap, dict(self.diagnostics))


def _geometric_integrand(vecs: np.ndarray, dt: float) -> np.ndarray:
    """-i <s_k|d/dt s_k> per grid point, central differences inside the grid."""
    deriv = np.gradient(vecs, dt, axis=0, edge_order=2)
    return -1j * np.einsum("tik,tik->tk", vecs.conj(), deriv)


def build_frame(path: HamiltonianPath, gap_tol: float = 1e-6) -> AdiabaticFrame:
    n, d = len(path.times), path.dim
    energies = np.empty((n, d))
    vecs = np.empty((n, d, d), dtype=complex)
    min_gap = np.inf
    for i, h in enumerate(path.h_samples):
        w, v = linalg.hermitian_eig(h)
        if d > 1:
            gap = float(np.min(np.diff(w)))
            if gap <= gap_tol:
                raise GapTooSmall(float(path.times[i]), gap)
            min_gap = min(min_gap, gap)
        if i == 0:
            for k in range(d):
                v[:, k], _ = linalg.fix_phase(v[:, k])
        else:
            ov = np.einsum("ik,ik->k", vecs[i - 1].conj(), v)
            v = v * (np.conj(ov) / np.abs(ov))
        energies[i], vecs[i] = w, v

    integrand = energies + _geometric_integrand(vecs, path.dt)
    imag = float(np.max(np.abs(integrand.imag)))
    diagnostics = {"max_geometric_imag": imag}
    if imag > 1e-8:
        log.warning("geometric phase integrand has imaginary residue %.3e; discarded", imag)
    integrand = integrand.real
    theta = np.zeros((n, d))
    for i in range(1, n):
        theta[i] = linalg.integrate_sampled(integrand[: i + 1], path.dt)
    return AdiabaticFrame(path.times, energies, vecs, theta, float(min_gap), diagnostics)


def counterdiabatic_unitary(frame: AdiabaticFrame, t_index: int) -> np.ndarray:
    """U_cd(t) = sum_k e^{-i theta_k(t)} |s_k(t)><s_k(0)|."""
    phi = frame.vectors[t_index] * np.exp(-1j * frame.theta[t_index])
    return phi @ frame.vectors[0].conj().T


def easta_initial_state(frame: AdiabaticFrame) -> PureState:
    """(1/sqrt d) sum_k |s_k(0)> (x) |k>, environment in its computational basis."""
    d = frame.dim
    return PureState((d, d), (frame.vectors[0] / np.sqrt(d)).ravel())


def easta_partner(frame: AdiabaticFrame, u_s, t_index: int) -> np.ndarray:
    """(U_E)_{m,n} = e^{-i theta_m(t)} <s_n(0)| U_S^dagger |s_m(t)>, in the
    environment's computational basis {|e_k(0)>}."""
    u_s = linalg.as_matrix(u_s)
    if u_s.shape != (frame.dim, frame.dim):
        raise DimensionMismatch(f"U_S shape {u_s.shape} vs frame dim {frame.dim}")
    if not linalg.is_unitary(u_s, 1e-8):
        raise NonUnitaryInput("U_S is not unitary", linalg.unitarity_residual(u_s))
    s0 = frame.vectors[0]
    st = frame.vectors[t_index]
    g = s0.conj().T @ u_s.conj().T @ st  # g[n, m] = <s_n(0)|U_S^dag|s_m(t)>
    return (g * np.exp(-1j * frame.theta[t_index])).T


def verify_easta(frame: AdiabaticFrame, u_s, u_e, t_index: int, tol: float = 1e-7) -> EnvarianceVerdict:
    """|| (U_S (x) U_E)|psi(0)> - (U_cd (x) I)|psi(0)> || against ``tol``."""
    d = frame.dim
    u_s, u_e = linalg.as_matrix(u_s), linalg.as_matrix(u_e)
    if u_s.shape != (d, d) or u_e.shape != (d, d):
        raise DimensionMismatch("unitaries must match the frame dimension")
    psi0 = easta_initial_state(frame).as_matrix()
    lhs = u_s @ psi0 @ u_e.T
    rhs = counterdiabatic_unitary(frame, t_index) @ psi0
    res = linalg.fro(lhs - rhs)
    return EnvarianceVerdict(res <= tol, res, tol)


@dataclass(frozen=True)
class ProjectionResult:
    probability: float
    state: PureState
    fidelity: float
    phase_overlap: complex


def project_environment(state: PureState, frame: AdiabaticFrame, k: int, t_index: int | None = None) -> ProjectionResult:
    """Project E onto |e_k(0)> and compare S with e^{-i theta_k(t)}|s_k(t)>."""
    if len(state.dims) != 2:
        raise DimensionMismatch("bipartite state expected")
    m = state.as_matrix()
    branch = m[:, k]
    p = float(np.vdot(branch, branch).real)
    if p < 1e-12:
        raise ZeroProbabilityBranch(f"branch {k} has probability {p:.3e}")
    post = PureState((state.dims[0],), branch / np.sqrt(p))
    t_index = len(frame.times) - 1 if t_index is None else t_index
    target = np.exp(-1j * frame.theta[t_index, k]) * frame.vectors[t_index][:, k]
    ov = complex(np.vdot(target, post.amplitudes))
    return ProjectionResult(p, post, abs(ov) ** 2, ov)


# -- thermofield double ------------------------------------------------------


@dataclass(frozen=True)
class TfdSpec:
    energies: np.ndarray
    beta: float

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.ndim != 1 or e.size == 0 or not np.all(np.isfinite(e)):
            raise ValueError("energies must be a finite 1-d list")
        if not self.beta >= 0:
            raise ValueError("beta must be non-negative")
        object.__setattr__(self, "energies", e)

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.energies).astype(complex)

    def gibbs_weights(self) -> np.ndarray:
        w = np.exp(-self.beta * (self.energies - self.energies.min()))
        return w / w.sum()


def tfd_state(spec: TfdSpec) -> PureState:
    """Z^{-1/2} sum_k e^{-beta E_k / 2} |E_k>_L |E_k>_R in the energy basis."""
    d = spec.energies.size
    return PureState((d, d), np.diag(np.sqrt(spec.gibbs_weights())).ravel())


@dataclass(frozen=True)
class Verdict:
    passed: bool
    residual: float
    tol: float


def thermofield_hamiltonian(spec: TfdSpec, sign: int = -1) -> np.ndarray:
    """H (x) I - I (x) H; ``sign=+1`` gives the sum generator instead."""
    h = spec.hamiltonian
    eye = np.eye(h.shape[0])
    return np.kron(h, eye) + sign * np.kron(eye, h)


def static_check(spec: TfdSpec, t: float, tol: float = 1e-10, sign: int = -1) -> Verdict:
    """Strict (no global phase) invariance of the TFD under exp(-i H_tot t)."""
    psi = tfd_state(spec).amplitudes
    u = linalg.unitary_exp(thermofield_hamiltonian(spec, sign), t)
    res = float(np.linalg.norm(u @ psi - psi))
    return Verdict(res <= tol, res, tol)


def commutant_check(u, h, tol: float = 1e-10) -> Verdict:
    u, h = linalg.as_matrix(u), linalg.as_matrix(h)
    if u.shape != h.shape or u.shape[0] != u.shape[1]:
        raise DimensionMismatch("U and H must be square and the same size")
    res = linalg.fro(h @ u - u @ h)
    return Verdict(res <= tol, res, tol)


@dataclass(frozen=True)
class BathReport:
    fidelity: float
    purity: float
    violation: bool
    purity_witness: bool
    left_fixed_point_residual: float
    tol: float


def bath_violation(spec: TfdSpec, phi: KrausChannel, tol: float = 1e-10) -> BathReport:
    """Effect of one CPTP kick on the left factor of the TFD state."""
    psi = tfd_state(spec)
    if phi.dim != psi.dims[0]:
        raise DimensionMismatch(f"channel dim {phi.dim} vs TFD factor dim {psi.dims[0]}")
    out = apply_local(phi, psi.density(), 0)
    fid = float(np.real(np.vdot(psi.amplitudes, out.matrix @ psi.amplitudes)))
    pur = purity(out)
    gibbs = np.diag(spec.gibbs_weights())
    fp = linalg.fro(phi(gibbs) - gibbs)
    return BathReport(fid, pur, fid < 1 - tol, pur < 1 - tol, fp, tol)
