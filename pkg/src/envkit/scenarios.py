"""Reference states and channels, and the demo scenarios the CLI runs.

Each ``demo_*`` returns ``(verdicts, values)``: verdicts map a name to
``{"passed": bool, ...diagnostics}``, values map a name to numbers.
"""

from __future__ import annotations

import numpy as np

from . import channels as chn
from . import correlations as corr
from . import dynamics as dyn
from . import envariance as env
from . import linalg
from ._rng import random_unitary, sub_rng
from .states import PureState, branch_state, entropy, reduced_density

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def bell_state() -> PureState:
    return PureState((2, 2), np.array([1, 0, 0, 1]) / np.sqrt(2))


def ghz_state(n_env: int = 2) -> PureState:
    e = np.eye(2)
    return branch_state([1 / np.sqrt(2)] * 2, e, [e] * n_env)


def swap_damping_state() -> PureState:
    """(|00>_S|00>_E + |11>_S|11>_E)/sqrt 2 with S and E each two qubits."""
    amps = np.zeros(16)
    amps[0 * 4 + 0] = amps[3 * 4 + 3] = 1 / np.sqrt(2)
    return PureState((4, 4), amps)


def swap_damping_channel(p: float) -> chn.KrausChannel:
    """X on span{|00>, |11>} with weights (p, 1-p); amplitude damping on
    span{|01>, |10>} (|10> decays to |01>)."""
    sp, sq = np.sqrt(p), np.sqrt(1 - p)
    g1 = np.zeros((4, 4), dtype=complex)
    g1[0, 3] = g1[3, 0] = sp
    g1[1, 2] = sp
    g2 = np.zeros((4, 4), dtype=complex)
    g2[0, 3] = g2[3, 0] = sq
    g2[1, 1] = 1
    g2[2, 2] = sq
    return chn.new_channel([g1, g2])


SWAP_DAMPING_SUPPORT = np.eye(4)[:, [0, 3]]


def _v(passed, **diag):
    return {"passed": bool(passed), **{k: float(v) for k, v in diag.items()}}


def demo_swap_damping(p_values=(0.1, 0.3, 0.5, 0.9)):
    verdicts, values = {}, {}
    psi = swap_damping_state()
    rho = psi.density()
    for p in p_values:
        ch = swap_damping_channel(p)
        joint = chn.apply(chn.tensor(ch, ch), rho)
        res = linalg.fro(joint.matrix - rho.matrix)
        verdicts[f"joint_fixed_p{p:g}"] = _v(res < 1e-10, residual=res)
        rep = chn.dfs_check(ch, SWAP_DAMPING_SUPPORT)
        u_err = linalg.fro(rep.support_unitary - PAULI_X) if rep.is_dfs else np.inf
        p_err = float(np.max(np.abs(rep.probabilities - [p, 1 - p])))
        verdicts[f"dfs_form_p{p:g}"] = _v(rep.is_dfs and u_err < 1e-9 and p_err < 1e-9,
                                         unitary_error=u_err, probability_error=p_err)
        values[f"purity_certificate_p{p:g}"] = env.purity_certificate(rho, ch, "S")
        values[f"kraus_rank_p{p:g}"] = chn.choi_report(ch).kraus_rank
    return verdicts, values


def random_schmidt_state(ds: int, de: int, d: int, rng, degenerate: bool = False) -> PureState:
    c = rng.uniform(0.2, 1.0, d)
    if degenerate and d >= 2:
        c[1] = c[0]
    c = c / np.linalg.norm(c)
    return branch_state(c, random_unitary(ds, rng)[:, :d], [random_unitary(de, rng)[:, :d]])


def demo_nogo(trials: int = 100, seed: int = 7):
    verdicts, values = {}, {}
    rng = np.random.default_rng(seed)
    cases = {"bell": bell_state(), "rank3_6x8": random_schmidt_state(6, 8, 3, rng)}
    for name, psi in cases.items():
        rep = env.nogo_experiment(psi, trials, seed)
        verdicts[f"{name}_positive"] = _v(rep.positive_passes == trials and rep.positive_dfs_passes == trials,
                                          passes=rep.positive_passes, worst_residual=rep.worst_positive_residual)
        verdicts[f"{name}_falsified"] = _v(rep.negative_falsified == trials,
                                           falsified=rep.negative_falsified, max_purity=rep.max_negative_purity)
        values[f"{name}_trials"] = trials
    return verdicts, values


def linear_sweep_path(steps: int = 2001) -> dyn.HamiltonianPath:
    return dyn.HamiltonianPath.from_function(lambda t: (1 - t) * PAULI_Z + t * PAULI_X, 0.0, 1.0, steps)


def demo_easta(steps: int = 2001, seed: int = 0):
    verdicts, values = {}, {}
    frame = dyn.build_frame(linear_sweep_path(steps))
    last = len(frame.times) - 1
    u_rand = random_unitary(2, sub_rng(seed, 0))
    for name, u_s in (("identity", np.eye(2)), ("u_cd", dyn.counterdiabatic_unitary(frame, last)), ("random", u_rand)):
        u_e = dyn.easta_partner(frame, u_s, last)
        v = dyn.verify_easta(frame, u_s, u_e, last, tol=1e-6)
        verdicts[f"partner_{name}"] = _v(v.holds, residual=v.residual)
    psi0 = dyn.easta_initial_state(frame)
    worst = 1.0
    for i in np.linspace(0, last, 5).astype(int):
        out = PureState(psi0.dims, (dyn.counterdiabatic_unitary(frame, i) @ psi0.as_matrix()).ravel())
        for k in range(frame.dim):
            worst = min(worst, dyn.project_environment(out, frame, k, i).fidelity)
    verdicts["projection_readout"] = _v(worst > 1 - 1e-6, worst_fidelity=worst)
    fine = dyn.build_frame(linear_sweep_path(2 * steps - 1))
    drift = float(np.max(np.abs(fine.theta[-1] - frame.theta[-1])))
    verdicts["grid_refinement"] = _v(drift < 1e-6, theta_change=drift)
    values["min_gap"] = frame.min_gap
    for k in range(frame.dim):
        values[f"theta_{k}"] = frame.theta[-1, k]
    return verdicts, values


def demo_tfd(beta: float = 1.0, energies=(0.0, 1.0), t: float = 1.0):
    spec = dyn.TfdSpec(np.asarray(energies, dtype=float), beta)
    verdicts, values = {}, {}
    s = dyn.static_check(spec, t)
    verdicts["static"] = _v(s.passed, residual=s.residual)
    u = linalg.unitary_exp(spec.hamiltonian, t)
    verdicts["commutant"] = _v(dyn.commutant_check(u, spec.hamiltonian).passed)
    d = spec.energies.size
    kicks = {"dephasing": chn.standard_channel("dephasing", 1.0, d)}
    if d == 2:
        kicks["amplitude_damping"] = chn.standard_channel("amplitude_damping", 0.3)
    for name, ch in kicks.items():
        rep = dyn.bath_violation(spec, ch)
        # expected outcome: the kick breaks staticity
        verdicts[f"bath_{name}_violates"] = _v(rep.violation and rep.purity_witness,
                                               fidelity=rep.fidelity, purity=rep.purity)
        values[f"bath_{name}_fidelity"] = rep.fidelity
        values[f"bath_{name}_purity"] = rep.purity
    for k, w in enumerate(spec.gibbs_weights()):
        values[f"gibbs_{k}"] = w
    return verdicts, values


def demo_discord(restarts: int = 32, seed: int = 0):
    cfg = corr.OptimizerConfig(restarts=restarts, seed=seed)
    verdicts, values = {}, {}
    bell = bell_state().density()
    r = corr.discord(bell, "s-to-e", cfg)
    verdicts["bell_discord_ln2"] = _v(abs(r.discord - np.log(2)) < 1e-5, discord=r.discord)
    classical = reduced_density(ghz_state(2), [0, 1])
    r2 = corr.discord(classical, "s-to-e", cfg)
    verdicts["classical_zero_discord"] = _v(abs(r2.discord) < 1e-6, discord=r2.discord)
    rng = sub_rng(seed, 10_000)
    worst = 0.0
    for _ in range(5):
        psi = random_schmidt_state(2, 2, 2, rng)
        r3 = corr.discord(psi.density(), "s-to-e", cfg)
        worst = max(worst, abs(r3.discord - entropy(reduced_density(psi, [1]))))
    verdicts["pure_state_identity"] = _v(worst < 1e-5, worst_error=worst)
    values.update(bell_I=r.mutual_information, bell_J=r.classical, bell_D=r.discord,
                  classical_J=r2.classical, classical_D=r2.discord)
    return verdicts, values


DEMOS = {
    "swap-damping": demo_swap_damping,
    "nogo": demo_nogo,
    "easta": demo_easta,
    "tfd": demo_tfd,
    "discord": demo_discord,
}
