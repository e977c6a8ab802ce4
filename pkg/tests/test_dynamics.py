import logging

import numpy as np
import pytest

from envkit import channels as chn
from envkit import dynamics as dyn
from envkit import linalg, scenarios
from envkit._rng import random_hermitian, random_unitary
from envkit.errors import DimensionMismatch, GapTooSmall, NotHermitianSample, ZeroProbabilityBranch
from envkit.states import PureState, reduced_density

X, Z = scenarios.PAULI_X, scenarios.PAULI_Z

# Amplitude damping p=0.3 on the left of the beta=1, E=(0,1) TFD state.
A2 = 1 / (1 + np.exp(-1.0))
B2 = 1 - A2
KICK_FIDELITY = (A2 + B2 * np.sqrt(0.7)) ** 2
KICK_PURITY = (A2 + 0.7 * B2) ** 2 + (0.3 * B2) ** 2


def test_frozen_closed_forms():
    assert A2 == pytest.approx(0.73105857863, abs=1e-11)
    assert KICK_FIDELITY == pytest.approx(0.914071977644, abs=1e-12)
    assert KICK_PURITY == pytest.approx(0.851654455041, abs=1e-12)


@pytest.fixture(scope="module")
def sweep():
    return dyn.build_frame(scenarios.linear_sweep_path(2001))


def test_constant_hamiltonian_theta():
    path = dyn.HamiltonianPath.from_function(lambda t: Z, 0.0, 1.0, 11)
    frame = dyn.build_frame(path)
    # ascending order: level 1 is |0> with energy +1
    np.testing.assert_allclose(frame.theta[-1], [-1.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(dyn.counterdiabatic_unitary(frame, 10), linalg.unitary_exp(Z, 1.0), atol=1e-14)


def test_constant_hamiltonian_u_cd_random(rng):
    h = random_hermitian(3, rng)
    frame = dyn.build_frame(dyn.HamiltonianPath.from_function(lambda t: h, 0.0, 2.0, 21))
    assert linalg.fro(dyn.counterdiabatic_unitary(frame, 20) - linalg.unitary_exp(h, 2.0)) < 1e-12


def test_sweep_gap_and_theta(sweep):
    # min over t of 2 sqrt((1-t)^2 + t^2) is sqrt 2 at t = 1/2
    assert sweep.min_gap == pytest.approx(np.sqrt(2), abs=1e-9)
    np.testing.assert_allclose(sweep.theta[-1], [-0.81161262, 0.81161262], atol=1e-7)


def test_gap_closing_path_raises():
    path = dyn.HamiltonianPath.from_function(lambda t: (1 - 2 * t) * Z, 0.0, 1.0, 101)
    with pytest.raises(GapTooSmall) as exc:
        dyn.build_frame(path)
    assert exc.value.t == pytest.approx(0.5)


def test_path_validation():
    with pytest.raises(NotHermitianSample):
        dyn.HamiltonianPath(np.array([0.0, 1.0]), np.array([Z, np.array([[0, 1], [0, 0]])]))
    with pytest.raises(ValueError):
        dyn.HamiltonianPath(np.array([0.0, 0.3, 1.0]), np.array([Z, Z, Z]))
    with pytest.raises(DimensionMismatch):
        dyn.HamiltonianPath(np.array([0.0, 1.0]), np.array([Z]))


def test_geometric_residue_diagnostic(sweep, caplog):
    assert sweep.diagnostics["max_geometric_imag"] < 1e-6
    with caplog.at_level(logging.WARNING, logger="envkit.dynamics"):
        dyn.build_frame(scenarios.linear_sweep_path(201))
    assert any("imaginary residue" in r.message for r in caplog.records)


def test_easta_partners(sweep, rng):
    last = len(sweep.times) - 1
    for u_s in (np.eye(2), dyn.counterdiabatic_unitary(sweep, last), random_unitary(2, rng)):
        for i in (0, 500, last):
            u_e = dyn.easta_partner(sweep, u_s, i)
            assert linalg.is_unitary(u_e, 1e-10)
            assert dyn.verify_easta(sweep, u_s, u_e, i).residual < 1e-10


def test_regauge_keeps_verdicts(sweep, rng):
    last = len(sweep.times) - 1
    moved = sweep.regauge([0.4, -1.3])
    u_s = random_unitary(2, rng)
    for frame in (sweep, moved):
        u_e = dyn.easta_partner(frame, u_s, last)
        assert dyn.verify_easta(frame, u_s, u_e, last).holds
    psi0 = dyn.easta_initial_state(moved)
    out = PureState(psi0.dims, (dyn.counterdiabatic_unitary(moved, last) @ psi0.as_matrix()).ravel())
    for k in range(2):
        assert dyn.project_environment(out, moved, k).fidelity > 1 - 1e-12


def test_easta_rejects_bad_unitary(sweep):
    with pytest.raises(ValueError):
        dyn.easta_partner(sweep, np.ones((2, 2)), 0)
    with pytest.raises(DimensionMismatch):
        dyn.easta_partner(sweep, np.eye(3), 0)


def test_projection_zero_branch(sweep):
    psi = PureState((2, 2), [1, 0, 0, 0])
    with pytest.raises(ZeroProbabilityBranch):
        dyn.project_environment(psi, sweep, 1)


def test_tfd_state_and_marginal():
    spec = dyn.TfdSpec(np.array([0.0, 1.0]), 1.0)
    psi = dyn.tfd_state(spec)
    np.testing.assert_allclose(reduced_density(psi, [0]).matrix, np.diag([A2, B2]), atol=1e-14)
    np.testing.assert_allclose(spec.gibbs_weights(), [A2, B2])


def test_static_checks(rng):
    for _ in range(100):
        d = int(rng.integers(1, 5))
        spec = dyn.TfdSpec(rng.uniform(-2, 2, d), float(rng.uniform(0, 3)))
        t = float(rng.uniform(-5, 5))
        assert dyn.static_check(spec, t).residual < 1e-10


def test_sum_generator_is_not_static():
    spec = dyn.TfdSpec(np.array([0.0, 1.0]), 1.0)
    assert not dyn.static_check(spec, 1.0, sign=+1).passed


def test_commutant():
    assert linalg.fro(Z @ X - X @ Z) == pytest.approx(2 * np.sqrt(2))
    assert not dyn.commutant_check(X, Z).passed
    assert dyn.commutant_check(linalg.unitary_exp(Z, 0.3), Z).passed


def test_bath_kicks():
    spec = dyn.TfdSpec(np.array([0.0, 1.0]), 1.0)
    rep = dyn.bath_violation(spec, chn.standard_channel("amplitude_damping", 0.3))
    assert rep.fidelity == pytest.approx(KICK_FIDELITY, abs=1e-12)
    assert rep.purity == pytest.approx(KICK_PURITY, abs=1e-12)
    assert rep.violation and rep.purity_witness
    deph = dyn.bath_violation(spec, chn.standard_channel("dephasing", 1.0))
    assert deph.left_fixed_point_residual < 1e-14
    assert deph.purity == pytest.approx(A2**2 + B2**2, abs=1e-12)
    assert deph.violation


def test_bath_dimension_mismatch():
    spec = dyn.TfdSpec(np.array([0.0, 1.0, 2.0]), 1.0)
    with pytest.raises(DimensionMismatch):
        dyn.bath_violation(spec, chn.identity_channel(2))
