import numpy as np
import pytest

from envkit import states
from envkit.errors import BadSubsystemIndex, NonOrthonormalBasis, NotNormalized
from envkit.states import DensityMatrix, PureState
from oracles import entropy_direct, ptrace_loops
from conftest import random_density, random_pure

R2 = 1 / np.sqrt(2)
BELL = PureState((2, 2), [R2, 0, 0, R2])
UNEVEN = PureState((2, 2), [0.8, 0, 0, 0.6])


def test_pure_from_matrix():
    np.testing.assert_allclose(states.pure_from_matrix(np.eye(2) * R2).amplitudes, BELL.amplitudes)
    np.testing.assert_allclose(states.pure_from_matrix([[1, 0], [0, 0]]).amplitudes, [1, 0, 0, 0])
    prod = states.pure_from_matrix([[R2, R2], [0, 0]])
    assert states.schmidt(prod).rank == 1


def test_pure_from_matrix_renormalizes_within_window():
    psi = states.pure_from_matrix(np.eye(2) * R2 * (1 + 5e-5))
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1, abs=1e-14)
    with pytest.raises(NotNormalized):
        states.pure_from_matrix(np.eye(2))


def test_schmidt_bell():
    sd = states.schmidt(BELL)
    np.testing.assert_allclose(sd.coeffs, [R2, R2])
    assert sd.rank == 2
    assert sd.partition.counts == {2: 1}


def test_schmidt_uneven_and_product():
    sd = states.schmidt(UNEVEN)
    np.testing.assert_allclose(sd.coeffs, [0.8, 0.6])
    assert sd.partition.counts == {1: 2}
    assert states.schmidt(states.product_state([1, 0], [R2, R2])).rank == 1


def test_schmidt_phase_convention(rng):
    sd = states.schmidt(random_pure((3, 4), rng))
    for k in range(sd.rank):
        col = sd.left_basis[:, k]
        i = np.argmax(np.abs(col))
        assert abs(col[i].imag) < 1e-14 and col[i].real > 0


def test_schmidt_reconstruction_random(rng):
    for _ in range(100):
        dims = (int(rng.integers(1, 7)), int(rng.integers(1, 9)))
        psi = random_pure(dims, rng)
        sd = states.schmidt(psi)
        assert abs(np.vdot(psi.amplitudes, sd.reconstruct())) ** 2 > 1 - 1e-10
        assert np.sum(sd.coeffs**2) == pytest.approx(1, abs=1e-10)
        for basis in (sd.left_basis, sd.right_basis):
            assert np.linalg.norm(basis.conj().T @ basis - np.eye(sd.rank)) < 1e-10


def test_product_states_have_rank_one(rng):
    for _ in range(20):
        a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        b = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        assert states.schmidt(states.product_state(a, b)).rank == 1


def test_degeneracy_grouping_transitive():
    part = states.group_degenerate([1.0, 1.0 + 0.6e-8, 1.0 + 1.2e-8, 0.5])
    assert part.groups == ((0, 1, 2), (3,))
    assert part.counts == {1: 1, 3: 1}
    assert states.group_degenerate([1 / np.sqrt(3)] * 3).counts == {3: 1}


def test_reduced_density_examples():
    np.testing.assert_allclose(states.reduced_density(BELL, [0]).matrix, np.eye(2) / 2)
    np.testing.assert_allclose(states.reduced_density(UNEVEN, [0]).matrix, np.diag([0.64, 0.36]))
    plus = states.product_state([1, 0], [1, 1])
    np.testing.assert_allclose(states.reduced_density(plus, [1]).matrix, np.full((2, 2), 0.5))


def test_reduced_density_matches_loops(rng):
    rho = random_density((3, 4), rng)
    for keep in (0, 1):
        np.testing.assert_allclose(states.reduced_density(rho, [keep]).matrix,
                                   ptrace_loops(rho.matrix, 3, 4, keep), atol=1e-14)


def test_reduced_density_bad_index():
    with pytest.raises(BadSubsystemIndex):
        states.reduced_density(BELL, [2])
    with pytest.raises(BadSubsystemIndex):
        states.reduced_density(BELL, [])


def test_entropy_values():
    assert states.entropy(DensityMatrix((2,), np.diag([1.0, 0.0]))) == pytest.approx(0, abs=1e-15)
    assert states.entropy(DensityMatrix((2,), np.eye(2) / 2)) == pytest.approx(np.log(2))
    expected = entropy_direct([0.64, 0.36])
    assert expected == pytest.approx(0.65342, abs=1e-5)
    assert states.entropy(DensityMatrix((2,), np.diag([0.64, 0.36]))) == pytest.approx(expected, abs=1e-14)


def test_purity_values():
    assert states.purity(BELL) == pytest.approx(1, abs=1e-10)
    assert states.purity(DensityMatrix((2,), np.eye(2) / 2)) == pytest.approx(0.5)
    # depolarized half of a Bell pair: 0.5 |Bell><Bell| + 0.5 I/4, explicit 4x4 sum
    rho = 0.5 * np.outer(BELL.amplitudes, BELL.amplitudes) + 0.5 * np.eye(4) / 4
    assert np.trace(rho @ rho).real == pytest.approx(0.4375)
    assert states.purity(DensityMatrix((2, 2), rho)) == pytest.approx(0.4375)


def test_entropies_of_marginals_agree(rng):
    for _ in range(30):
        psi = random_pure((int(rng.integers(2, 5)), int(rng.integers(2, 6))), rng)
        s_s = states.entropy(states.reduced_density(psi, [0]))
        s_e = states.entropy(states.reduced_density(psi, [1]))
        assert abs(s_s - s_e) < 1e-9


def test_purity_entropy_cross_check(rng):
    for rank in (1, 1, 2, 3):
        rho = random_density((2, 2), rng, rank)
        pure = abs(states.purity(rho) - 1) < 1e-10
        assert pure == (states.entropy(rho) < 1e-8)


def test_branch_state():
    e = np.eye(2)
    ghz = states.branch_state([R2, R2], e, [e, e])
    expected = np.zeros(8)
    expected[0] = expected[7] = R2
    np.testing.assert_allclose(ghz.amplitudes, expected)
    assert ghz.dims == (2, 2, 2)
    np.testing.assert_allclose(states.branch_state([0.8, 0.6], e, [e]).amplitudes, UNEVEN.amplitudes)
    three = states.branch_state([0.8, 0.6], e, [e, e])
    np.testing.assert_allclose(states.reduced_density(three, [0]).matrix, np.diag([0.64, 0.36]), atol=1e-15)


def test_branch_state_rejects_bad_basis():
    with pytest.raises(NonOrthonormalBasis):
        states.branch_state([R2, R2], np.ones((2, 2)), [np.eye(2)])
