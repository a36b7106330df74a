import numpy as np
import pytest

from chronogen.exceptions import ValidationError
from chronogen.hilbert import random_hermitian
from chronogen.model import HamiltonianSpec, assemble_global, random_spec, zero_interaction
from chronogen.spectral import (
    eigenspaces,
    fit_coefficients,
    invariance_residual,
    make_eigenstate,
    schmidt_rank,
    select_state,
)

from conftest import PAPER_H, PAPER_PSI

S3 = np.sqrt(3)


def test_example_eigenspaces():
    spaces = eigenspaces(PAPER_H)
    assert [s.multiplicity for s in spaces] == [2, 2]
    assert spaces[0].energy == pytest.approx(-S3, abs=1e-12)
    assert spaces[1].energy == pytest.approx(S3, abs=1e-12)
    for s in spaces:
        assert np.linalg.norm(s.basis.conj().T @ s.basis - np.eye(2)) <= 1e-10
        assert np.max(np.linalg.norm(PAPER_H @ s.basis - s.energy * s.basis, axis=0)) <= 1e-9


def test_nondegenerate_diagonal():
    spaces = eigenspaces(np.diag([0.0, 1.0, 2.0]))
    assert [s.multiplicity for s in spaces] == [1, 1, 1]


def test_clustering_within_tolerance():
    h = np.diag([0.0, 5e-9])
    # ||h||_max = 5e-9, so the split is 1 * ||h||; use an explicitly scaled matrix instead
    h = np.diag([0.0, 5e-9, 1.0])
    spaces = eigenspaces(h, degeneracy_tol=1e-8 * 1.0)
    assert [s.multiplicity for s in spaces] == [2, 1]


def test_union_spans_space():
    h = random_hermitian(7, np.random.default_rng(3))
    spaces = eigenspaces(h)
    basis = np.hstack([s.basis for s in spaces])
    assert np.linalg.norm(basis.conj().T @ basis - np.eye(7)) <= 1e-10


def test_select_example_state():
    space = eigenspaces(PAPER_H)[0]
    coeffs = fit_coefficients(space, PAPER_PSI)
    state = select_state(PAPER_H, space, coeffs)
    assert np.allclose(state.psi, PAPER_PSI, atol=1e-12)
    assert state.residual <= 1e-10


def test_select_multiplicity_one():
    space = eigenspaces(np.diag([0.0, 1.0, 2.0]))[1]
    state = select_state(np.diag([0.0, 1.0, 2.0]), space, [1])
    assert np.array_equal(state.psi, space.basis[:, 0])
    assert state.residual == 0


def test_select_superposition_in_degenerate_pair():
    space = eigenspaces(PAPER_H)[1]
    state = select_state(PAPER_H, space, np.array([1, 1j]) / np.sqrt(2))
    assert state.residual <= 1e-10


def test_select_default_and_errors():
    space = eigenspaces(PAPER_H)[0]
    assert np.array_equal(select_state(PAPER_H, space).psi, space.basis[:, 0])
    with pytest.raises(ValidationError):
        select_state(PAPER_H, space, [0, 0])
    with pytest.raises(ValidationError):
        select_state(PAPER_H, space, [1, 0, 0])


def test_invariance_at_zero_and_example(paper_state):
    assert invariance_residual(PAPER_H, paper_state, 0.0) == 0.0
    assert invariance_residual(PAPER_H, paper_state, 1.7) <= 1e-9


def test_invariance_detects_perturbation():
    spaces = eigenspaces(PAPER_H)
    psi = PAPER_PSI / np.linalg.norm(PAPER_PSI)
    w = spaces[1].basis[:, 0]
    perturbed = make_eigenstate(PAPER_H, psi + 0.1 * w, -S3)
    lam = np.pi
    got = invariance_residual(PAPER_H, perturbed, lam)
    # only the E+ admixture rotates, by exp(i lam (E+ - E-))
    oracle = abs(0.1 * (np.exp(1j * lam * 2 * S3) - 1)) / np.linalg.norm(psi + 0.1 * w)
    assert got == pytest.approx(oracle, abs=1e-12)
    assert got >= 0.05


@pytest.mark.parametrize("seed", range(5))
def test_invariance_random_eigenspaces(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(2, 3, 0.8, seed)
    h = assemble_global(spec)
    for space in eigenspaces(h):
        c = rng.standard_normal(space.multiplicity) + 1j * rng.standard_normal(space.multiplicity)
        state = select_state(h, space, c)
        for lam in rng.uniform(-10, 10, 10):
            assert invariance_residual(h, state, lam) <= 1e-9


def test_schmidt_rank_examples():
    assert schmidt_rank(np.kron([1, 0], [1, 0]).astype(complex), 2, 2) == 1
    assert schmidt_rank(PAPER_PSI, 2, 2) == 2
    assert schmidt_rank(np.array([0, 1, 1, 0]) / np.sqrt(2), 2, 2) == 2
    with pytest.raises(ValidationError):
        schmidt_rank(PAPER_PSI, 2, 3)


@pytest.mark.parametrize("seed", range(5))
def test_free_nondegenerate_eigenstates_are_products(seed):
    rng = np.random.default_rng(seed)
    hs = np.diag(rng.uniform(-1, 1, 3))
    hc = np.diag(rng.uniform(-1, 1, 4) * np.pi)
    spec = HamiltonianSpec(random_rotate(hs, rng), random_rotate(hc, rng), zero_interaction(3, 4))
    h = assemble_global(spec)
    spaces = eigenspaces(h)
    assert all(s.multiplicity == 1 for s in spaces)
    for s in spaces:
        assert schmidt_rank(s.basis[:, 0], 3, 4) == 1


def random_rotate(d, rng):
    q, _ = np.linalg.qr(rng.standard_normal(d.shape) + 1j * rng.standard_normal(d.shape))
    m = q @ d @ q.conj().T
    return 0.5 * (m + m.conj().T)
