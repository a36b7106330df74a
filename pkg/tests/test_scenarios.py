import numpy as np
import pytest

from chronogen.exceptions import SingularOverlapError, ValidationError, VerificationError
from chronogen.model import HamiltonianSpec, assemble_global, pauli, zero_interaction
from chronogen.scenarios import (
    degenerate_free_scenario,
    generate_solvable,
    magnetic_field,
    paper_example_state,
    pauli_components,
    pauli_components_stack,
    run_paper_example,
)
from chronogen.spectral import make_eigenstate

from conftest import A


def test_pauli_components_basics():
    assert pauli_components(pauli("x")) == (0, 1, 0, 0)
    assert pauli_components(np.eye(2)) == (1, 0, 0, 0)
    m = 0.3 * np.eye(2) - 0.1 * pauli("x") + 2 * pauli("y") + 0.5 * pauli("z")
    assert pauli_components(m) == pytest.approx((0.3, -0.1, 2, 0.5), abs=1e-15)
    with pytest.raises(ValidationError):
        pauli_components(np.eye(3))


def test_reference_identities(reference):
    grid = np.linspace(-7, 7, 999)
    assert np.array_equal(reference.v_x(grid), reference.v_z(grid))
    assert np.max(np.abs(np.linalg.norm(reference.phi(grid), axis=1) - 1)) <= 1e-14
    norms = np.linalg.norm(reference.chi(grid), axis=1)
    assert np.allclose(norms, np.sqrt(2) * reference.normalization(grid), atol=1e-15)


def test_example_state_matches_print():
    state, space, coeffs = paper_example_state()
    assert np.allclose(state.psi, [1, 0, -1, -A], atol=1e-12)
    assert state.energy == pytest.approx(-np.sqrt(3), abs=1e-12)
    assert state.residual <= 1e-12


def test_example_run_projection_vs_closed_form():
    run = run_paper_example(np.linspace(0, 2 * np.pi, 1001))
    assert run.extras["projected_vs_closed"].max_infidelity <= 1e-9
    assert run.report.max_infidelity <= 1e-7


def test_example_run_v_s_x_z_and_trace():
    run = run_paper_example(np.linspace(0, 2 * np.pi, 1001))
    ref = run.extras["reference"]
    grid = run.projected.lambda_grid
    comps = pauli_components_stack(run.v_s)
    assert np.max(np.abs(comps[:, 1] - ref.v_x(grid))) <= 1e-10
    assert np.max(np.abs(comps[:, 3] - ref.v_z(grid))) <= 1e-10
    assert np.allclose(comps[:, 0], run.trajectory.e_script.real, atol=1e-12)


def test_clock_normalization_matches_print():
    run = run_paper_example(np.linspace(0, 2 * np.pi, 501))
    ref = run.extras["reference"]
    scale = np.exp(run.trajectory.s_phase.imag) * abs(ref.chi0()[0])
    assert np.allclose(scale, ref.normalization(run.projected.lambda_grid), atol=1e-14)


def _fd_orthogonal_residual(phi_fn, gen_fn, lams, h=1e-5):
    out = []
    for lam in lams:
        phi = phi_fn(lam)
        r = 1j * (phi_fn(lam + h) - phi_fn(lam - h)) / (2 * h) - gen_fn(lam) @ phi
        out.append(np.linalg.norm(r - phi * np.vdot(phi, r) / np.vdot(phi, phi)))
    return max(out)


def test_printed_v_s_y_does_not_generate_printed_solution(reference):
    """The computed potential drives the printed solution; the printed y-component does not."""
    run = run_paper_example(np.linspace(0, 2 * np.pi, 11))
    from chronogen.relational import make_potential_provider
    state = run.state
    provider = make_potential_provider(state.psi, run.chi0, run.spec.h_clock, state.energy,
                                       run.spec.v_interaction)

    def printed(lam):
        return reference.v_x(lam) * pauli("x") + reference.v_y(lam) * pauli("y") + reference.v_z(lam) * pauli("z")

    lams = [0.3, 1.0, 2.2]
    assert _fd_orthogonal_residual(reference.phi, provider, lams) <= 1e-8
    assert _fd_orthogonal_residual(reference.phi, printed, lams) > 0.1
    comps = pauli_components_stack(provider(np.array(lams)))
    lam = np.array(lams)
    corrected = -((A + 2) / 2) * np.sin(2 * lam) / (1 + A * np.cos(lam) ** 2)
    assert np.allclose(comps[:, 2], corrected, atol=1e-12)


def test_degenerate_free_scenario():
    out = degenerate_free_scenario()
    assert out["hand_vs_projection"] <= 1e-10
    assert out["free_vs_projection"] <= 1e-9
    assert np.max(out["envariance"]) <= 1e-10
    assert out["schmidt_rank"] == 2
    assert out["product_schmidt_rank"] == 1
    assert out["product_infidelity_drift"] <= 1e-15
    h = assemble_global(out["spec"])
    assert out["state"].residual == 0 and out["product_state"].residual == 0
    assert np.allclose(np.diag(h).real, [2, 0, 0, -2])


def test_generate_example_export_fields():
    run = run_paper_example(np.linspace(0, 2 * np.pi, 11))
    grid = np.linspace(0, 2 * np.pi, 2001)
    export = generate_solvable(run.spec, run.state, run.chi0, grid)
    assert export.stamp["passed"] and export.stamp["tdse_residual"] <= export.stamp["threshold"]
    assert len(export) == 2001
    assert np.all(np.diff(export.records["lambda"]) > 0)
    for v in export.records["v_s"][::100]:
        assert np.allclose(v, v.conj().T, atol=1e-12)
    ref = run.extras["reference"]
    b = np.array([magnetic_field(v) for v in export.records["v_s"]])
    printed = ref.b_field(grid)
    assert np.max(np.abs(b[:, 0] - printed[:, 0])) <= 1e-9
    assert np.max(np.abs(b[:, 2] - printed[:, 2])) <= 1e-9
    corrected_b1 = -(A + 2) * np.sin(2 * grid) / (1 + A * np.cos(grid) ** 2)
    assert np.max(np.abs(b[:, 1] - corrected_b1)) <= 1e-9


def test_generate_altered_clock_state():
    run = run_paper_example(np.linspace(0, 2 * np.pi, 11))
    grid = np.linspace(0, 2 * np.pi, 4001)
    base = generate_solvable(run.spec, run.state, run.chi0, grid)
    alt = generate_solvable(run.spec, run.state, np.array([2, 1], dtype=complex), grid)
    assert alt.stamp["passed"]
    assert np.max(np.abs(alt.records["v_s"] - base.records["v_s"])) > 0.1


def test_generate_refuses_unverified():
    run = run_paper_example(np.linspace(0, 2 * np.pi, 11))
    with pytest.raises(VerificationError):
        generate_solvable(run.spec, run.state, run.chi0, np.linspace(0, 2 * np.pi, 51), tdse_rtol=1e-15)


def test_generate_free_export():
    spec = HamiltonianSpec(pauli("z"), pauli("z"), zero_interaction(2, 2))
    state = make_eigenstate(assemble_global(spec), np.array([0, 1, 1, 0]) / np.sqrt(2), 0.0)
    grid = np.linspace(0, 3, 301)
    export = generate_solvable(spec, state, np.array([1, 1]) / np.sqrt(2), grid)
    assert not np.any(export.records["v_s"])
    phi0 = export.records["phi"][0]
    free = np.array([np.exp(-1j * g * np.array([1, -1])) * phi0 for g in grid])
    assert np.max(np.abs(export.records["phi"] - free)) <= 1e-12


def test_generate_singular_overlap():
    spec = HamiltonianSpec(pauli("z"), pauli("z"), zero_interaction(2, 2))
    state = make_eigenstate(assemble_global(spec), np.array([0, 0, 0, 1]), -2.0)
    with pytest.raises(SingularOverlapError):
        generate_solvable(spec, state, np.array([1, 0]), np.linspace(0, 1, 11))
