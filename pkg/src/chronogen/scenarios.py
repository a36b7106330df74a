"""End-to-end scenarios and the solvable time-dependent potential generator."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_grid, check_hermitian
from .dynamics import SystemTrajectory, compare, integrate_tdse, overlap_ratio, propagate_free, tdse_residual
from .exceptions import ValidationError, VerificationError
from .model import HamiltonianSpec, assemble_global, paper_example_spec, pauli, zero_interaction
from .relational import (
    build_clock_trajectory,
    conditional_states,
    envariance_check,
    make_potential_provider,
)
from .spectral import eigenspaces, fit_coefficients, make_eigenstate, schmidt_rank, select_state

SQRT3 = np.sqrt(3.0)
DEFAULT_TDSE_RTOL = 1e-4


def default_grid(points=2001, start=0.0, stop=2 * np.pi):
    return np.linspace(start, stop, points)


@dataclass(frozen=True)
class PaperExampleReference:
    """Closed forms for the two-qubit example with ``E_C = V_0 = 1``."""

    a_const: float = 1.0 + SQRT3
    energy: float = -SQRT3

    def _den(self, lam):
        return 1.0 + self.a_const * np.cos(lam) ** 2

    def normalization(self, lam):
        return 1.0 / (2.0 * np.sqrt(self._den(lam)))

    def chi(self, lam):
        lam = np.asarray(lam, dtype=float)
        pref = np.exp(1j * self.energy * lam) * self.normalization(lam)
        return np.stack([pref * np.exp(-1j * lam), pref * np.exp(1j * lam)], axis=-1)

    def v_x(self, lam):
        c2 = np.cos(lam) ** 2
        return (np.cos(2 * lam) + self.a_const * c2) / self._den(lam)

    v_z = v_x

    def v_y(self, lam):
        return -(self.a_const / 2) * np.sin(2 * lam) / self._den(lam)

    def phi(self, lam):
        lam = np.asarray(lam, dtype=float)
        pref = np.exp(1j * self.a_const * lam) * self.normalization(lam)
        return np.stack([pref, -pref * (self.a_const * np.exp(-2j * lam) + 1)], axis=-1)

    def b_field(self, lam):
        """Magnetic field components ``(B_x, B_y, B_z)`` as printed (``B0 + B1``)."""
        lam = np.asarray(lam, dtype=float)
        b0 = 2 * (np.cos(2 * lam) + self.a_const * np.cos(lam) ** 2) / self._den(lam)
        b1 = -self.a_const * np.sin(2 * lam) / self._den(lam)
        return np.stack([b0, b1, b0], axis=-1)

    def global_state(self):
        return np.array([1.0, 0.0, -1.0, -self.a_const], dtype=complex)

    def chi0(self):
        return np.array([1.0, 1.0], dtype=complex) * self.normalization(0.0)


def pauli_components(m):
    """Real ``(v0, vx, vy, vz)`` with ``m = v0 I + vx sx + vy sy + vz sz``."""
    m = check_hermitian(m, "m", rtol=1e-10)
    if m.shape != (2, 2):
        raise ValidationError(f"pauli_components needs a 2x2 matrix, got {m.shape}")
    basis = (np.eye(2), pauli("x"), pauli("y"), pauli("z"))
    return tuple(float(np.real(np.trace(b @ m)) / 2) for b in basis)


def pauli_components_stack(ms):
    ms = np.asarray(ms, dtype=complex)
    return np.stack(
        [np.real(np.einsum("ij,kji->k", b, ms)) / 2 for b in (np.eye(2), pauli("x"), pauli("y"), pauli("z"))],
        axis=-1,
    )


def magnetic_field(v_s):
    """Field ``B`` with ``V_S = -B . mu`` and ``mu = -sigma / 2``, i.e. ``B = 2 (vx, vy, vz)``."""
    return 2.0 * np.asarray(pauli_components(v_s)[1:])


@dataclass
class RelationalRun:
    """Everything produced by one pass of the relational pipeline."""

    spec: HamiltonianSpec
    state: object
    chi0: np.ndarray
    trajectory: object
    samples: list
    projected: SystemTrajectory
    integrated: SystemTrajectory
    report: object
    pointwise_infidelity: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def v_s(self):
        return np.array([s.v_s for s in self.samples])


def run_pipeline(spec, state, chi0, grid, threads=1):
    """Project, integrate and compare on ``grid``.

    The integrator starts from the projection at the first grid point.  The
    report compares integrated against projected trajectories and carries the
    finite-difference TDSE residual of the projected one (0 on non-uniform
    grids or grids with fewer than three points).
    """
    grid = check_grid(grid)
    traj, samples = build_clock_trajectory(
        state.psi, chi0, spec.h_clock, state.energy, spec.v_interaction, grid, threads=threads
    )
    projected = SystemTrajectory(grid, conditional_states(state.psi, traj), "projected")
    provider = make_potential_provider(state.psi, chi0, spec.h_clock, state.energy, spec.v_interaction)
    integrated = integrate_tdse(spec.h_system, provider, projected.states[0], grid)
    try:
        residual = tdse_residual(spec.h_system, samples, projected)
    except ValidationError:
        residual = 0.0
    report = compare(integrated, projected, residual)
    pointwise = 1.0 - overlap_ratio(projected.states, integrated.states)
    return RelationalRun(spec, state, np.asarray(chi0, dtype=complex), traj, samples, projected, integrated,
                         report, pointwise)


def paper_example_state(spec=None):
    """The example's ``psi = (1, 0, -1, -a)`` matched onto the computed ``E_-`` eigenspace."""
    spec = spec or paper_example_spec()
    h = assemble_global(spec)
    space = eigenspaces(h)[0]
    ref = PaperExampleReference()
    coeffs = fit_coefficients(space, ref.global_state())
    state = select_state(h, space, coeffs)
    return state, space, coeffs


def run_paper_example(grid=None, threads=1):
    """Full pipeline on the two-qubit example plus closed-form references."""
    grid = default_grid() if grid is None else check_grid(grid)
    spec = paper_example_spec()
    ref = PaperExampleReference()
    state, space, coeffs = paper_example_state(spec)
    run = run_pipeline(spec, state, ref.chi0(), grid, threads)
    closed = SystemTrajectory(grid, ref.phi(grid), "closed_form")
    run.extras.update(
        reference=ref,
        eigenspace=space,
        coefficients=coeffs,
        closed_form=closed,
        projected_vs_closed=compare(run.projected, closed),
        integrated_vs_closed=compare(run.integrated, closed),
    )
    return run


def degenerate_free_spec():
    """``H_S = sz``, ``H_C = sz``, ``V = 0``: the E = 0 level is spanned by ud and du."""
    return HamiltonianSpec(pauli("z"), pauli("z"), zero_interaction(2, 2))


def degenerate_free_scenario(lambdas=None, seed=0):
    """Interaction-free checks: free evolution, envariance and the product-state variant."""
    spec = degenerate_free_spec()
    h = assemble_global(spec)
    rng = np.random.default_rng(seed)
    lambdas = rng.uniform(-np.pi, np.pi, 10) if lambdas is None else np.asarray(lambdas, dtype=float)
    chi0 = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)

    bell = make_eigenstate(h, np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2), 0.0)
    grid = np.sort(lambdas)
    traj, _ = build_clock_trajectory(bell.psi, chi0, spec.h_clock, bell.energy, spec.v_interaction, grid)
    projected = conditional_states(bell.psi, traj)
    phi0 = conditional_states(bell.psi, build_clock_trajectory(
        bell.psi, chi0, spec.h_clock, bell.energy, spec.v_interaction, [0.0])[0])[0]
    free = np.array([propagate_free(spec.h_system, phi0, l) for l in grid])
    hand = np.stack([np.exp(-1j * grid), np.exp(1j * grid)], axis=-1) / 2
    envariance = np.array([
        envariance_check(bell.psi, chi0, spec.h_system, spec.h_clock, bell.energy, l) for l in lambdas
    ])

    product = make_eigenstate(h, np.array([1, 0, 0, 0], dtype=complex), 2.0)
    ptraj, _ = build_clock_trajectory(product.psi, chi0, spec.h_clock, product.energy, spec.v_interaction, grid)
    pstates = conditional_states(product.psi, ptraj)
    pphi0 = np.array([1.0, 0.0], dtype=complex) / np.sqrt(2)
    product_drift = float(np.max(1.0 - overlap_ratio(pstates, np.broadcast_to(pphi0, pstates.shape))))

    return {
        "spec": spec,
        "state": bell,
        "lambdas": grid,
        "projected": projected,
        "free": free,
        "hand": hand,
        "free_vs_projection": float(np.max(np.abs(free - projected))),
        "hand_vs_projection": float(np.max(np.abs(hand - projected))),
        "envariance": envariance,
        "schmidt_rank": schmidt_rank(bell, 2, 2),
        "product_state": product,
        "product_schmidt_rank": schmidt_rank(product, 2, 2),
        "product_infidelity_drift": product_drift,
    }


@dataclass(frozen=True)
class SolvableExport:
    """A verified time-dependent potential together with its exact solution.

    ``metadata`` describes the inputs and the verification stamp; ``records``
    holds per-grid-point arrays (``lambda``, ``v_s``, ``e_script``,
    ``s_phase``, ``n_overlap``, ``phi``, ``infidelity_proj_vs_int``).
    """

    metadata: dict
    records: dict

    @property
    def stamp(self):
        return self.metadata["verification"]

    def __len__(self):
        return len(self.records["lambda"])


def generate_solvable(spec, state, chi0, grid, tdse_rtol=DEFAULT_TDSE_RTOL, threads=1):
    """Export ``V_S(lam)`` and the matching solution ``phi(lam)`` on a uniform grid.

    The export is stamped with the projected trajectory's TDSE residual; if it
    exceeds ``tdse_rtol * max ||H_S + V_S||`` a :class:`VerificationError` is
    raised instead of returning an unverified export.
    """
    run = run_pipeline(spec, state, chi0, grid, threads)
    v_s = run.v_s
    gen_norm = float(np.max(np.linalg.norm(spec.h_system + v_s, ord=2, axis=(1, 2))))
    threshold = tdse_rtol * max(gen_norm, np.finfo(float).tiny)
    residual = run.report.max_tdse_residual
    stamp = {
        "tdse_residual": residual,
        "threshold": threshold,
        "tdse_rtol": tdse_rtol,
        "max_generator_norm": gen_norm,
        "max_infidelity_proj_vs_int": run.report.max_infidelity,
        "passed": bool(residual <= threshold),
    }
    if not stamp["passed"]:
        raise VerificationError(f"TDSE residual {residual:.3e} exceeds threshold {threshold:.3e}")
    metadata = {
        "d_system": spec.d_system,
        "d_clock": spec.d_clock,
        "h_system": spec.h_system,
        "h_clock": spec.h_clock,
        "v_interaction": spec.v_interaction,
        "psi": state.psi,
        "energy": state.energy,
        "chi0": run.chi0,
        "grid": {"start": float(run.projected.lambda_grid[0]), "stop": float(run.projected.lambda_grid[-1]),
                 "points": len(run.projected.lambda_grid)},
        "verification": stamp,
    }
    records = {
        "lambda": run.projected.lambda_grid,
        "v_s": v_s,
        "e_script": run.trajectory.e_script,
        "s_phase": run.trajectory.s_phase,
        "n_overlap": run.trajectory.n_overlap,
        "phi": run.projected.states,
        "infidelity_proj_vs_int": run.pointwise_infidelity,
    }
    return SolvableExport(metadata, records)
