"""Conditional system states, the effective potential and the phase S(lambda).

Given a global eigenstate ``psi`` (energy ``E``) of a bipartite Hamiltonian and
a clock state ``chi0``, the clock is evolved as
``chi_lam = exp(-i lam (H_C - E)) chi0`` and the system state is read off by
projection.  Writing ``phi = <chi_lam|psi>`` and ``u = <chi_lam|V|psi>`` (both
system vectors) and ``N = <phi|phi>``:

* ``E(lam) = <u|phi> / N``                  (complex c-number)
* ``V_S(lam) = (|u><phi| + |phi><u|) / N``  (Hermitian system operator)
* ``u = V_S phi - E phi``                   (exact decomposition)

The phased conditional state ``exp(-i S(lam)) * phi(lam)`` with
``S = int E dlam`` then obeys ``i d/dlam phi = (H_S + V_S(lam)) phi``.

Projectors onto ``psi`` or ``chi`` are never materialized; everything reduces
to the vectors ``u`` and ``phi``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._validation import check_grid, check_hermitian, check_vector
from .exceptions import SingularOverlapError, ValidationError
from .hilbert import eigh, expm_hermitian, project_clock

SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class EffectivePotentialSample:
    lam: float
    v_s: np.ndarray
    overlap_n: float
    e_script: complex


@dataclass(frozen=True)
class ClockTrajectory:
    """Clock states and derived scalars on a parameter grid.

    ``chi_raw[k]`` is the unphased clock state at ``lambda_grid[k]``.
    ``s_phase`` is ``None`` until :func:`accumulate_phase` has run;
    ``n_overlap`` is ``None`` for trajectories assembled by hand.
    """

    lambda_grid: np.ndarray
    chi_raw: np.ndarray
    e_script: np.ndarray
    s_phase: np.ndarray = None
    n_overlap: np.ndarray = None

    def __len__(self):
        return len(self.lambda_grid)


class _ClockPropagator:
    """Evolves ``chi0`` under ``H_C - E`` for arbitrary parameter arrays."""

    def __init__(self, h_clock, energy):
        self.values, self.vectors = eigh(h_clock)
        self.energy = float(energy)

    def __call__(self, chi0, lams):
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        coeffs = self.vectors.conj().T @ chi0
        phases = np.exp(-1j * np.outer(lams, self.values - self.energy))
        return (phases * coeffs) @ self.vectors.T


def evolve_clock(chi0, h_clock, energy, lam):
    """``exp(-i lam (H_C - E)) chi0``."""
    h_clock = check_hermitian(h_clock, "h_clock")
    chi0 = check_vector(chi0, "chi0", h_clock.shape[0])
    if not np.any(chi0):
        raise ValidationError("chi0 is the zero vector")
    return _ClockPropagator(h_clock, energy)(chi0, lam)[0]


def evolve_clock_grid(chi0, h_clock, energy, lambda_grid):
    """Clock states on a whole grid, shape ``(n_points, d_C)``."""
    h_clock = check_hermitian(h_clock, "h_clock")
    chi0 = check_vector(chi0, "chi0", h_clock.shape[0])
    return _ClockPropagator(h_clock, energy)(chi0, lambda_grid)


def clock_only_trajectory(chi0, h_clock, energy, lambda_grid):
    """A :class:`ClockTrajectory` carrying clock states only (no global state needed)."""
    grid = check_grid(lambda_grid)
    chis = evolve_clock_grid(chi0, h_clock, energy, grid)
    return ClockTrajectory(grid, chis, np.zeros(len(grid), dtype=complex))


def _relational_core(psi, v_psi, chis, lams):
    """Vectorized ``phi``, ``u``, ``N``, ``E`` and ``V_S`` for clock states ``chis`` (rows)."""
    d_c = chis.shape[1]
    d_s = psi.shape[0] // d_c
    phi = chis.conj() @ psi.reshape(d_s, d_c).T
    u = chis.conj() @ v_psi.reshape(d_s, d_c).T
    n = np.einsum("ks,ks->k", phi.conj(), phi).real
    floor = SINGULAR_RTOL * np.vdot(psi, psi).real * np.einsum("kc,kc->k", chis.conj(), chis).real
    bad = np.flatnonzero(n <= floor)
    if bad.size:
        k = bad[0]
        raise SingularOverlapError(lams[k], float(n[k]))
    e = np.einsum("ks,ks->k", u.conj(), phi) / n
    cross = np.einsum("ki,kj->kij", u, phi.conj())
    v_s = (cross + cross.conj().transpose(0, 2, 1)) / n[:, None, None]
    return phi, u, n, e, v_s


def _prepare(psi, chi, v):
    psi = check_vector(psi, "psi")
    chi = check_vector(chi, "chi")
    if psi.shape[0] % chi.shape[0]:
        raise ValidationError("psi length is not a multiple of the clock dimension")
    v = np.asarray(v, dtype=complex)
    if v.shape != (psi.shape[0],) * 2:
        raise ValidationError(f"v has shape {v.shape}, expected {(psi.shape[0],) * 2}")
    return psi, chi, v


def effective_energy(psi, chi, v, lam=0.0):
    """The c-number ``<psi|V P_chi|psi> / <psi|P_chi|psi>``; independent of the scale of ``chi``."""
    psi, chi, v = _prepare(psi, chi, v)
    return complex(_relational_core(psi, v @ psi, chi[None, :], [lam])[3][0])


def effective_potential(psi, chi, v, lam=0.0):
    """Hermitian effective system potential for clock state ``chi``.

    ``lam`` only labels the sample (and a singular-overlap error).
    """
    psi, chi, v = _prepare(psi, chi, v)
    _, _, n, e, v_s = _relational_core(psi, v @ psi, chi[None, :], [lam])
    return EffectivePotentialSample(float(lam), v_s[0], float(n[0]), complex(e[0]))


def decomposition_vectors(psi, chi, v):
    """Return ``(u, phi)`` with ``u = <chi|V|psi>`` and ``phi = <chi|psi>``."""
    psi, chi, v = _prepare(psi, chi, v)
    return project_clock(chi, v @ psi), project_clock(chi, psi)


def verify_decomposition(sample, u, phi):
    """Relative defect of ``u = V_S phi - E phi``."""
    rhs = sample.v_s @ phi - sample.e_script * phi
    scale = np.linalg.norm(phi) * (np.linalg.norm(sample.v_s, 2) + abs(sample.e_script))
    return float(np.linalg.norm(u - rhs) / scale) if scale > 0 else float(np.linalg.norm(u))


def _chunks(n, threads):
    bounds = np.linspace(0, n, min(threads, n) + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]


def evaluate_grid(psi, chi0, h_clock, energy, v, lambda_grid, threads=1):
    """Clock states, ``N``, ``E`` and ``V_S`` at every grid point.

    Returns ``(chis, n_overlap, e_script, v_s)`` stacked along the first axis.
    Grid points are independent, so ``threads > 1`` splits the work across a
    thread pool; values agree with the single-threaded path up to rounding.
    """
    h_clock = check_hermitian(h_clock, "h_clock")
    chi0 = check_vector(chi0, "chi0", h_clock.shape[0])
    psi, chi0, v = _prepare(psi, chi0, v)
    lams = np.atleast_1d(np.asarray(lambda_grid, dtype=float))
    prop = _ClockPropagator(h_clock, energy)
    v_psi = v @ psi

    def work(sl):
        chis = prop(chi0, lams[sl])
        _, _, n, e, v_s = _relational_core(psi, v_psi, chis, lams[sl])
        return chis, n, e, v_s

    if threads <= 1 or len(lams) < 2:
        return work(slice(None))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(work, _chunks(len(lams), threads)))
    return tuple(np.concatenate(p) for p in zip(*parts))


def build_clock_trajectory(psi, chi0, h_clock, energy, v, lambda_grid, threads=1, exact_normalization=True):
    """Evaluate the clock on ``lambda_grid`` and accumulate ``S``.

    Returns ``(trajectory, samples)`` where ``samples`` is the list of
    :class:`EffectivePotentialSample` in grid order.
    """
    grid = check_grid(lambda_grid)
    chis, n, e, v_s = evaluate_grid(psi, chi0, h_clock, energy, v, grid, threads)
    traj = ClockTrajectory(grid, chis, e, None, n)
    samples = [EffectivePotentialSample(float(l), v_s[k], float(n[k]), complex(e[k])) for k, l in enumerate(grid)]
    return accumulate_phase(traj, exact_normalization), samples


def accumulate_phase(trajectory, exact_normalization=True):
    """Fill in ``S(lam) = int_{lam_0}^{lam} E`` with ``S[0] = 0``.

    The real part (a phase) always uses the cumulative composite trapezoid rule
    on the trajectory grid.  The imaginary part only rescales the state; since
    ``Im E = -(1/2) d ln N / dlam`` it is taken exactly as ``-ln(N/N_0) / 2``
    when ``exact_normalization`` is set and overlaps are available, and by the
    trapezoid rule otherwise.
    """
    grid = trajectory.lambda_grid
    e = np.asarray(trajectory.e_script, dtype=complex)
    s = np.zeros(len(grid), dtype=complex)
    if len(grid) > 1:
        s[1:] = np.cumsum(0.5 * (e[1:] + e[:-1]) * np.diff(grid))
    if exact_normalization:
        if trajectory.n_overlap is None:
            raise ValidationError("exact normalization needs the overlaps N(lambda)")
        n = np.asarray(trajectory.n_overlap, dtype=float)
        s = s.real - 0.5j * np.log(n / n[0])
    return replace(trajectory, s_phase=s)


def conditional_state(psi, trajectory, index):
    """``exp(-i S) * <chi_lam|psi>`` at grid point ``index``.

    The factor ``exp(-i S)`` multiplies the projection as is (it is not
    conjugated); with this convention the state solves the emergent TDSE with
    generator ``H_S + V_S``.
    """
    if trajectory.s_phase is None:
        raise ValidationError("trajectory has no accumulated phase; call accumulate_phase first")
    if not -len(trajectory) <= index < len(trajectory):
        raise IndexError(f"grid index {index} out of range")
    return np.exp(-1j * trajectory.s_phase[index]) * project_clock(trajectory.chi_raw[index], psi)


def conditional_states(psi, trajectory):
    """All conditional states, shape ``(n_points, d_S)``."""
    if trajectory.s_phase is None:
        raise ValidationError("trajectory has no accumulated phase; call accumulate_phase first")
    psi = check_vector(psi, "psi")
    d_c = trajectory.chi_raw.shape[1]
    phi = trajectory.chi_raw.conj() @ psi.reshape(-1, d_c).T
    return np.exp(-1j * trajectory.s_phase)[:, None] * phi


def make_potential_provider(psi, chi0, h_clock, energy, v):
    """Callable ``lam -> V_S(lam)`` that re-evolves the clock at any ``lam``.

    Scalars give a ``(d_S, d_S)`` matrix, arrays a stack of them.
    """
    h_clock = check_hermitian(h_clock, "h_clock")
    psi, chi0, v = _prepare(psi, check_vector(chi0, "chi0", h_clock.shape[0]), v)
    prop = _ClockPropagator(h_clock, energy)
    v_psi = v @ psi

    def provider(lam):
        lams = np.atleast_1d(np.asarray(lam, dtype=float))
        v_s = _relational_core(psi, v_psi, prop(chi0, lams), lams)[4]
        return v_s[0] if np.ndim(lam) == 0 else v_s

    return provider


def envariance_check(psi, chi0, h_system, h_clock, energy, lam):
    """``|| U_S(-lam) <U_C(lam) chi0|psi> - <chi0|psi> ||`` for the interaction-free case."""
    chi_lam = evolve_clock(chi0, h_clock, energy, lam)
    lhs = expm_hermitian(h_system, -lam) @ project_clock(chi_lam, psi)
    return float(np.linalg.norm(lhs - project_clock(chi0, psi)))


def apply_clock_projector(x, chi, d_system):
    """Apply ``1_S (x) |chi_hat><chi_hat|`` to the columns of ``x`` (vector or matrix)."""
    chi_hat = check_vector(chi, "chi")
    chi_hat = chi_hat / np.linalg.norm(chi_hat)
    d_c = chi_hat.shape[0]
    x = np.asarray(x, dtype=complex)
    cols = x.reshape(d_system, d_c, -1)
    amp = np.einsum("c,sck->sk", chi_hat.conj(), cols)
    out = np.einsum("sk,c->sck", amp, chi_hat)
    return out.reshape(x.shape)


def pointer_commutator_norm(v, chi, d_system):
    """Spectral norm of ``[V, P_chi]`` with ``P_chi = 1_S (x) |chi_hat><chi_hat|``."""
    v = np.asarray(v, dtype=complex)
    pv = apply_clock_projector(v, chi, d_system)
    comm = pv.conj().T - pv  # V P = (P V)^H for Hermitian V and P
    return float(np.linalg.norm(comm, 2))


def clock_matrix_element(v, chi, d_system):
    """System operator ``<chi|V|chi> / <chi|chi>``."""
    chi = check_vector(chi, "chi")
    d_c = chi.shape[0]
    v4 = np.asarray(v, dtype=complex).reshape(d_system, d_c, d_system, d_c)
    return np.einsum("a,iajb,b->ij", chi.conj(), v4, chi) / np.vdot(chi, chi).real


def pointer_shortcut(psi, chi, v, d_system):
    """Pointer-state approximation of ``<chi|V|psi>``: ``(<chi|V|chi>/<chi|chi>) <chi|psi>``."""
    return clock_matrix_element(v, chi, d_system) @ project_clock(chi, psi)


def pointer_interaction(a_inside, a_outside, chi):
    """``A_in (x) |chi_hat><chi_hat| + A_out (x) (1 - |chi_hat><chi_hat|)``, which commutes with ``P_chi``."""
    chi_hat = check_vector(chi, "chi")
    chi_hat = chi_hat / np.linalg.norm(chi_hat)
    p = np.outer(chi_hat, chi_hat.conj())
    return np.kron(a_inside, p) + np.kron(a_outside, np.eye(len(chi_hat)) - p)
