"""Integration of the emergent TDSE and trajectory comparison."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_grid, check_hermitian, check_vector, is_uniform
from .exceptions import ValidationError
from .hilbert import expm_hermitian

SOURCES = ("projected", "integrated", "closed_form")


@dataclass(frozen=True)
class SystemTrajectory:
    lambda_grid: np.ndarray
    states: np.ndarray
    source: str

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValidationError(f"unknown trajectory source {self.source!r}")
        if len(self.states) != len(self.lambda_grid):
            raise ValidationError("states and lambda_grid lengths differ")


@dataclass(frozen=True)
class ComparisonReport:
    """Worst-case distances between two trajectories on a shared grid.

    ``max_angle`` is the Fubini-Study angle ``arccos |<a|b>| / (|a||b|)``, a
    phase-insensitive distance that, unlike the infidelity, scales linearly
    with the state error.
    """

    max_infidelity: float
    max_tdse_residual: float
    max_norm_drift: float
    max_angle: float = 0.0

    def to_dict(self):
        return {k: float(v) for k, v in self.__dict__.items()}


def propagate_free(h_system, phi0, lam):
    """``exp(-i lam H_S) phi0``."""
    return expm_hermitian(h_system, lam) @ check_vector(phi0, "phi0")


def integrate_tdse(h_system, potential_provider, phi0, lambda_grid):
    """Exponential-midpoint integration of ``i phi' = (H_S + V_S(lam)) phi``.

    ``phi_{k+1} = exp(-i dlam [H_S + V_S(lam_k + dlam/2)]) phi_k``.  Every step
    is unitary and the scheme is second order.  ``potential_provider`` maps a
    1-D array of parameters to a stack of Hermitian ``V_S`` matrices; any
    singular-overlap error it raises propagates unchanged.
    """
    h_system = check_hermitian(h_system, "h_system")
    grid = check_grid(lambda_grid)
    phi = check_vector(phi0, "phi0", h_system.shape[0])
    states = np.empty((len(grid), len(phi)), dtype=complex)
    states[0] = phi
    if len(grid) > 1:
        steps = np.diff(grid)
        mids = grid[:-1] + 0.5 * steps
        gens = h_system + np.asarray(potential_provider(mids), dtype=complex).reshape(len(mids), *h_system.shape)
        gens = 0.5 * (gens + gens.conj().transpose(0, 2, 1))
        w, vecs = np.linalg.eigh(gens)
        props = np.einsum("kij,kj,klj->kil", vecs, np.exp(-1j * steps[:, None] * w), vecs.conj())
        for k, u in enumerate(props):
            phi = u @ phi
            states[k + 1] = phi
    return SystemTrajectory(grid, states, "integrated")


def _potential_stack(potential_samples, n, d):
    if callable(potential_samples):
        raise ValidationError("tdse_residual needs sampled potentials, not a provider")
    stack = [getattr(s, "v_s", s) for s in potential_samples]
    stack = np.asarray(stack, dtype=complex)
    if stack.shape != (n, d, d):
        raise ValidationError(f"potential samples have shape {stack.shape}, expected {(n, d, d)}")
    return stack


def tdse_residual(h_system, potential_samples, trajectory):
    """Max over interior points of ``|| i (phi_{k+1} - phi_{k-1}) / 2h - (H_S + V_S) phi_k ||``."""
    grid = trajectory.lambda_grid
    if not is_uniform(grid):
        raise ValidationError("tdse_residual requires a uniform grid")
    sample_grid = [getattr(s, "lam", None) for s in potential_samples]
    if None not in sample_grid and not np.allclose(sample_grid, grid, rtol=0, atol=1e-12):
        raise ValidationError("potential samples and trajectory use different grids")
    states = np.asarray(trajectory.states)
    if len(grid) < 3:
        return 0.0
    h_system = check_hermitian(h_system, "h_system")
    v_s = _potential_stack(potential_samples, len(grid), h_system.shape[0])
    step = grid[1] - grid[0]
    deriv = 1j * (states[2:] - states[:-2]) / (2 * step)
    gen = np.einsum("kij,kj->ki", h_system + v_s[1:-1], states[1:-1])
    return float(np.max(np.linalg.norm(deriv - gen, axis=1)))


def _check_same_grid(a, b):
    if len(a.lambda_grid) != len(b.lambda_grid) or not np.array_equal(a.lambda_grid, b.lambda_grid):
        raise ValidationError("trajectories are defined on different grids")


def overlap_ratio(a, b):
    """``|<a_k|b_k>|^2 / (|a_k|^2 |b_k|^2)`` per row."""
    num = np.abs(np.einsum("ki,ki->k", a.conj(), b)) ** 2
    den = np.einsum("ki,ki->k", a.conj(), a).real * np.einsum("ki,ki->k", b.conj(), b).real
    return np.clip(num / den, 0.0, 1.0)


def compare(a, b, max_tdse_residual=0.0):
    """Phase-insensitive comparison of two trajectories on the same grid."""
    _check_same_grid(a, b)
    ratio = overlap_ratio(np.asarray(a.states), np.asarray(b.states))
    norms = np.linalg.norm(a.states, axis=1)
    return ComparisonReport(
        max_infidelity=float(np.max(1.0 - ratio)),
        max_tdse_residual=float(max_tdse_residual),
        max_norm_drift=float(np.max(np.abs(norms - norms[0]))),
        max_angle=float(np.max(np.arccos(np.sqrt(ratio)))),
    )


def norm_drift(trajectory):
    norms = np.linalg.norm(trajectory.states, axis=1)
    return float(np.max(np.abs(norms - norms[0])))
