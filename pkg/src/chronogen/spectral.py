"""Eigen-analysis of the global Hamiltonian."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_hermitian, check_vector
from .exceptions import ValidationError
from .hilbert import eigh, expm_hermitian


@dataclass(frozen=True)
class GlobalEigenstate:
    """A (not necessarily normalized) eigenvector with its energy.

    ``residual`` is ``||(H - E) psi|| / ||psi||``.
    """

    psi: np.ndarray
    energy: float
    residual: float


@dataclass(frozen=True)
class Eigenspace:
    energy: float
    multiplicity: int
    basis: np.ndarray


def energy_residual(h, psi, energy):
    psi = np.asarray(psi, dtype=complex)
    return float(np.linalg.norm(h @ psi - energy * psi) / np.linalg.norm(psi))


def make_eigenstate(h, psi, energy):
    """Wrap ``psi`` as a :class:`GlobalEigenstate`, recomputing its residual."""
    h = check_hermitian(h, "h")
    psi = check_vector(psi, "psi", h.shape[0])
    if not np.any(psi):
        raise ValidationError("psi is the zero vector")
    return GlobalEigenstate(psi, float(energy), energy_residual(h, psi, energy))


def eigenspaces(h, degeneracy_tol=None):
    """Group the spectrum of ``h`` into eigenspaces.

    Sorted eigenvalues are clustered by single linkage: a new cluster starts
    whenever the gap to the previous eigenvalue exceeds ``degeneracy_tol``
    (default ``1e-8 * max|h|``).  The energy of a cluster is its mean.
    """
    h = check_hermitian(h, "h")
    if degeneracy_tol is None:
        degeneracy_tol = 1e-8 * max(float(np.max(np.abs(h))), np.finfo(float).tiny)
    if not degeneracy_tol > 0:
        raise ValidationError("degeneracy_tol must be positive")
    values, vectors = eigh(h)
    spaces = []
    start = 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k] - values[k - 1] > degeneracy_tol:
            basis = vectors[:, start:k]
            spaces.append(Eigenspace(float(np.mean(values[start:k])), k - start, basis))
            start = k
    return spaces


def select_state(h, space, coefficients=None):
    """Combine the eigenspace basis with ``coefficients`` (default: first basis vector)."""
    if coefficients is None:
        coefficients = np.zeros(space.multiplicity, dtype=complex)
        coefficients[0] = 1.0
    coefficients = np.asarray(coefficients, dtype=complex).ravel()
    if coefficients.shape[0] != space.multiplicity:
        raise ValidationError(
            f"got {coefficients.shape[0]} coefficients for an eigenspace of multiplicity {space.multiplicity}"
        )
    psi = space.basis @ coefficients
    if np.linalg.norm(psi) == 0:
        raise ValidationError("coefficients produce the zero vector")
    return make_eigenstate(h, psi, space.energy)


def fit_coefficients(space, target):
    """Least-squares coefficients of ``target`` in the (orthonormal) eigenspace basis."""
    target = check_vector(target, "target", space.basis.shape[0])
    return space.basis.conj().T @ target


def invariance_residual(h, state, lam):
    """``||exp(i lam (H - E)) psi - psi|| / ||psi||``; zero for exact eigenstates."""
    u = expm_hermitian(h, -lam)
    psi = state.psi
    rotated = np.exp(-1j * lam * state.energy) * (u @ psi)
    return float(np.linalg.norm(rotated - psi) / np.linalg.norm(psi))


def schmidt_values(psi, d_system, d_clock):
    psi = check_vector(psi, "psi", d_system * d_clock)
    return np.linalg.svd(psi.reshape(d_system, d_clock), compute_uv=False)


def schmidt_rank(state, d_system, d_clock, tol=1e-10):
    """Number of Schmidt coefficients above ``tol`` times the largest one."""
    psi = state.psi if isinstance(state, GlobalEigenstate) else state
    sv = schmidt_values(psi, d_system, d_clock)
    return int(np.sum(sv > tol * sv[0]))
