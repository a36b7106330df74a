"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numpy as np

from .exceptions import CapacityError, ValidationError

#: Largest global (system x clock) dimension handled with dense storage.
MAX_DIM = 4096

HERMITIAN_RTOL = 1e-12


def check_vector(v, name="vector", dim=None):
    """Return ``v`` as a finite 1-D complex array, optionally of length ``dim``."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or Inf")
    if dim is not None and arr.shape[0] != dim:
        raise ValidationError(f"{name} has length {arr.shape[0]}, expected {dim}")
    return arr


def check_matrix(m, name="matrix", shape=None):
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.size == 0:
        raise ValidationError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or Inf")
    if shape is not None and arr.shape != tuple(shape):
        raise ValidationError(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    return arr


def hermiticity_error(m):
    """Relative Hermiticity defect ``max|M - M^H| / max|M|`` (0 for the zero matrix)."""
    scale = np.max(np.abs(m))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)) / scale)


def check_hermitian(m, name="matrix", rtol=HERMITIAN_RTOL, dim=None):
    shape = None if dim is None else (dim, dim)
    arr = check_matrix(m, name, shape)
    if arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    err = hermiticity_error(arr)
    if err > rtol:
        raise ValidationError(f"{name} is not Hermitian (relative defect {err:.2e} > {rtol:.0e})")
    return arr


def check_capacity(dim, max_dim=MAX_DIM):
    if dim > max_dim:
        raise CapacityError(f"dimension {dim} exceeds the dense capacity limit {max_dim}")
    return dim


def check_grid(grid, name="lambda_grid", min_points=1):
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < min_points:
        raise ValidationError(f"{name} must be 1-D with at least {min_points} points")
    if not np.all(np.isfinite(g)):
        raise ValidationError(f"{name} contains NaN or Inf")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise ValidationError(f"{name} must be strictly ascending")
    return g


def is_uniform(grid, rtol=1e-9):
    d = np.diff(grid)
    return d.size == 0 or bool(np.all(np.abs(d - d[0]) <= rtol * abs(d[0])))
