"""Using the clock as an instrument: expectation curves and their inversion."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_hermitian, check_vector
from .exceptions import ReadoutRangeError, ReadoutUnusableError, ValidationError
from .hilbert import eigh

MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class ReadoutCurve:
    lambda_grid: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class ResolutionSpectrum:
    coefficients: np.ndarray
    participation_ratio: float


def expectation_curve(a_obs, trajectory):
    """``<chi_lam|A|chi_lam> / <chi_lam|chi_lam>`` along a clock trajectory."""
    chis = np.asarray(trajectory.chi_raw, dtype=complex)
    a_obs = check_hermitian(a_obs, "a_obs", dim=chis.shape[1])
    num = np.einsum("ki,ij,kj->k", chis.conj(), a_obs, chis)
    den = np.einsum("ki,ki->k", chis.conj(), chis).real
    vals = num / den
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(vals.imag)) > 1e-10 * scale:
        raise ValidationError("expectation values are not real; is the observable Hermitian?")
    return ReadoutCurve(np.asarray(trajectory.lambda_grid, dtype=float), vals.real)


def monotonicity(values, tol=MONOTONE_TOL):
    """+1 if strictly increasing, -1 if strictly decreasing, 0 otherwise."""
    d = np.diff(values)
    if d.size and np.all(d > tol):
        return 1
    if d.size and np.all(d < -tol):
        return -1
    return 0


def invert_readout(curve, observed_value):
    """Estimate the parameter at which the curve takes ``observed_value``.

    The curve must be strictly monotone on its grid; the inverse is linear
    interpolation between grid points.
    """
    sign = monotonicity(curve.values)
    if sign == 0:
        raise ReadoutUnusableError("readout curve is not strictly monotone, cannot track the parameter")
    vals = curve.values if sign > 0 else curve.values[::-1]
    grid = curve.lambda_grid if sign > 0 else curve.lambda_grid[::-1]
    if not vals[0] <= observed_value <= vals[-1]:
        raise ReadoutRangeError(f"observed value {observed_value} outside [{vals[0]}, {vals[-1]}]")
    return float(np.interp(observed_value, vals, grid))


def resolution_spectrum(chi0, h_clock):
    """Amplitudes of ``chi0`` in the clock energy eigenbasis and their participation ratio."""
    h_clock = check_hermitian(h_clock, "h_clock")
    chi0 = check_vector(chi0, "chi0", h_clock.shape[0])
    _, vecs = eigh(h_clock)
    a = vecs.conj().T @ chi0
    w = np.abs(a) ** 2
    pr = float(np.sum(w) ** 2 / np.sum(w**2))
    return ResolutionSpectrum(a, pr)
