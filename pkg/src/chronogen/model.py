"""Bipartite Hamiltonians ``H = H_S (x) 1_C + 1_S (x) H_C + V``."""

from dataclasses import dataclass

import numpy as np

from ._validation import MAX_DIM, check_capacity, check_hermitian
from .exceptions import ValidationError
from .hilbert import kron, random_hermitian

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis):
    """The 2x2 Pauli matrix for ``axis`` in ``{'x', 'y', 'z'}``."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValidationError(f"unknown Pauli axis {axis!r}") from None


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """System, clock and interaction parts of a global Hamiltonian.

    The interaction is stored as a full ``(d_S*d_C) x (d_S*d_C)`` matrix, so
    any coupling is allowed.  Use :func:`product_interaction` for the common
    ``A_S (x) B_C`` case.
    """

    h_system: np.ndarray
    h_clock: np.ndarray
    v_interaction: np.ndarray

    def __post_init__(self):
        hs = check_hermitian(self.h_system, "h_system")
        hc = check_hermitian(self.h_clock, "h_clock")
        dim = check_capacity(hs.shape[0] * hc.shape[0], MAX_DIM)
        v = check_hermitian(self.v_interaction, "v_interaction")
        if v.shape != (dim, dim):
            raise ValidationError(f"v_interaction has shape {v.shape}, expected {(dim, dim)}")
        for name, arr in (("h_system", hs), ("h_clock", hc), ("v_interaction", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def d_system(self):
        return self.h_system.shape[0]

    @property
    def d_clock(self):
        return self.h_clock.shape[0]

    @property
    def dim(self):
        return self.d_system * self.d_clock

    def __eq__(self, other):
        if not isinstance(other, HamiltonianSpec):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("h_system", "h_clock", "v_interaction")
        )

    __hash__ = None


def assemble_global(spec):
    """Dense global Hamiltonian of ``spec``."""
    eye_s = np.eye(spec.d_system, dtype=complex)
    eye_c = np.eye(spec.d_clock, dtype=complex)
    return kron(spec.h_system, eye_c) + kron(eye_s, spec.h_clock) + spec.v_interaction


def product_interaction(a_system, b_clock):
    """``A_S (x) B_C`` for Hermitian factors."""
    return kron(check_hermitian(a_system, "a_system"), check_hermitian(b_clock, "b_clock"))


def zero_interaction(d_system, d_clock):
    return np.zeros((d_system * d_clock,) * 2, dtype=complex)


def paper_example_spec():
    """Two coupled qubits: ``H_S = 0``, ``H_C = sigma_z``, ``V = (sx + sz) (x) sx``."""
    return HamiltonianSpec(
        h_system=np.zeros((2, 2), dtype=complex),
        h_clock=pauli("z"),
        v_interaction=np.kron(pauli("x") + pauli("z"), pauli("x")),
    )


def random_spec(d_system, d_clock, coupling_strength, seed):
    """Random GUE-style instance; ``v_interaction`` has spectral norm ``coupling_strength``."""
    if d_system < 1 or d_clock < 1:
        raise ValidationError("dimensions must be positive")
    check_capacity(d_system * d_clock, MAX_DIM)
    if not coupling_strength >= 0:
        raise ValidationError(f"coupling_strength must be >= 0, got {coupling_strength}")
    rng = np.random.default_rng(seed)
    h_s = random_hermitian(d_system, rng)
    h_c = random_hermitian(d_clock, rng)
    v = coupling_strength * random_hermitian(d_system * d_clock, rng)
    return HamiltonianSpec(h_s, h_c, v)
