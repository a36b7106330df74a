"""Dense complex linear algebra for bipartite (system x clock) Hilbert spaces.

Flat indexing is system-major: the global basis index of ``|s> (x) |c>`` is
``s * d_clock + c``.  For two qubits this gives the order
``{uu, ud, du, dd}`` with the system label first.
"""

from typing import NamedTuple

import numpy as np

from ._validation import MAX_DIM, check_capacity, check_hermitian, check_matrix, check_vector
from .exceptions import ValidationError

EIGH_DEGENERACY_RTOL = 1e-10


class EighResult(NamedTuple):
    """Ascending eigenvalues and column-orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def kron(a, b, max_dim=MAX_DIM):
    """Kronecker product ``a (x) b`` with a dense capacity check."""
    a = check_matrix(a, "a")
    b = check_matrix(b, "b")
    check_capacity(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), max_dim)
    return np.kron(a, b)


def fix_phase(vectors):
    """Rotate each column so its largest-magnitude entry is real and positive."""
    vectors = np.array(vectors, dtype=complex, copy=True)
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.where(pivots == 0, 1, np.abs(pivots)), 1)
    return vectors / phases


def _lex_key(col):
    return tuple(x for z in col for x in (round(z.real, 12), round(z.imag, 12)))


def eigh(m, rtol=EIGH_DEGENERACY_RTOL):
    """Hermitian eigendecomposition with a reproducible ordering.

    Eigenvalues come out ascending.  Every eigenvector is phase-fixed (largest
    entry real positive), and columns whose eigenvalues agree to within
    ``rtol * max|m|`` are ordered lexicographically by their entries.
    """
    m = check_hermitian(m, "m")
    h = 0.5 * (m + m.conj().T)
    values, vectors = np.linalg.eigh(h)
    vectors = fix_phase(vectors)

    scale = max(float(np.max(np.abs(h))), np.finfo(float).tiny)
    order = []
    start = 0
    n = len(values)
    for k in range(1, n + 1):
        if k == n or values[k] - values[k - 1] > rtol * scale:
            block = list(range(start, k))
            block.sort(key=lambda j: _lex_key(vectors[:, j]))
            order.extend(block)
            start = k
    order = np.array(order)
    return EighResult(values[order], vectors[:, order])


def expm_hermitian(h, tau):
    """Return the unitary ``exp(-i * tau * h)`` for Hermitian ``h``."""
    values, vectors = eigh(h)
    if tau == 0:
        return np.eye(len(values), dtype=complex)
    return (vectors * np.exp(-1j * tau * values)) @ vectors.conj().T


def project_clock(chi, psi, d_system=None):
    """Partial inner product ``(1_S (x) <chi|) |psi>``, a system-space vector.

    ``out[s] = sum_c conj(chi[c]) * psi[s * d_C + c]``.  Antilinear in ``chi``.
    """
    chi = check_vector(chi, "chi")
    psi = check_vector(psi, "psi")
    d_c = chi.shape[0]
    if psi.shape[0] % d_c:
        raise ValidationError(f"psi length {psi.shape[0]} is not a multiple of clock dimension {d_c}")
    d_s = psi.shape[0] // d_c
    if d_system is not None and d_system != d_s:
        raise ValidationError(f"psi implies system dimension {d_s}, expected {d_system}")
    return psi.reshape(d_s, d_c) @ chi.conj()


def random_hermitian(dim, rng):
    """GUE-style Hermitian matrix scaled to unit spectral norm (zero stays zero)."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = 0.5 * (z + z.conj().T)
    norm = np.linalg.norm(h, 2)
    return h / norm if norm > 0 else h
