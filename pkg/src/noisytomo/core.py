"""Complex linear-algebra primitives for qubit tomography.

States are complex numpy vectors, operators complex square matrices.  The
doubled-real representation stacks (Re c, Im c) and embeds a hermitian
operator as the symmetric block matrix [[Re L, -Im L], [Im L, Re L]]; it is
what the information-matrix machinery works in.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_ATOL = 1e-12
UNIT_ATOL = 1e-12
BLOCH_NORM_ATOL = 1e-9

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_state(c) -> np.ndarray:
    """Validate and return a unit-norm complex state vector."""
    c = np.asarray(c, dtype=complex).ravel()
    if c.size < 2:
        raise ValueError("state must have dimension >= 2")
    nrm = np.linalg.norm(c)
    if abs(nrm - 1.0) > 1e-6:
        raise ValueError(f"state norm {nrm} is not 1")
    return c / nrm


def as_operator(a) -> np.ndarray:
    """Validate and return a square complex matrix."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be square, got shape {a.shape}")
    return a


def check_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Raise if ``a`` deviates from hermiticity; return the symmetrized matrix."""
    a = as_operator(a)
    dev = np.max(np.abs(a - a.conj().T))
    if dev > atol:
        raise ValueError(f"matrix is not hermitian (max deviation {dev:.3e})")
    return 0.5 * (a + a.conj().T)


def check_unit_bloch(r, atol: float = BLOCH_NORM_ATOL) -> np.ndarray:
    """Validate a unit Bloch vector (r_x, r_y, r_z)."""
    r = np.asarray(r, dtype=float).ravel()
    if r.size != 3:
        raise ValueError("Bloch vector must have 3 components")
    nrm = np.linalg.norm(r)
    if abs(nrm - 1.0) > atol:
        raise ValueError(f"Bloch vector norm {nrm} deviates from 1")
    return r


def bloch_to_projector(r) -> np.ndarray:
    """Rank-1 projector (I + r.sigma)/2 for a unit Bloch direction r."""
    rx, ry, rz = check_unit_bloch(r)
    return 0.5 * np.array(
        [[1 + rz, rx + 1j * ry], [rx - 1j * ry, 1 - rz]], dtype=complex
    )


def bloch_to_state(theta: float, phi: float) -> np.ndarray:
    """Pure qubit state at spherical angles (theta from +z, azimuth phi)."""
    return np.array(
        [np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)], dtype=complex
    )


def fidelity(a, b) -> float:
    """Squared overlap |<a|b>|^2 of two pure states."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(abs(np.vdot(a, b)) ** 2)


def realify_state(c) -> np.ndarray:
    """Doubled real vector (Re c, Im c)."""
    c = np.asarray(c, dtype=complex).ravel()
    return np.concatenate([c.real, c.imag])


def realify_operator(lam) -> np.ndarray:
    """Doubled real matrix [[Re L, -Im L], [Im L, Re L]] of a hermitian L."""
    lam = check_hermitian(lam)
    re, im = lam.real, lam.imag
    return np.block([[re, -im], [im, re]])


def tensor(*factors) -> np.ndarray:
    """Kronecker product, leftmost factor most significant."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def phase_align(reference: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Multiply ``c`` by the global phase maximizing Re<reference|c>."""
    ov = np.vdot(reference, c)
    if abs(ov) < 1e-300:
        return c
    return c * (ov.conjugate() / abs(ov))
