"""Measurement protocols built on regular-polyhedron geometry.

A protocol is an instrumental matrix: m bra-vector rows X_j with weights
t_j (measurement time per row) and a total sample size n.  The measurement
operators are the rank-1 projectors L_j = X_j^dag X_j, and every built-in
protocol satisfies the decomposition of unity sum_j t_j L_j = n I.

The built-in names follow the convention of the measurement directions'
*dual* polyhedra: the 6-row "cube" protocol measures along octahedron
vertices (the Pauli eigenstates) and the 8-row "octahedron" along cube
vertices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import check_unit_bloch, tensor

UNITY_ATOL = 1e-10

PROTOCOL_KINDS = ("tetrahedron", "cube", "octahedron")

# Guard against runaway m^q rows of dimension 2^q.
MAX_QUBITS_DEFAULT = 4


@dataclass(frozen=True)
class Protocol:
    """Instrumental matrix rows, row weights and total sample size."""

    rows: np.ndarray        # (m, s) complex, each row a bra-vector
    weights: np.ndarray     # (m,) positive reals
    n: float
    label: str = "custom"

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=complex))
        weights = np.asarray(self.weights, dtype=float).ravel()
        if rows.shape[0] != weights.size:
            raise ValueError("one weight per protocol row required")
        if np.any(weights <= 0):
            raise ValueError("row weights must be positive")
        if self.n <= 0:
            raise ValueError("sample size n must be positive")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "weights", weights)

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def with_n(self, n: float) -> "Protocol":
        scale = n / self.n
        return Protocol(self.rows, self.weights * scale, n, self.label)

    def to_json(self) -> str:
        payload = {
            "label": self.label,
            "n": self.n,
            "weights": self.weights.tolist(),
            "rows": [[[z.real, z.imag] for z in row] for row in self.rows],
        }
        return json.dumps(payload, indent=2)

    @staticmethod
    def from_json(text: str) -> "Protocol":
        payload = json.loads(text)
        rows = np.array(
            [[complex(re, im) for re, im in row] for row in payload["rows"]],
            dtype=complex,
        )
        return Protocol(rows, np.array(payload["weights"]), payload["n"],
                        payload["label"])


@dataclass(frozen=True)
class EffectiveMeasurement:
    """Hermitian PSD event operators L_j with weights t_j and sample size n."""

    operators: np.ndarray   # (m, s, s) complex hermitian
    weights: np.ndarray     # (m,)
    n: float
    label: str = ""

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise ValueError("operators must be a stack of square matrices")
        weights = np.asarray(self.weights, dtype=float).ravel()
        if ops.shape[0] != weights.size:
            raise ValueError("one weight per operator required")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "weights", weights)

    @property
    def m(self) -> int:
        return self.operators.shape[0]

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def unity_residual(self) -> float:
        """Max-abs deviation of sum_j t_j L_j from n I."""
        total = np.einsum("j,jab->ab", self.weights, self.operators)
        return float(np.max(np.abs(total - self.n * np.eye(self.dim))))


def _tetra_rows() -> np.ndarray:
    s3 = np.sqrt(3.0)
    hi = np.sqrt(s3 + 1.0)
    lo = np.sqrt(s3 - 1.0)
    norm = 12.0 ** 0.25
    phases = np.exp(1j * np.pi / 4.0 * np.array([1, 3, 5, 7]))
    rows = np.array(
        [
            [hi, phases[0] * lo],
            [lo, phases[1] * hi],
            [hi, phases[2] * lo],
            [lo, phases[3] * hi],
        ],
        dtype=complex,
    )
    return rows / norm


def _cube_rows() -> np.ndarray:
    s2 = np.sqrt(2.0)
    rows = np.array(
        [
            [s2, 0],
            [0, s2],
            [1, 1],
            [1, -1],
            [1, 1j],
            [1, -1j],
        ],
        dtype=complex,
    )
    return rows / s2


def _octa_rows() -> np.ndarray:
    s3 = np.sqrt(3.0)
    hi = np.sqrt(s3 + 1.0)
    lo = np.sqrt(s3 - 1.0)
    norm = 12.0 ** 0.25
    phases = np.exp(1j * np.pi / 4.0 * np.array([1, 3, 5, 7]))
    rows = np.array(
        [[hi, ph * lo] for ph in phases] + [[lo, ph * hi] for ph in phases],
        dtype=complex,
    )
    return rows / norm


_BUILDERS = {
    "tetrahedron": _tetra_rows,
    "cube": _cube_rows,
    "octahedron": _octa_rows,
}


def build_protocol(kind: str, n: float = 1.0) -> Protocol:
    """Built-in single-qubit protocol with uniform weights t_j = 2n/m."""
    if kind not in _BUILDERS:
        raise ValueError(f"unknown protocol kind {kind!r}; "
                         f"choose from {PROTOCOL_KINDS}")
    if n <= 0:
        raise ValueError("sample size n must be positive")
    rows = _BUILDERS[kind]()
    m = rows.shape[0]
    weights = np.full(m, 2.0 * n / m)
    p = Protocol(rows, weights, float(n), label=kind)
    resid = measurement_operators(p).unity_residual()
    if resid > UNITY_ATOL * max(1.0, n):
        raise RuntimeError(f"built-in protocol violates unity: {resid:.3e}")
    return p


def measurement_operators(p: Protocol) -> EffectiveMeasurement:
    """Projectors L_j = X_j^dag X_j for every protocol row."""
    ops = np.einsum("ja,jb->jab", p.rows.conj(), p.rows)
    return EffectiveMeasurement(ops, p.weights.copy(), p.n, label=p.label)


def event_probabilities(meas: EffectiveMeasurement, state) -> np.ndarray:
    """Event probabilities Tr(L_j rho) (or c^dag L_j c for a pure state)."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        if state.size != meas.dim:
            raise ValueError(f"state dim {state.size} != operator dim {meas.dim}")
        lam = np.einsum("a,jab,b->j", state.conj(), meas.operators, state)
    elif state.ndim == 2:
        if state.shape != (meas.dim, meas.dim):
            raise ValueError("density matrix shape mismatch")
        lam = np.einsum("jab,ba->j", meas.operators, state)
    else:
        raise ValueError("state must be a vector or a density matrix")
    return lam.real


def rotation_unitary(axis, angle: float) -> np.ndarray:
    """SU(2) rotation exp(-i angle (axis.sigma)/2) about a unit Bloch axis."""
    ax, ay, az = check_unit_bloch(axis)
    half = angle / 2.0
    n_sigma = np.array([[az, ax - 1j * ay], [ax + 1j * ay, -az]], dtype=complex)
    return np.cos(half) * np.eye(2) - 1j * np.sin(half) * n_sigma


def rotate_protocol(p: Protocol, axis, angle: float) -> Protocol:
    """Rotate every measurement direction by right-hand rule about ``axis``.

    Rows map as X_j -> X_j U^dag, so projectors transform as U L_j U^dag.
    Works on tensor-product protocols by rotating every qubit identically.
    """
    u = rotation_unitary(axis, angle)
    qubits = int(round(np.log2(p.dim)))
    if 2 ** qubits != p.dim:
        raise ValueError("protocol dimension is not a power of 2")
    u_full = u
    for _ in range(qubits - 1):
        u_full = np.kron(u_full, u)
    rows = p.rows @ u_full.conj().T
    return Protocol(rows, p.weights.copy(), p.n, label=f"{p.label}-rotated")


def tensor_protocol(p: Protocol, qubits: int,
                    max_qubits: int = MAX_QUBITS_DEFAULT) -> Protocol:
    """q-fold tensor-power protocol: all row combinations, first factor slowest."""
    if qubits < 1:
        raise ValueError("qubit count must be >= 1")
    if qubits > max_qubits:
        raise ValueError(
            f"{qubits} qubits exceeds the resource limit of {max_qubits}; "
            "raise max_qubits explicitly if you mean it"
        )
    if qubits == 1:
        return p
    rows = p.rows
    for _ in range(qubits - 1):
        rows = np.einsum("ia,jb->ijab", rows, p.rows).reshape(
            rows.shape[0] * p.m, rows.shape[1] * p.dim
        )
    weights = np.full(rows.shape[0], p.n * (2.0 / p.m) ** qubits)
    return Protocol(rows, weights, p.n, label=f"{p.label}^{qubits}")
