"""Kraus-operator decoherence channels and fuzzy measurement operators.

A trace-preserving channel rho -> sum_k E_k rho E_k^dag folded into a
measurement replaces each event operator by sum_k E_k^dag L_j E_k, which
turns a clear (projective) measurement into a fuzzy one while preserving
the decomposition of unity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import I2, SIGMA_X, SIGMA_Z, check_unit_bloch
from .protocols import EffectiveMeasurement

TRACE_PRESERVING_ATOL = 1e-12
ZERO_KRAUS_NORM = 1e-15

CHANNEL_KINDS = (
    "identity",
    "amplitude_relaxation",
    "pure_dephasing",
    "bit_flip",
    "phase_flip",
)


@dataclass(frozen=True)
class QuantumChannel:
    """Trace-preserving channel in operator-sum form."""

    kraus: tuple
    label: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        ops = tuple(np.asarray(e, dtype=complex) for e in self.kraus)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for e in ops:
            if e.shape != (dim, dim):
                raise ValueError("Kraus operators must share a square shape")
        # drop numerically zero operators before the trace check
        ops = tuple(e for e in ops if np.linalg.norm(e) > ZERO_KRAUS_NORM)
        total = sum(e.conj().T @ e for e in ops)
        dev = np.max(np.abs(total - np.eye(dim)))
        if dev > TRACE_PRESERVING_ATOL:
            raise ValueError(f"channel is not trace-preserving (dev {dev:.3e})")
        object.__setattr__(self, "kraus", ops)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Output density matrix sum_k E_k rho E_k^dag."""
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros_like(rho)
        for e in self.kraus:
            out += e @ rho @ e.conj().T
        return out


def identity_channel(dim: int = 2) -> QuantumChannel:
    return QuantumChannel((np.eye(dim, dtype=complex),), label="identity")


def amplitude_relaxation(t: float, T1: float = 1.0) -> QuantumChannel:
    """Energy decay toward |1><1|-complement with gamma = 1 - exp(-t/T1)."""
    if t < 0 or T1 <= 0:
        raise ValueError("need t >= 0 and T1 > 0")
    gamma = 1.0 - np.exp(-t / T1)
    e0 = np.array([[1, 0], [0, np.sqrt(1.0 - gamma)]], dtype=complex)
    e1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return QuantumChannel((e0, e1), label="amplitude_relaxation",
                          params={"t": t, "T1": T1})


def pure_dephasing(t: float, T2pure: float = 1.0) -> QuantumChannel:
    """Phase relaxation; equivalent to phase-flip with 1-2p = exp(-t/T2pure)."""
    if t < 0 or T2pure <= 0:
        raise ValueError("need t >= 0 and T2pure > 0")
    p = 0.5 * (1.0 - np.exp(-t / T2pure))
    ch = _flip_channel(SIGMA_Z, p)
    return QuantumChannel(ch, label="pure_dephasing",
                          params={"t": t, "T2pure": T2pure})


def bit_flip(p: float) -> QuantumChannel:
    if not 0.0 <= p <= 0.5:
        raise ValueError("flip probability must lie in [0, 1/2]")
    return QuantumChannel(_flip_channel(SIGMA_X, p), label="bit_flip",
                          params={"p": p})


def phase_flip(p: float) -> QuantumChannel:
    if not 0.0 <= p <= 0.5:
        raise ValueError("flip probability must lie in [0, 1/2]")
    return QuantumChannel(_flip_channel(SIGMA_Z, p), label="phase_flip",
                          params={"p": p})


def _flip_channel(pauli: np.ndarray, p: float) -> tuple:
    return (np.sqrt(1.0 - p) * I2, np.sqrt(p) * pauli)


_FACTORIES = {
    "identity": lambda **kw: identity_channel(),
    "amplitude_relaxation": lambda t, T1=1.0, **kw: amplitude_relaxation(t, T1),
    "pure_dephasing": lambda t, T2pure=1.0, **kw: pure_dephasing(t, T2pure),
    "bit_flip": lambda p, **kw: bit_flip(p),
    "phase_flip": lambda p, **kw: phase_flip(p),
}


def make_channel(kind: str, **params) -> QuantumChannel:
    """Build a named single-qubit channel from its parameters."""
    if kind not in _FACTORIES:
        raise ValueError(f"unknown channel kind {kind!r}; "
                         f"choose from {CHANNEL_KINDS}")
    return _FACTORIES[kind](**params)


def channel_from_config(spec: dict) -> QuantumChannel:
    """Channel from a config mapping.

    Durations come in as dimensionless ratios, e.g.
    {"kind": "amplitude_relaxation", "t_over_T1": 0.8} or
    {"kind": "pure_dephasing", "t_over_T2pure": 0.5}; flip errors use
    {"kind": "bit_flip", "p": 0.1}.  Raw Kraus input:
    {"kind": "kraus", "operators": [[[re, im], ...], ...]}.
    """
    if "kind" not in spec:
        raise ValueError("channel spec needs a 'kind' field")
    kind = spec["kind"]
    if kind == "kraus":
        ops = [
            np.array([[complex(re, im) for re, im in row] for row in mat])
            for mat in spec["operators"]
        ]
        return QuantumChannel(tuple(ops), label="kraus")
    if kind == "identity":
        return identity_channel()
    if kind == "amplitude_relaxation":
        return amplitude_relaxation(float(spec["t_over_T1"]), 1.0)
    if kind == "pure_dephasing":
        return pure_dephasing(float(spec["t_over_T2pure"]), 1.0)
    if kind in ("bit_flip", "phase_flip"):
        return make_channel(kind, p=float(spec["p"]))
    raise ValueError(f"unknown channel kind {kind!r}")


def fold_channel(meas: EffectiveMeasurement,
                 ch: QuantumChannel) -> EffectiveMeasurement:
    """Fuzzy measurement with operators sum_k E_k^dag L_j E_k, weights kept."""
    if meas.dim != ch.dim:
        raise ValueError(f"dimension mismatch: measurement {meas.dim}, "
                         f"channel {ch.dim}")
    ops = np.zeros_like(meas.operators)
    for e in ch.kraus:
        ops += np.einsum("ba,jbc,cd->jad", e.conj(), meas.operators, e)
    return EffectiveMeasurement(ops, meas.weights.copy(), meas.n,
                                label=f"{meas.label}|{ch.label}")


def closed_form_operator(r, kind: str, **params) -> np.ndarray:
    """Fuzzy single-qubit operator for the projector along ``r``, in closed form.

    Independent of the Kraus route: these are the explicit 2x2 matrices for
    each decoherence mechanism, used as the oracle for fold_channel.
    """
    rx, ry, rz = check_unit_bloch(r)
    if kind == "identity":
        return 0.5 * np.array([[1 + rz, rx + 1j * ry],
                               [rx - 1j * ry, 1 - rz]], dtype=complex)
    if kind == "amplitude_relaxation":
        t, T1 = float(params["t"]), float(params.get("T1", 1.0))
        if t < 0 or T1 <= 0:
            raise ValueError("need t >= 0 and T1 > 0")
        off = (rx + 1j * ry) * np.exp(-t / (2.0 * T1))
        return 0.5 * np.array(
            [[1 + rz, off],
             [off.conjugate(), 1 - rz * (2.0 * np.exp(-t / T1) - 1.0)]],
            dtype=complex,
        )
    if kind == "pure_dephasing":
        t, T2 = float(params["t"]), float(params.get("T2pure", 1.0))
        if t < 0 or T2 <= 0:
            raise ValueError("need t >= 0 and T2pure > 0")
        off = (rx + 1j * ry) * np.exp(-t / T2)
        return 0.5 * np.array([[1 + rz, off], [off.conjugate(), 1 - rz]],
                              dtype=complex)
    if kind == "bit_flip":
        p = float(params["p"])
        if not 0.0 <= p <= 0.5:
            raise ValueError("flip probability must lie in [0, 1/2]")
        q = 1.0 - 2.0 * p
        off = rx + 1j * ry * q
        return 0.5 * np.array([[1 + rz * q, off], [off.conjugate(), 1 - rz * q]],
                              dtype=complex)
    if kind == "phase_flip":
        p = float(params["p"])
        if not 0.0 <= p <= 0.5:
            raise ValueError("flip probability must lie in [0, 1/2]")
        off = (rx + 1j * ry) * (1.0 - 2.0 * p)
        return 0.5 * np.array([[1 + rz, off], [off.conjugate(), 1 - rz]],
                              dtype=complex)
    raise ValueError(f"unknown channel kind {kind!r}")


def tensor_channel(channels, max_qubits: int = 4) -> QuantumChannel:
    """Non-entangling product channel: all Kronecker products of Kraus sets."""
    channels = list(channels)
    if not channels:
        raise ValueError("need at least one channel")
    if len(channels) > max_qubits:
        raise ValueError(f"{len(channels)} qubits exceeds the resource limit "
                         f"of {max_qubits}")
    kraus = channels[0].kraus
    for ch in channels[1:]:
        kraus = tuple(np.kron(a, b) for a in kraus for b in ch.kraus)
    label = "x".join(ch.label for ch in channels)
    return QuantumChannel(kraus, label=label)
