"""Information-matrix accuracy theory for pure-state tomography.

The complete information matrix H = 2 sum_j (t_j/lambda_j) (L~_j c~)(L~_j c~)^T
lives in the doubled-real representation.  Its eigenvalues, after dropping
the global-phase zero and the normalization maximum, give the principal
fluctuation variances d_j = 1/(2 S_j); the fidelity loss 1-F is then the
generalized chi-squared variable sum_j d_j xi_j^2.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .channels import QuantumChannel, fold_channel
from .core import bloch_to_state, phase_align, realify_state
from .protocols import (EffectiveMeasurement, Protocol, event_probabilities,
                        measurement_operators)

LAMBDA_SKIP = 1e-12
ZERO_EIG_RTOL = 1e-8

DEFAULT_GRID = (61, 120)


@dataclass(frozen=True)
class InformationMatrix:
    matrix: np.ndarray  # (2s, 2s) real symmetric
    n: float
    dim: int
    skipped_rows: int = 0


@dataclass(frozen=True)
class LossSpectrum:
    """Principal-component variances, descending; nu = 2s - 2 entries."""

    d: np.ndarray
    excluded_zero: float
    excluded_max: float
    n: float

    @property
    def nu(self) -> int:
        return self.d.size


def information_matrix(c, meas: EffectiveMeasurement) -> InformationMatrix:
    """Complete information matrix at the state ``c``.

    Rows with event probability below 1e-12 carry unbounded weight and are
    skipped; the count of skipped rows is reported on the result.
    """
    c = np.asarray(c, dtype=complex).ravel()
    if c.size != meas.dim:
        raise ValueError(f"state dim {c.size} != operator dim {meas.dim}")
    lam = event_probabilities(meas, c)
    keep = lam > LAMBDA_SKIP
    skipped = int(np.count_nonzero(~keep))
    if not np.any(keep):
        raise ValueError("all rows skipped: degenerate state/protocol pairing")
    w = np.einsum("jab,b->ja", meas.operators[keep], c)
    v = np.concatenate([w.real, w.imag], axis=1)  # rows are L~_j c~
    h = 2.0 * np.einsum("j,ja,jb->ab", meas.weights[keep] / lam[keep], v, v)
    h = 0.5 * (h + h.T)
    return InformationMatrix(h, meas.n, meas.dim, skipped)


def loss_spectrum(info: InformationMatrix) -> LossSpectrum:
    """Variances d_j = 1/(2 S_j) after excluding the zero and the maximal
    eigenvalue of H."""
    vals = np.linalg.eigvalsh(info.matrix)
    zero_tol = ZERO_EIG_RTOL * info.n
    if np.count_nonzero(vals < zero_tol) > 1:
        raise ValueError(
            "more than one near-zero eigenvalue: measurement is "
            "tomographically incomplete at this state"
        )
    retained = vals[1:-1]
    d = np.sort(0.5 / retained)[::-1]
    return LossSpectrum(d, excluded_zero=float(vals[0]),
                        excluded_max=float(vals[-1]), n=info.n)


def loss_moments(spec: LossSpectrum) -> tuple[float, float]:
    """Mean sum d_j and variance 2 sum d_j^2 of the fidelity loss."""
    d = spec.d
    return float(d.sum()), float(2.0 * np.sum(d ** 2))


def scaled_loss(spec: LossSpectrum, n: float | None = None) -> float:
    """Sample-size-independent loss measure L = n <1-F>."""
    n = spec.n if n is None else n
    return float(n * spec.d.sum())


def sample_loss_distribution(spec: LossSpectrum, count: int,
                             seed=None) -> np.ndarray:
    """Monte Carlo samples of 1-F = sum_j d_j xi_j^2, xi_j ~ N(0,1)."""
    if count < 1:
        raise ValueError("sample count must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    xi = rng.standard_normal((count, spec.nu))
    return (xi ** 2) @ spec.d


def chi2_statistic(truth, estimate, info: InformationMatrix) -> float:
    """Statistic 2 <dc~|H|dc~>, asymptotically chi2(2s-1).

    The estimate is phase-aligned to the truth before differencing.
    """
    truth = np.asarray(truth, dtype=complex).ravel()
    estimate = np.asarray(estimate, dtype=complex).ravel()
    if truth.size != estimate.size:
        raise ValueError("dimension mismatch")
    aligned = phase_align(truth, estimate)
    dc = realify_state(aligned) - realify_state(truth)
    return float(2.0 * dc @ info.matrix @ dc)


def state_loss(c, meas: EffectiveMeasurement) -> float:
    """Scaled loss L for one state under one effective measurement."""
    return scaled_loss(loss_spectrum(information_matrix(c, meas)))


@dataclass(frozen=True)
class BlochMap:
    """Scaled loss L sampled on a (theta, phi) grid of pure qubit states."""

    points: np.ndarray  # (k, 3) columns theta, phi, L
    protocol_label: str
    channel_label: str

    @property
    def l_min(self) -> float:
        return float(self.points[:, 2].min())

    @property
    def l_max(self) -> float:
        return float(self.points[:, 2].max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["theta", "phi", "L"])
        for theta, phi, l in self.points:
            w.writerow([repr(theta), repr(phi), repr(l)])
        return buf.getvalue()


def bloch_grid(resolution=DEFAULT_GRID) -> np.ndarray:
    """(theta, phi) pairs covering the sphere, poles included once."""
    n_theta, n_phi = resolution
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    pts = []
    for theta in thetas:
        if theta < 1e-15 or abs(theta - np.pi) < 1e-15:
            pts.append((theta, 0.0))
        else:
            pts.extend((theta, phi) for phi in phis)
    return np.array(pts)


def bloch_loss_map(protocol: Protocol, channel: QuantumChannel | None = None,
                   resolution=DEFAULT_GRID) -> BlochMap:
    """Evaluate L over the Bloch sphere for a single-qubit protocol."""
    if protocol.dim != 2:
        raise ValueError("Bloch maps are defined for single-qubit protocols")
    meas = measurement_operators(protocol)
    ch_label = "identity"
    if channel is not None:
        meas = fold_channel(meas, channel)
        ch_label = channel.label
    grid = bloch_grid(resolution)
    rows = np.empty((grid.shape[0], 3))
    for i, (theta, phi) in enumerate(grid):
        c = bloch_to_state(theta, phi)
        rows[i] = (theta, phi, state_loss(c, meas))
    return BlochMap(rows, protocol.label, ch_label)
