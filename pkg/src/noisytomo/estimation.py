"""Count sampling and maximum-likelihood pure-state reconstruction.

Counts follow a multinomial over the m protocol rows with cell
probabilities t_j lambda_j / n.  The estimator iterates the likelihood
equation R(c) c = c with R(c) = (1/n) sum_j (k_j / lambda_j) L_j,
using a damped fixed-point step that never decreases the likelihood.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .core import fidelity, phase_align
from .protocols import EffectiveMeasurement, event_probabilities

PROB_FLOOR = 1e-12
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
DEFAULT_ALPHA = 0.5


@dataclass(frozen=True)
class CountVector:
    """Observed event counts for one tomography run."""

    counts: np.ndarray  # (m,) non-negative ints
    n: int
    seed: int | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).ravel()
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if counts.sum() != self.n:
            raise ValueError(f"counts sum {counts.sum()} != n {self.n}")
        object.__setattr__(self, "counts", counts)

    def to_csv(self, weights=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["row", "count", "weight"])
        weights = np.ones(self.counts.size) if weights is None else weights
        for j, (k, t) in enumerate(zip(self.counts, weights)):
            w.writerow([j, int(k), repr(float(t))])
        return buf.getvalue()


@dataclass(frozen=True)
class ReconstructionResult:
    estimate: np.ndarray
    iterations: int
    converged: bool
    final_residual: float
    log_likelihood: float
    regularized_cells: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "estimate": [[z.real, z.imag] for z in self.estimate],
                "iterations": self.iterations,
                "converged": self.converged,
                "final_residual": self.final_residual,
                "log_likelihood": self.log_likelihood,
                "regularized_cells": self.regularized_cells,
            },
            indent=2,
        )


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent, reproducible per-trial generator."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=(master_seed, trial_index))
    )


def sample_counts(meas: EffectiveMeasurement, state, seed) -> CountVector:
    """Multinomial counts k ~ Mult(n; t_j lambda_j / n) for a pure state."""
    lam = event_probabilities(meas, state)
    probs = meas.weights * lam / meas.n
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(
            f"cell probabilities sum to {total}, not 1: broken unity decomposition"
        )
    n = int(round(meas.n))
    if n <= 0 or abs(n - meas.n) > 1e-9:
        raise ValueError("sample size n must be a positive integer")
    if isinstance(seed, np.random.Generator):
        rng, seed_val = seed, None
    else:
        rng, seed_val = np.random.default_rng(seed), seed
    probs = np.clip(probs, 0.0, None)
    counts = rng.multinomial(n, probs / probs.sum())
    return CountVector(counts, n, seed=seed_val)


def log_likelihood(c, counts: CountVector, meas: EffectiveMeasurement,
                   floor: float = PROB_FLOOR) -> float:
    """sum_j k_j ln lambda_j(c), with a probability floor inside the log."""
    lam = event_probabilities(meas, c)
    lam = np.maximum(lam, floor)
    k = counts.counts
    mask = k > 0
    return float(np.sum(k[mask] * np.log(lam[mask])))


def _initial_state(counts: CountVector, meas: EffectiveMeasurement) -> np.ndarray:
    """Dominant eigenvector of B = sum_j (k_j/n) L_j, with deterministic
    tie-breaking when the top eigenvalue is degenerate."""
    b = np.einsum("j,jab->ab", counts.counts / counts.n, meas.operators)
    b = 0.5 * (b + b.conj().T)
    vals, vecs = np.linalg.eigh(b)
    top = vals[-1]
    c = vecs[:, -1]
    if vals.size > 1 and top - vals[-2] < 1e-12:
        c = c + 1e-8 * vecs[:, -2]
    return c / np.linalg.norm(c)


def reconstruct(counts: CountVector, meas: EffectiveMeasurement,
                alpha: float = DEFAULT_ALPHA, tol: float = DEFAULT_TOL,
                max_iter: int = DEFAULT_MAX_ITER,
                floor: float = PROB_FLOOR) -> ReconstructionResult:
    """Maximum-likelihood pure-state estimate from counts.

    Damped fixed-point iteration on the likelihood equation; each accepted
    step does not decrease the log-likelihood (step size is halved until
    that holds).
    """
    ops = meas.operators
    k = counts.counts.astype(float)
    n = meas.n

    c = _initial_state(counts, meas)
    ll = log_likelihood(c, counts, meas, floor)
    regularized = 0
    converged = False
    iterations = 0
    residual = np.inf

    for iterations in range(1, max_iter + 1):
        lam = np.einsum("a,jab,b->j", c.conj(), ops, c).real
        low = lam < floor
        if np.any(low & (k > 0)):
            regularized = int(np.count_nonzero(low & (k > 0)))
        lam = np.maximum(lam, floor)
        r_mat = np.einsum("j,jab->ab", k / lam / n, ops)
        rc = r_mat @ c
        residual = float(np.linalg.norm(rc - c))

        step = alpha
        while True:
            c_new = (1.0 - step) * c + step * rc
            c_new = c_new / np.linalg.norm(c_new)
            ll_new = log_likelihood(c_new, counts, meas, floor)
            if ll_new >= ll or step < 1e-8:
                break
            step *= 0.5

        diff = float(np.linalg.norm(phase_align(c, c_new) - c))
        c, ll = c_new, ll_new
        if diff < tol:
            converged = True
            break

    lam = np.maximum(
        np.einsum("a,jab,b->j", c.conj(), ops, c).real, floor
    )
    rc = np.einsum("j,jab->ab", k / lam / n, ops) @ c
    residual = float(np.linalg.norm(rc - c))
    return ReconstructionResult(
        estimate=c,
        iterations=iterations,
        converged=converged,
        final_residual=residual,
        log_likelihood=ll,
        regularized_cells=regularized,
    )


class StateTomographyMLE:
    """Estimator wrapper around :func:`reconstruct` with a fit interface.

    Parameters mirror the functional API; after ``fit(counts)`` the result
    lives in ``state_``, ``n_iter_``, ``converged_``, ``residual_`` and
    ``log_likelihood_``.
    """

    def __init__(self, measurement: EffectiveMeasurement,
                 alpha: float = DEFAULT_ALPHA, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER, floor: float = PROB_FLOOR):
        self.measurement = measurement
        self.alpha = alpha
        self.tol = tol
        self.max_iter = max_iter
        self.floor = floor

    def get_params(self, deep: bool = True) -> dict:
        return {
            "measurement": self.measurement,
            "alpha": self.alpha,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "floor": self.floor,
        }

    def set_params(self, **params) -> "StateTomographyMLE":
        for key, value in params.items():
            if not hasattr(self, key):
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(self, counts, y=None) -> "StateTomographyMLE":
        if not isinstance(counts, CountVector):
            counts = CountVector(np.asarray(counts),
                                 int(np.asarray(counts).sum()))
        res = reconstruct(counts, self.measurement, alpha=self.alpha,
                          tol=self.tol, max_iter=self.max_iter,
                          floor=self.floor)
        self.state_ = res.estimate
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        self.residual_ = res.final_residual
        self.log_likelihood_ = res.log_likelihood
        self.result_ = res
        return self

    def score(self, truth) -> float:
        """Fidelity of the fitted state against a reference state."""
        if not hasattr(self, "state_"):
            raise RuntimeError("estimator is not fitted")
        return fidelity(self.state_, truth)
