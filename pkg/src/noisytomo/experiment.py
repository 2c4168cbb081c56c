"""Config-driven Monte Carlo tomography experiments.

A run folds the channel into the measurement, draws multinomial counts
from the pre-channel truth through the fuzzy operators, reconstructs, and
compares the empirical fidelity-loss distribution with the generalized
chi-squared theory.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import ks_2samp

from . import channels as ch
from . import protocols as pr
from .core import as_state, bloch_to_state, fidelity
from .estimation import CountVector, reconstruct, sample_counts, trial_rng
from .information import (bloch_grid, information_matrix, loss_moments,
                          loss_spectrum, sample_loss_distribution,
                          scaled_loss, chi2_statistic)

THEORY_SAMPLES = 100_000

STATE_PRESETS = {
    "zero": [1, 0],
    "one": [0, 1],
    "plus": [1 / np.sqrt(2), 1 / np.sqrt(2)],
    "minus": [1 / np.sqrt(2), -1 / np.sqrt(2)],
    "plus_i": [1 / np.sqrt(2), 1j / np.sqrt(2)],
    "minus_i": [1 / np.sqrt(2), -1j / np.sqrt(2)],
    # (|00> + i|01> + |11>)/sqrt(3)
    "entangled2q": [1 / np.sqrt(3), 1j / np.sqrt(3), 0, 1 / np.sqrt(3)],
}


class ConfigError(ValueError):
    """Malformed experiment configuration; message carries the field path."""


@dataclass(frozen=True)
class ExperimentConfig:
    protocol_kind: str
    n: int
    trials: int
    master_seed: int
    qubits: int = 1
    rotation: tuple | None = None        # (axis ndarray, angle)
    channel_specs: tuple = ()            # one spec dict per qubit
    state: np.ndarray | str = "plus_i"
    output_dir: str = "."
    exact_probabilities: bool = False

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        try:
            proto = doc["protocol"]
            kind = proto["kind"]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"protocol.kind: missing ({exc})") from exc
        if kind not in pr.PROTOCOL_KINDS:
            raise ConfigError(f"protocol.kind: unknown kind {kind!r}")
        qubits = int(proto.get("qubits", 1))
        if qubits < 1:
            raise ConfigError("protocol.qubits: must be >= 1")
        rotation = None
        if "rotation" in proto and proto["rotation"] is not None:
            rot = proto["rotation"]
            try:
                axis = np.asarray(rot["axis"], dtype=float)
                angle = float(rot["angle"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"protocol.rotation: {exc}") from exc
            rotation = (axis, angle)
        chan = doc.get("channel", {"kind": "identity"})
        specs = tuple(chan) if isinstance(chan, list) else (chan,) * qubits
        if len(specs) != qubits:
            raise ConfigError("channel: need one spec per qubit")
        for i, spec in enumerate(specs):
            try:
                ch.channel_from_config(spec)
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"channel[{i}]: {exc}") from exc
        state = doc.get("state", "plus_i")
        if not isinstance(state, str):
            try:
                vec = np.array([complex(re, im) for re, im in state])
                nrm = np.linalg.norm(vec)
                if nrm == 0:
                    raise ValueError("state vector has zero norm")
                state = as_state(vec / nrm)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"state: {exc}") from exc
        elif state != "worst" and state not in STATE_PRESETS:
            raise ConfigError(f"state: unknown preset {state!r}")
        try:
            n = int(doc["n"])
            trials = int(doc.get("trials", 1))
            seed = int(doc.get("seed", 0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"n/trials/seed: {exc}") from exc
        if n < 1 or trials < 1:
            raise ConfigError("n and trials must be >= 1")
        return ExperimentConfig(
            protocol_kind=kind, n=n, trials=trials, master_seed=seed,
            qubits=qubits, rotation=rotation, channel_specs=specs,
            state=state, output_dir=doc.get("output_dir", "."),
            exact_probabilities=bool(doc.get("exact_probabilities", False)),
        )

    @staticmethod
    def from_file(path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
        return ExperimentConfig.from_dict(doc)


def build_measurement(cfg: ExperimentConfig):
    """(protocol, channel, clear measurement, fuzzy measurement) for a config."""
    p = pr.build_protocol(cfg.protocol_kind, float(cfg.n))
    if cfg.qubits > 1:
        p = pr.tensor_protocol(p, cfg.qubits)
    if cfg.rotation is not None:
        p = pr.rotate_protocol(p, cfg.rotation[0], cfg.rotation[1])
    chans = [ch.channel_from_config(spec) for spec in cfg.channel_specs]
    channel = chans[0] if len(chans) == 1 else ch.tensor_channel(chans)
    clear = pr.measurement_operators(p)
    fuzzy = ch.fold_channel(clear, channel)
    return p, channel, clear, fuzzy


def resolve_state(cfg: ExperimentConfig, fuzzy) -> np.ndarray:
    if isinstance(cfg.state, np.ndarray):
        return cfg.state
    if cfg.state == "worst":
        if fuzzy.dim != 2:
            raise ConfigError("state 'worst' is only defined for one qubit")
        best, best_l = None, -np.inf
        from .information import state_loss
        for theta, phi in bloch_grid():
            c = bloch_to_state(theta, phi)
            l = state_loss(c, fuzzy)
            if l > best_l:
                best, best_l = c, l
        return best
    vec = np.asarray(STATE_PRESETS[cfg.state], dtype=complex)
    if vec.size != fuzzy.dim:
        raise ConfigError(
            f"state preset {cfg.state!r} has dimension {vec.size}, "
            f"protocol needs {fuzzy.dim}"
        )
    return as_state(vec)


@dataclass(frozen=True)
class TrialRecord:
    fidelity: float
    loss: float
    chi2: float
    converged: bool
    iterations: int
    error: str = ""


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    truth: np.ndarray
    spectrum_d: np.ndarray
    nu: int
    nu_h: int
    scaled_loss: float
    theory_mean: float
    theory_var: float
    trials: tuple = ()
    theory_samples: np.ndarray | None = None

    @property
    def losses(self) -> np.ndarray:
        return np.array([t.loss for t in self.trials if not t.error])

    def summary(self) -> dict:
        losses = self.losses
        chi2 = np.array([t.chi2 for t in self.trials if not t.error])
        out = {
            "trials": len(self.trials),
            "failed_trials": sum(1 for t in self.trials if t.error),
            "empirical_mean_loss": float(losses.mean()) if losses.size else None,
            "empirical_var_loss": float(losses.var(ddof=1)) if losses.size > 1 else None,
            "empirical_mean_chi2": float(chi2.mean()) if chi2.size else None,
            "theory_mean_loss": self.theory_mean,
            "theory_var_loss": self.theory_var,
            "scaled_loss_L": self.scaled_loss,
            "nu": self.nu,
            "nu_H": self.nu_h,
        }
        if losses.size and self.theory_samples is not None:
            out["ks_distance"] = float(
                ks_2samp(losses, self.theory_samples).statistic
            )
        return out

    def to_json(self) -> str:
        payload = {
            "truth": [[z.real, z.imag] for z in self.truth],
            "spectrum_d": self.spectrum_d.tolist(),
            "summary": self.summary(),
            "per_trial": [
                {
                    "fidelity": t.fidelity,
                    "loss": t.loss,
                    "chi2": t.chi2,
                    "converged": t.converged,
                    "iterations": t.iterations,
                    "error": t.error,
                }
                for t in self.trials
            ],
        }
        return json.dumps(payload, indent=2)

    def trials_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["trial", "fidelity", "loss", "chi2", "converged",
                    "iterations", "error"])
        for i, t in enumerate(self.trials):
            w.writerow([i, repr(t.fidelity), repr(t.loss), repr(t.chi2),
                        int(t.converged), t.iterations, t.error])
        return buf.getvalue()


def _exact_counts(meas, state) -> CountVector:
    """Deterministic diagnostic counts: expectations rounded to integers that
    still sum to n (largest-remainder rounding)."""
    lam = pr.event_probabilities(meas, state)
    expect = meas.weights * lam
    n = int(round(meas.n))
    floor = np.floor(expect).astype(np.int64)
    short = n - int(floor.sum())
    order = np.argsort(expect - floor)[::-1]
    counts = floor.copy()
    counts[order[:short]] += 1
    return CountVector(counts, n)


def _run_trial(index, cfg, fuzzy, truth, info):
    try:
        if cfg.exact_probabilities:
            cv = _exact_counts(fuzzy, truth)
        else:
            cv = sample_counts(fuzzy, truth, trial_rng(cfg.master_seed, index))
        res = reconstruct(cv, fuzzy)
        f = fidelity(res.estimate, truth)
        return TrialRecord(
            fidelity=f, loss=1.0 - f,
            chi2=chi2_statistic(truth, res.estimate, info),
            converged=res.converged, iterations=res.iterations,
        )
    except (ValueError, np.linalg.LinAlgError) as exc:
        return TrialRecord(np.nan, np.nan, np.nan, False, 0, error=str(exc))


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("NOISY_TOMO_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig,
                   threads: int | None = None) -> ExperimentResult:
    """Monte Carlo reconstruction experiment; deterministic for fixed seed."""
    _, _, _, fuzzy = build_measurement(cfg)
    truth = resolve_state(cfg, fuzzy)
    info = information_matrix(truth, fuzzy)
    spec = loss_spectrum(info)
    mean, var = loss_moments(spec)
    threads = default_threads() if threads is None else max(1, threads)

    if threads == 1:
        records = [_run_trial(i, cfg, fuzzy, truth, info)
                   for i in range(cfg.trials)]
    else:
        records = Parallel(n_jobs=threads, prefer="threads")(
            delayed(_run_trial)(i, cfg, fuzzy, truth, info)
            for i in range(cfg.trials)
        )

    theory = sample_loss_distribution(
        spec, THEORY_SAMPLES, trial_rng(cfg.master_seed, cfg.trials)
    )
    return ExperimentResult(
        config=cfg, truth=truth, spectrum_d=spec.d, nu=spec.nu,
        nu_h=2 * fuzzy.dim - 1, scaled_loss=scaled_loss(spec),
        theory_mean=mean, theory_var=var,
        trials=tuple(records), theory_samples=theory,
    )
