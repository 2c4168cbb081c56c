"""Cross-module consistency checks runnable from the CLI.

Each check pairs an implementation with an independent route: Kraus folding
against the closed-form fuzzy operators, protocol construction against the
decomposition of unity, and the information matrix against its exact
normalization identity.
"""

from __future__ import annotations

import numpy as np

from . import channels as ch
from . import protocols as pr
from .core import bloch_to_projector, bloch_to_state
from .information import information_matrix


def _random_unit(rng) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def _random_state(rng, dim=2) -> np.ndarray:
    c = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return c / np.linalg.norm(c)


def _random_channel(rng):
    kind = rng.choice(["amplitude_relaxation", "pure_dephasing",
                       "bit_flip", "phase_flip"])
    if kind == "amplitude_relaxation":
        params = {"t": float(rng.uniform(0, 3.0))}
    elif kind == "pure_dephasing":
        params = {"t": float(rng.uniform(0, 3.0))}
    else:
        params = {"p": float(rng.uniform(0, 0.5))}
    return kind, params


def check_kraus_vs_closed_form(draws: int = 500, seed: int = 11,
                               tol: float = 1e-12):
    """Folded projectors equal the closed-form fuzzy matrices entrywise."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        r = _random_unit(rng)
        kind, params = _random_channel(rng)
        proj = bloch_to_projector(r)
        meas = pr.EffectiveMeasurement(proj[None, :, :], np.array([1.0]), 1.0)
        folded = ch.fold_channel(meas, ch.make_channel(kind, **params))
        direct = ch.closed_form_operator(r, kind, **params)
        worst = max(worst, float(np.max(np.abs(folded.operators[0] - direct))))
    return worst <= tol, f"max entrywise deviation {worst:.3e} (tol {tol:g})"


def check_unity_decomposition(seed: int = 12, tol: float = 1e-10):
    """sum_j t_j L_j = n I survives folding and rotation for all built-ins."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for kind in pr.PROTOCOL_KINDS:
        p = pr.build_protocol(kind, n=100.0)
        p_rot = pr.rotate_protocol(p, _random_unit(rng), rng.uniform(0, 2 * np.pi))
        for proto in (p, p_rot):
            meas = pr.measurement_operators(proto)
            for _ in range(4):
                ck, params = _random_channel(rng)
                folded = ch.fold_channel(meas, ch.make_channel(ck, **params))
                worst = max(worst, folded.unity_residual() / proto.n)
    return worst <= tol, f"max relative unity residual {worst:.3e} (tol {tol:g})"


def check_normalization_identity(seed: int = 13, tol: float = 1e-6):
    """<c~|H|c~> = 2n for random states, protocols and channels."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for kind in pr.PROTOCOL_KINDS:
        meas0 = pr.measurement_operators(pr.build_protocol(kind, n=4000.0))
        for _ in range(20):
            ck, params = _random_channel(rng)
            meas = ch.fold_channel(meas0, ch.make_channel(ck, **params))
            c = _random_state(rng)
            info = information_matrix(c, meas)
            from .core import realify_state
            val = realify_state(c) @ info.matrix @ realify_state(c)
            worst = max(worst, abs(val - 2.0 * meas.n) / meas.n)
    return worst <= tol, f"max |<c|H|c> - 2n|/n = {worst:.3e} (tol {tol:g})"


CHECKS = [
    ("kraus-vs-closed-form", check_kraus_vs_closed_form),
    ("unity-decomposition", check_unity_decomposition),
    ("information-normalization", check_normalization_identity),
]


def run_all():
    """Run every check; returns [(name, passed, detail)]."""
    results = []
    for name, fn in CHECKS:
        ok, detail = fn()
        results.append((name, ok, detail))
    return results
