"""Command-line front end.

Subcommands: protocol, simulate, blochmap, theory, selfcheck.  Exit codes:
0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import channels as ch
from . import protocols as pr
from .experiment import (ConfigError, ExperimentConfig, build_measurement,
                         default_threads, resolve_state, run_experiment)
from .information import (bloch_loss_map, information_matrix, loss_moments,
                          loss_spectrum, scaled_loss)
from .svgfig import bloch_heatmap_svg, loss_histogram_svg

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _parse_rotation(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigError("--rotate expects ax,ay,az,angle")
    try:
        vals = [float(v) for v in parts]
    except ValueError as exc:
        raise ConfigError(f"--rotate: {exc}") from exc
    axis = np.array(vals[:3])
    nrm = np.linalg.norm(axis)
    if nrm == 0:
        raise ConfigError("--rotate: zero axis")
    return axis / nrm, vals[3]


def _parse_channel_spec(text: str) -> dict:
    """Compact channel spec, e.g. dephasing:t=0.8T2, amplitude:t=1.5T1,
    bitflip:p=0.1, identity."""
    aliases = {
        "identity": "identity",
        "amplitude": "amplitude_relaxation",
        "amplitude_relaxation": "amplitude_relaxation",
        "dephasing": "pure_dephasing",
        "pure_dephasing": "pure_dephasing",
        "bitflip": "bit_flip",
        "bit_flip": "bit_flip",
        "phaseflip": "phase_flip",
        "phase_flip": "phase_flip",
    }
    name, _, rest = text.partition(":")
    if name not in aliases:
        raise ConfigError(f"channel: unknown kind {name!r}")
    kind = aliases[name]
    if kind == "identity":
        return {"kind": "identity"}
    if not rest or "=" not in rest:
        raise ConfigError(f"channel {name}: missing parameter, e.g. t=0.8 or p=0.1")
    key, _, val = rest.partition("=")
    val = val.rstrip("T1").rstrip("T2") if key == "t" else val
    try:
        num = float(val)
    except ValueError as exc:
        raise ConfigError(f"channel {name}: bad value {val!r}") from exc
    if kind == "amplitude_relaxation":
        return {"kind": kind, "t_over_T1": num}
    if kind == "pure_dephasing":
        return {"kind": kind, "t_over_T2pure": num}
    return {"kind": kind, "p": num}


def cmd_protocol(args) -> int:
    p = pr.build_protocol(args.kind, n=args.n)
    if args.qubits > 1:
        p = pr.tensor_protocol(p, args.qubits)
    if args.rotate:
        axis, angle = _parse_rotation(args.rotate)
        p = pr.rotate_protocol(p, axis, angle)
    meas = pr.measurement_operators(p)
    print(f"protocol {p.label}: m={p.m} rows, dim={p.dim}, n={p.n}")
    for j, (row, t) in enumerate(zip(p.rows, p.weights)):
        entries = "  ".join(f"{z.real:+.6f}{z.imag:+.6f}i" for z in row)
        print(f"  row {j:3d}  t={t:.6g}  [{entries}]")
    print(f"unity-decomposition residual: {meas.unity_residual():.3e}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    outdir = args.output or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    started = time.time()
    result = run_experiment(cfg, threads=args.threads)
    summary = result.summary()
    if summary["failed_trials"] == summary["trials"]:
        print("all trials failed", file=sys.stderr)
        return EXIT_NUMERICAL

    with open(os.path.join(outdir, "result.json"), "w") as fh:
        fh.write(result.to_json())
    with open(os.path.join(outdir, "trials.csv"), "w") as fh:
        fh.write(result.trials_csv())
    with open(os.path.join(outdir, "loss_hist.svg"), "w") as fh:
        fh.write(loss_histogram_svg(
            result.losses, result.theory_samples, bins=args.bins,
            title=f"{cfg.protocol_kind}, n={cfg.n}, {cfg.trials} trials",
        ))
    with open(os.path.join(outdir, "metadata.json"), "w") as fh:
        json.dump({"finished_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
                   "wall_seconds": time.time() - started}, fh, indent=2)
    for key, val in summary.items():
        print(f"{key}: {val}")
    return EXIT_OK


def cmd_blochmap(args) -> int:
    p = pr.build_protocol(args.kind, n=1.0)
    if args.rotate:
        axis, angle = _parse_rotation(args.rotate)
        p = pr.rotate_protocol(p, axis, angle)
    channel = ch.channel_from_config(_parse_channel_spec(args.channel))
    resolution = tuple(int(v) for v in args.grid.split(","))
    if len(resolution) != 2:
        raise ConfigError("--grid expects THETA,PHI point counts")
    bmap = bloch_loss_map(p, channel, resolution)
    outdir = args.output
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "blochmap.csv"), "w") as fh:
        fh.write(bmap.to_csv())
    with open(os.path.join(outdir, "blochmap.svg"), "w") as fh:
        fh.write(bloch_heatmap_svg(
            bmap.points, title=f"{bmap.protocol_label} + {bmap.channel_label}"
        ))
    print(f"L_min = {bmap.l_min:.6g}")
    print(f"L_max = {bmap.l_max:.6g}")
    return EXIT_OK


def cmd_theory(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    _, _, _, fuzzy = build_measurement(cfg)
    truth = resolve_state(cfg, fuzzy)
    spec = loss_spectrum(information_matrix(truth, fuzzy))
    mean, var = loss_moments(spec)
    print("spectrum d:", " ".join(f"{d:.6e}" for d in spec.d))
    print(f"nu = {spec.nu}")
    print(f"nu_H = {2 * fuzzy.dim - 1}")
    print(f"mean(1-F) = {mean:.6e}")
    print(f"var(1-F) = {var:.6e}")
    print(f"L = {scaled_loss(spec):.6g}")
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    from .selfcheck import run_all
    failed = False
    for name, ok, detail in run_all():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failed = failed or not ok
    return EXIT_NUMERICAL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="noisytomo",
        description="Quantum state tomography through noisy measurement "
                    "channels: simulation and fidelity-loss analysis",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("protocol", help="inspect a measurement protocol")
    psub = p.add_subparsers(dest="action", required=True)
    show = psub.add_parser("show", help="print rows, weights and residual")
    show.add_argument("kind", choices=pr.PROTOCOL_KINDS)
    show.add_argument("--qubits", type=int, default=1)
    show.add_argument("--rotate", help="ax,ay,az,angle")
    show.add_argument("--n", type=float, default=1.0)
    show.set_defaults(func=cmd_protocol)

    sim = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    sim.add_argument("config")
    sim.add_argument("--output", help="output directory (default: from config)")
    sim.add_argument("--threads", type=int, default=None)
    sim.add_argument("--bins", type=int, default=None,
                     help="histogram bins (default: Freedman-Diaconis)")
    sim.set_defaults(func=cmd_simulate)

    bm = sub.add_parser("blochmap", help="scaled-loss map over the Bloch sphere")
    bm.add_argument("kind", choices=pr.PROTOCOL_KINDS)
    bm.add_argument("--channel", required=True,
                    help="e.g. dephasing:t=0.8T2, amplitude:t=1.5T1, "
                         "bitflip:p=0.1, identity")
    bm.add_argument("--rotate", help="ax,ay,az,angle")
    bm.add_argument("--grid", default="61,120", help="THETA,PHI counts")
    bm.add_argument("--output", default=".")
    bm.set_defaults(func=cmd_blochmap)

    th = sub.add_parser("theory", help="loss spectrum and moments, no sampling")
    th.add_argument("config")
    th.set_defaults(func=cmd_theory)

    sc = sub.add_parser("selfcheck", help="run cross-module consistency checks")
    sc.set_defaults(func=cmd_selfcheck)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
