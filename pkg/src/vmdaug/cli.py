"""``vmdaug`` command-line entry point.

Every subcommand resolves a :class:`~vmdaug.config.RunConfig` (defaults,
then ``--config`` file, then flags), runs, and writes ``<out>.run.json``
next to each primary output. That sidecar holds the resolved config plus
the command and its arguments, so ``vmdaug replay <sidecar>`` re-executes
the run and reproduces its files byte for byte.

Exit status: 0 on success, 2 on usage or configuration errors, 1 on data,
format, labeling, fitting or training errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import config as C
from .core import (DEFAULT_FS, AngleMatrix, Label, LabeledDataset, Signal, load_dataset, load_signals,
                   save_columns, save_dataset, save_signals, split_dataset)
from .encoder import EncoderModel, classify_batch, load_model, predict_proba, save_model, train
from .errors import ArgumentError, LabelError, VmdaugError
from .evaluation import (data_size_sweep, evaluate_model, max_cross_gap, tstr_trts,
                         write_sweep_csv)
from .kmmd import DEFAULT_ALPHAS, two_sample_tests
from .preprocess import CoaWeights, deviation, detrend_linear, preprocess_pipeline
from .prony import label_signals
from .synth import dataset_from_specs, gen_specs
from .vmd import augment_dataset, decompose

PROG = "vmdaug"
SIDECAR_SUFFIX = ".run.json"


def sidecar_path(out) -> Path:
    return Path(str(out) + SIDECAR_SUFFIX)


def _write_json(path, doc) -> None:
    Path(path).write_text(C.dumps(doc))


# ---------------------------------------------------------------------------
# subcommand bodies: (config, args) -> primary output paths

def _cmd_gen(cfg: C.RunConfig, a: dict) -> list[str]:
    specs = gen_specs(cfg.gen, cfg.seed)
    save_dataset(dataset_from_specs(specs), a["out"])
    _write_json(a["out"] + ".truth.json", {"seed": cfg.seed,
                                           "samples": [s.to_dict() for s in specs]})
    return [a["out"]]


def _load_weights(path) -> CoaWeights:
    if path.lower().endswith(".json"):
        try:
            values = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ArgumentError(f"cannot read weights {path}: {exc}") from exc
    else:
        values = load_signals(path).ravel()
    return CoaWeights.from_inertia(values)


def _cmd_preprocess(cfg: C.RunConfig, a: dict) -> list[str]:
    angles = AngleMatrix(load_signals(a["input"]), a["fs"])
    weights = _load_weights(a["weights"]) if a["weights"] else None
    rows = preprocess_pipeline(angles, weights)
    save_signals(np.stack([r.samples for r in rows]), a["out"])
    return [a["out"]]


def _cmd_decompose(cfg: C.RunConfig, a: dict) -> list[str]:
    X = load_signals(a["input"])
    if not (0 <= a["row"] < len(X)):
        raise ArgumentError(f"row {a['row']} outside [0, {len(X)})")
    s = Signal(X[a["row"]], a["fs"])
    modes = decompose(s, cfg.vmd).sorted_by_frequency()
    names = ["t"] + [f"mode_{k}" for k in range(len(modes))]
    save_columns([s.t, *modes.modes], names, a["out"])
    _write_json(a["out"] + ".modes.json", {
        "center_freqs": [float(f) for f in modes.center_freqs],
        "iterations_used": modes.iterations_used,
        "converged": modes.converged,
        "final_objective": float(modes.objective[-1]) if len(modes.objective) else None,
    })
    return [a["out"]]


def _cmd_augment(cfg: C.RunConfig, a: dict) -> list[str]:
    d = load_dataset(a["input"], fs=a["fs"])
    save_dataset(augment_dataset(d, cfg.vmd), a["out"])
    return [a["out"]]


def _cmd_label(cfg: C.RunConfig, a: dict) -> list[str]:
    X = load_signals(a["input"])
    analysed = X
    if a["detrend"]:
        analysed = np.stack([detrend_linear(deviation(Signal(r, a["fs"]))).samples for r in X])
    d, report = label_signals(analysed, a["fs"], cfg.label_vmd, cfg.label)
    _write_json(a["out"] + ".report.json", {"samples": report})
    if d is None:
        raise LabelError("no signal could be labeled (see the report)")
    kept = [r["index"] for r in report if "label" in r]
    save_dataset(LabeledDataset(X[kept], d.labels, a["fs"]), a["out"])
    return [a["out"]]


def _cmd_split(cfg: C.RunConfig, a: dict) -> list[str]:
    d = load_dataset(a["input"], fs=a["fs"])
    tr, te = split_dataset(d, a["train_fraction"], cfg.seed)
    save_dataset(tr, a["train_out"])
    save_dataset(te, a["test_out"])
    return [a["train_out"], a["test_out"]]


def _cmd_mmd(cfg: C.RunConfig, a: dict) -> list[str]:
    X = load_signals(a["x"])
    Y = load_signals(a["y"])
    reports = two_sample_tests(X, Y, cfg.kernel, a["alpha"])
    first = reports[0]
    doc = {
        "m": first.m, "sigma": first.sigma, "kernel_bound": cfg.kernel.kernel_bound,
        "mmd_biased": first.mmd_biased, "mmd_unbiased_sq": first.mmd_unbiased_sq,
        "tests": [{k: r.to_dict()[k] for k in ("alpha", "rademacher_threshold",
                                                 "verdict_rademacher", "asymptotic_threshold",
                                                 "verdict_asymptotic")} for r in reports],
    }
    if a["out"] is None:
        sys.stdout.write(C.dumps(doc))
        return []
    _write_json(a["out"], doc)
    return [a["out"]]


def _cmd_train(cfg: C.RunConfig, a: dict) -> list[str]:
    d = load_dataset(a["input"], fs=a["fs"])
    model = EncoderModel.init(cfg.encoder)
    report = train(model, d, cfg.encoder)
    save_model(model, a["out"])
    _write_json(a["out"] + ".report.json", report.to_dict())
    return [a["out"]]


def _cmd_classify(cfg: C.RunConfig, a: dict) -> list[str]:
    model = load_model(a["model"])
    X = load_signals(a["input"])
    p = predict_proba(model, X)[:, 1]
    labels = classify_batch(model, X, a["delta"])
    with open(a["out"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p_unstable", "label"])
        for pi, li in zip(p, labels):
            w.writerow([repr(float(pi)), Label(int(li)).token])
    return [a["out"]]


def _emit(doc: dict, out) -> list[str]:
    if out is None:
        sys.stdout.write(C.dumps(doc))
        return []
    _write_json(out, doc)
    return [out]


def _cmd_evaluate(cfg: C.RunConfig, a: dict) -> list[str]:
    if a["model"]:
        if not a["input"] or a["original"] or a["augmented"]:
            raise ArgumentError("--model needs --in and excludes --original/--augmented")
        model = load_model(a["model"])
        d = load_dataset(a["input"], fs=a["fs"])
        return _emit({"metrics": evaluate_model(model, d, a["delta"]).to_dict()}, a["out"])
    if not (a["original"] and a["augmented"]):
        raise ArgumentError("give either --model with --in, or --original and --augmented")
    A = load_dataset(a["original"], fs=a["fs"])
    B = load_dataset(a["augmented"], fs=a["fs"])
    table = tstr_trts(A, B, cfg.encoder, a["train_fraction"], delta=a["delta"])
    return _emit({"cells": table.to_dict(), "max_cross_gap": max_cross_gap(table)}, a["out"])


def _cmd_sweep(cfg: C.RunConfig, a: dict) -> list[str]:
    merged = load_dataset(a["input"], fs=a["fs"])
    test = load_dataset(a["test"], fs=a["fs"]) if a["test"] else None
    rows = data_size_sweep(merged, a["sizes"], cfg.encoder, test, a["delta"])
    write_sweep_csv(rows, a["out"])
    return [a["out"]]


COMMANDS: dict[str, Callable[[C.RunConfig, dict], list[str]]] = {
    "gen": _cmd_gen,
    "preprocess": _cmd_preprocess,
    "decompose": _cmd_decompose,
    "augment": _cmd_augment,
    "label": _cmd_label,
    "split": _cmd_split,
    "mmd-test": _cmd_mmd,
    "train": _cmd_train,
    "classify": _cmd_classify,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
}


def execute(command: str, cfg: C.RunConfig, args: dict) -> list[str]:
    """Run one subcommand and write its sidecars."""
    cfg = cfg.with_run(command, args)
    outputs = COMMANDS[command](cfg, args)
    for out in outputs:
        _write_json(sidecar_path(out), cfg.to_dict())
    return outputs


def replay(sidecar) -> list[str]:
    cfg = C.load_config(sidecar)
    run = cfg.run
    if run.get("command") not in COMMANDS or not isinstance(run.get("args"), dict):
        raise C.ConfigError(f"{sidecar}: no replayable run recorded")
    return execute(run["command"], cfg, run["args"])


# ---------------------------------------------------------------------------
# argument parsing

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _sigma(text: str):
    return text if text == "median-heuristic" else float(text)


# flag dest -> (config section, field)
OVERRIDES = {
    "seed": ("seed", "seed"),
    "n": ("gen", "n"), "balance": ("gen", "class_balance"), "noise": ("gen", "noise_fraction"),
    "length": ("gen", "length"), "gen_fs": ("gen", "fs"), "trend": ("gen", "trend"),
    "k_modes": ("vmd", "k_modes"), "bandwidth_penalty": ("vmd", "bandwidth_penalty"),
    "tau": ("vmd", "dual_ascent_step"), "tolerance": ("vmd", "tolerance"),
    "max_iter": ("vmd", "max_iterations"), "init": ("vmd", "init_scheme"),
    "zeta_threshold": ("label", "damping_ratio_threshold"),
    "target_frequency": ("label", "target_frequency"), "prony_order": ("label", "prony_order"),
    "sigma": ("kernel", "bandwidth_sigma"), "kernel_bound": ("kernel", "kernel_bound"),
    "epochs": ("encoder", "epochs"), "lr": ("encoder", "learning_rate"),
    "batch_size": ("encoder", "batch_size"),
}
CONTROL = {"command", "config", "scale", "sidecar"}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed")

    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name, help_text, *, fs=True):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if fs:
            p.add_argument("--fs", type=float, default=DEFAULT_FS,
                           help="sampling rate for CSV inputs (default 60)")
        return p

    def vmd_flags(p):
        p.add_argument("--k-modes", "--k", dest="k_modes", type=int, help="number of modes")
        p.add_argument("--bandwidth-penalty", type=float, help="VMD bandwidth penalty")
        p.add_argument("--tau", type=float, help="dual ascent step")
        p.add_argument("--tolerance", type=float)
        p.add_argument("--max-iter", type=int)
        p.add_argument("--init", choices=("zero", "uniform-spread"))

    def encoder_flags(p):
        p.add_argument("--scale", choices=("desk", "paper"), help="network size preset")
        p.add_argument("--epochs", type=int)
        p.add_argument("--lr", type=float, help="Adam learning rate")
        p.add_argument("--batch-size", type=int)

    p = cmd("gen", "generate a labeled synthetic ringdown corpus", fs=False)
    p.add_argument("--n", type=int)
    p.add_argument("--balance", type=float, help="fraction of unstable samples")
    p.add_argument("--noise", type=float, help="noise sigma relative to primary amplitude")
    p.add_argument("--length", type=int)
    p.add_argument("--fs", dest="gen_fs", type=float)
    p.add_argument("--no-trend", dest="trend", action="store_const", const=False)
    p.add_argument("--out", required=True)

    p = cmd("preprocess", "COA removal, unwrap, deviation and detrend of bus angles")
    p.add_argument("--in", dest="input", required=True, help="angle matrix CSV, rows = buses")
    p.add_argument("--weights", help="per-bus inertia weights (CSV row or JSON list)")
    p.add_argument("--out", required=True)

    p = cmd("decompose", "VMD of one signal into per-mode columns")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--row", type=int, default=0, help="which signal of the file (default 0)")
    vmd_flags(p)
    p.add_argument("--out", required=True)

    p = cmd("augment", "replace each signal by its VMD modes minus the trend mode")
    p.add_argument("--in", dest="input", required=True)
    vmd_flags(p)
    p.add_argument("--out", required=True)

    p = cmd("label", "label signals by the damping of the mode near the target frequency")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--zeta-threshold", type=float)
    p.add_argument("--target-frequency", type=float)
    p.add_argument("--prony-order", type=int)
    p.add_argument("--no-detrend", dest="detrend", action="store_false",
                   help="analyse the signals as given")
    p.add_argument("--out", required=True)

    p = cmd("split", "stratified train/test split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--train-fraction", type=float, default=2 / 3)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)

    p = cmd("mmd-test", "kernel two-sample test between two signal sets")
    p.add_argument("x", help="first sample set (CSV/JSON)")
    p.add_argument("y", help="second sample set")
    p.add_argument("--alpha", type=_floats, default=list(DEFAULT_ALPHAS),
                   help="comma-separated significance levels")
    p.add_argument("--sigma", type=_sigma, help="kernel width or 'median-heuristic'")
    p.add_argument("--kernel-bound", type=float)
    p.add_argument("--out", help="JSON report path (stdout when omitted)")

    p = cmd("train", "train the Encoder classifier")
    p.add_argument("--in", dest="input", required=True)
    encoder_flags(p)
    p.add_argument("--out", required=True, help="model checkpoint (JSON)")

    p = cmd("classify", "unstable-class probability and decision per signal")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--out", required=True)

    p = cmd("evaluate", "metrics of a model, or the train/test cross table of two corpora")
    p.add_argument("--model")
    p.add_argument("--in", dest="input")
    p.add_argument("--original")
    p.add_argument("--augmented")
    p.add_argument("--train-fraction", type=float, default=2 / 3)
    p.add_argument("--delta", type=float, default=0.5)
    encoder_flags(p)
    p.add_argument("--out")

    p = cmd("sweep", "accuracy against training-set size")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--test", help="fixed test set (default: hold out a third of --in)")
    p.add_argument("--sizes", type=_ints, default=[100, 400, 1600])
    p.add_argument("--delta", type=float, default=0.5)
    encoder_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("replay", help="re-run a recorded run from its sidecar")
    p.add_argument("sidecar")
    return parser


def _resolve(ns: argparse.Namespace) -> tuple[C.RunConfig, dict]:
    values = vars(ns)
    cfg = C.load_config(values["config"]) if values.get("config") else C.RunConfig()
    if values.get("scale"):
        cfg = C.apply_scale(cfg, values["scale"])
    for dest, (section, fld) in OVERRIDES.items():
        if values.get(dest) is not None:
            cfg = C.override(cfg, section, **{fld: values[dest]})
    args = {k: v for k, v in values.items() if k not in OVERRIDES and k not in CONTROL}
    return cfg, args


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.command == "replay":
            replay(ns.sidecar)
        else:
            cfg, args = _resolve(ns)
            execute(ns.command, cfg, args)
    except ArgumentError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except (VmdaugError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
