"""Command-line entry point: ``hjbr {pretrain,train,eval,selftest}``.

Exit codes: 0 ok, 2 config error, 3 data/io error, 4 gate failure,
5 divergence.  ``HJBR_LOG`` in {quiet, info, debug} sets verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from hjbr import __version__
from hjbr.config import ConfigError, TrainConfig, load_config
from hjbr.data import DataFormatError, load_ucr_tsv
from hjbr.reservoir import DivergenceError, ReservoirModel
from hjbr.trainer import (
    STEP_COLUMNS,
    GateError,
    SelftestConfig,
    _write_csv,
    evaluate,
    lqr_selftest,
    pretrain,
    train,
)

log = logging.getLogger("hjbr")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_GATE, EXIT_DIVERGED = 0, 2, 3, 4, 5


def _setup_logging():
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("HJBR_LOG", "quiet").lower(), logging.WARNING
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _config(args) -> TrainConfig:
    if args.config is None:
        cfg = TrainConfig()
    else:
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            raise _Fail(EXIT_CONFIG, f"config error: {exc}") from None
    if getattr(args, "seed_override", None) is not None:
        cfg = cfg.with_seed_override(args.seed_override)
    return cfg


def _data(path):
    try:
        ds = load_ucr_tsv(path)
    except (OSError, DataFormatError) as exc:
        raise _Fail(EXIT_DATA, f"data error: {exc}") from None
    if len(ds) == 0:
        raise _Fail(EXIT_DATA, f"data error: {path} holds no series")
    return ds


def _load_model(path):
    try:
        return ReservoirModel.load(path, with_meta=True)
    except (OSError, ValueError, KeyError) as exc:
        raise _Fail(EXIT_DATA, f"cannot read model {path}: {exc}") from None


def _meta(cfg: TrainConfig) -> dict:
    return {"dt": cfg.dt, "encoding": cfg.encoding, "encoding_k": cfg.encoding_k, "seed_data": cfg.seed_data}


def _manifest(path, cfg, ds, command, outputs, **extra):
    doc = {
        "artifact_version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "seeds": cfg.seeds,
        "dataset": {"name": ds.name, "sha256": ds.fingerprint(), "n_s": len(ds), "c": ds.c},
        "outputs": {k: str(v) for k, v in outputs.items()},
        **extra,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_pretrain(args) -> int:
    cfg = _config(args)
    ds = _data(args.data)
    out = Path(args.out)
    manifest = out.with_name(out.name + ".manifest.json")
    _manifest(manifest, cfg, ds, "pretrain", {"decoder": out})
    try:
        model = pretrain(cfg, ds)
    except np.linalg.LinAlgError as exc:
        raise _Fail(EXIT_CONFIG, f"config error: lambda: {exc}") from None
    model.save(out, **_meta(cfg))
    print(f"decoder written to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    ds = _data(args.data)
    model, _ = _load_model(args.decoder)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "model": out / "model.npz",
        "steps_csv": out / "steps.csv",
        "epochs_csv": out / "epochs.csv",
        "gate": out / "gate.json",
    }
    _manifest(out / "manifest.json", cfg, ds, "train", paths, decoder=str(args.decoder), force=bool(args.force))
    (out / "config.txt").write_text(cfg.dumps(), encoding="utf-8")
    try:
        trained, diag, _, _ = train(ds, model, cfg, force=args.force)
    except GateError as exc:
        _write_json(paths["gate"], exc.report.to_dict())
        raise _Fail(EXIT_GATE, str(exc)) from None
    except DivergenceError as exc:
        if exc.window is not None:
            _write_csv(out / "divergence_window.csv", exc.window, STEP_COLUMNS)
        raise _Fail(EXIT_DIVERGED, f"diverged: {exc}") from None
    _write_json(paths["gate"], diag.gate.to_dict())
    diag.write_steps_csv(paths["steps_csv"])
    diag.write_epochs_csv(paths["epochs_csv"])
    trained.save(paths["model"], **_meta(cfg))
    last = diag.epochs[-1] if len(diag.epochs) else None
    if last is not None:
        print(f"epochs={len(diag.epochs)} sum_e_sq={last['sum_e_sq']:.6g} train_accuracy={last['train_accuracy']:.4f}")
    if diag.gate.overridden:
        print("gate overridden: " + "; ".join(diag.gate.violations))
    return EXIT_OK


def cmd_eval(args) -> int:
    model, meta = _load_model(args.model)
    ds = _data(args.data)
    cfg = TrainConfig(
        dt=meta.get("dt", TrainConfig.dt),
        encoding=meta.get("encoding", "identity"),
        encoding_k=meta.get("encoding_k", 0),
        seed_data=meta.get("seed_data", TrainConfig.seed_data),
    )
    try:
        res = evaluate(model, ds, cfg.dt, cfg)
    except ValueError as exc:
        raise _Fail(EXIT_DATA, f"data error: {exc}") from None
    out = Path(args.out) if args.out else Path(args.model).with_suffix(".confusion.csv")
    with out.open("w", encoding="utf-8") as fh:
        fh.write("true,predicted,count\n")
        for i in range(res.confusion.shape[0]):
            for j in range(res.confusion.shape[1]):
                fh.write(f"{i},{j},{int(res.confusion[i, j])}\n")
    print(f"{res.accuracy:.4f}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    defaults = SelftestConfig()
    cfg = SelftestConfig(
        a=args.a if args.a is not None else defaults.a,
        b=args.b if args.b is not None else defaults.b,
        r=args.r if args.r is not None else defaults.r,
        eta=args.eta if args.eta is not None else defaults.eta,
        steps=args.steps if args.steps is not None else defaults.steps,
        seed=args.seed if args.seed is not None else defaults.seed,
    )
    try:
        report = lqr_selftest(cfg, force=args.force)
    except GateError as exc:
        raise _Fail(EXIT_GATE, str(exc)) from None
    print(report.summary())
    return EXIT_OK if report.converged else 1


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n", encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hjbr", description="Actor-critic plasticity control for reservoir classifiers.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("pretrain", help="fit the linear decoder by ridge regression")
    sp.add_argument("--config")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True, help="decoder/model .npz to write")
    sp.add_argument("--seed-override", type=int)
    sp.set_defaults(func=cmd_pretrain)

    sp = sub.add_parser("train", help="actor-critic training of the plastic weights")
    sp.add_argument("--config")
    sp.add_argument("--data", required=True)
    sp.add_argument("--decoder", required=True, help="output of 'pretrain'")
    sp.add_argument("--out", required=True, help="run directory")
    sp.add_argument("--force", action="store_true", help="train even if the gate fails")
    sp.add_argument("--seed-override", type=int)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="feed-forward accuracy of a trained model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", help="confusion CSV (default: next to the model)")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("selftest", help="scalar LQR check of the update laws")
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--r", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--force", action="store_true")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
