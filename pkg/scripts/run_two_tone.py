"""Desk-scale two-tone experiment: pretrain, actor-critic training, feed-forward recall.

    python scripts/run_two_tone.py --out runs/two_tone [--epochs 30] [--seed-base 1]

Writes steps.csv, epochs.csv, gate.json and model.npz to ``--out`` and prints
a per-epoch table.
"""

import argparse
import dataclasses
import json
import logging
from pathlib import Path

import numpy as np

from hjbr.config import TrainConfig
from hjbr.data import synth_two_tone
from hjbr.trainer import evaluate, pretrain, train


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="runs/two_tone")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--n-s", type=int, default=40)
    p.add_argument("--n-l", type=int, default=50)
    p.add_argument("--f1", type=float, default=0.05)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed-base", type=int)
    args = p.parse_args()
    logging.basicConfig(level=logging.WARNING)

    cfg = TrainConfig(epochs=args.epochs)
    if args.seed_base is not None:
        cfg = cfg.with_seed_override(args.seed_base)
    ds = synth_two_tone(args.n_s, args.n_l, args.f1, 2 * args.f1, args.noise, seed=cfg.seed_data)
    model = pretrain(cfg, ds)
    acc0 = evaluate(model, ds, cfg.dt, cfg).accuracy
    trained, diag, _, _ = train(ds, model, cfg, force=True)
    acc1 = evaluate(trained, ds, cfg.dt, cfg).accuracy

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    diag.write_steps_csv(out / "steps.csv")
    diag.write_epochs_csv(out / "epochs.csv")
    (out / "gate.json").write_text(json.dumps(diag.gate.to_dict(), indent=2, default=float) + "\n")
    trained.save(out / "model.npz", dt=cfg.dt, encoding=cfg.encoding, encoding_k=cfg.encoding_k, seed_data=cfg.seed_data)
    (out / "config.txt").write_text(cfg.dumps())

    print(f"{'epoch':>5} {'sum|e|^2':>12} {'train_acc':>9} {'|dWc|':>10} {'|dWa|':>10}")
    for row in diag.epochs:
        print(f"{row['epoch']:5d} {row['sum_e_sq']:12.4f} {row['train_accuracy']:9.4f} {row['delta_wc']:10.3e} {row['delta_wa']:10.3e}")
    se = diag.epochs["sum_e_sq"]
    print(f"non-increasing epoch pairs: {int(np.sum(np.diff(se) <= 0))}/{len(se) - 1}")
    print(f"feed-forward accuracy: pretrained {acc0:.4f}, trained {acc1:.4f}")
    print(f"gate passed: {diag.gate.passed} (critic-rate bound {diag.gate.alpha_c_bound:.3e}, alpha_c {cfg.alpha_c:g})")
    print(f"wall clock: {diag.wall_clock:.1f} s")


if __name__ == "__main__":
    main()
