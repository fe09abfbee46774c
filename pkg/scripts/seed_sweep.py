"""Robustness of the desk-scale run across seed tuples.

    python scripts/seed_sweep.py --bases 1 10 20 30
"""

import argparse
import logging
import time

import numpy as np

from hjbr.config import TrainConfig
from hjbr.data import synth_two_tone
from hjbr.reservoir import DivergenceError
from hjbr.trainer import evaluate, pretrain, train


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--bases", type=int, nargs="+", default=[1, 10, 20, 30, 40])
    p.add_argument("--epochs", type=int, default=30)
    args = p.parse_args()
    logging.disable(logging.WARNING)
    print("base  violations  train_acc  eval_acc  seconds")
    for b in args.bases:
        cfg = TrainConfig(epochs=args.epochs).with_seed_override(b)
        ds = synth_two_tone(40, 50, 0.05, 0.1, 0.05, seed=cfg.seed_data)
        t0 = time.perf_counter()
        try:
            trained, diag, _, _ = train(ds, pretrain(cfg, ds), cfg, force=True)
        except DivergenceError as exc:
            print(f"{b:4d}  diverged: {exc}")
            continue
        viol = int(np.sum(np.diff(diag.epochs["sum_e_sq"]) > 0))
        acc = evaluate(trained, ds, cfg.dt, cfg).accuracy
        print(f"{b:4d}  {viol:10d}  {diag.epochs['train_accuracy'][-1]:9.4f}  {acc:8.4f}  {time.perf_counter() - t0:7.1f}")


if __name__ == "__main__":
    main()
