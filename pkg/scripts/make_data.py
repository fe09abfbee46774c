"""Write the synthetic two-tone dataset as a UCR-style TSV for the CLI.

    python scripts/make_data.py data/two_tone.tsv [--n-s 40 --n-l 50 --f1 0.05 --noise 0.05 --seed 5]
"""

import argparse
from pathlib import Path

from hjbr.data import save_ucr_tsv, synth_two_tone


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out")
    p.add_argument("--n-s", type=int, default=40)
    p.add_argument("--n-l", type=int, default=50)
    p.add_argument("--f1", type=float, default=0.05)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=5)
    args = p.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_ucr_tsv(synth_two_tone(args.n_s, args.n_l, args.f1, 2 * args.f1, args.noise, args.seed), args.out)


if __name__ == "__main__":
    main()
