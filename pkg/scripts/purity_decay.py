"""Tabulate p_n = ||S^n S*^n f|| for every shipped filter on a fixed set of unit vectors."""
from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from gmra import gallery
from gmra.diagnostics import purity_test
from gmra.hilbert import OperatorContext, normalized, random_vector


@dataclass(frozen=True)
class Config:
    max_n: int = 64
    vectors: int = 5
    seed: int = 5
    report_every: int = 8


def main(cfg: Config) -> None:
    steps = list(range(0, cfg.max_n + 1, cfg.report_every))
    print(f"{'filter':<24}" + "".join(f"{'n=' + str(n):>10}" for n in steps))
    for name in gallery.FILTERS:
        try:
            ctx = OperatorContext(gallery.filter_matrix(name))
        except ValueError:
            print(f"{name:<24}  (fails the filter equation; S undefined)")
            continue
        rng = np.random.default_rng(cfg.seed)
        runs = [purity_test(ctx, normalized(random_vector(ctx.F.m, rng)), cfg.max_n).norms
                for _ in range(cfg.vectors)]
        worst = np.max(np.array(runs), axis=0)
        print(f"{name:<24}" + "".join(f"{worst[n]:>10.2e}" for n in steps))


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-n", type=int, default=Config.max_n)
    p.add_argument("--vectors", type=int, default=Config.vectors)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    main(Config(a.max_n, a.vectors, a.seed))
