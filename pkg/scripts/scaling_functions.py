"""Truncated infinite products for a filter, their shift-invariant multiplicity, CSV export."""
from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass
from fractions import Fraction

from gmra import gallery
from gmra.diagnostics import RealLineGrid, generators_from_product, gram_multiplicity, scaling_product


@dataclass(frozen=True)
class Config:
    filter: str = "journe_rank2"
    depth: int = 25
    step: Fraction = Fraction(1, 2240)
    xmax: Fraction = Fraction(8)
    ktrunc: int = 8
    csv: str | None = None


def main(cfg: Config) -> None:
    F = gallery.filter_matrix(cfg.filter)
    prod = scaling_product(F, cfg.depth, RealLineGrid(cfg.xmax, cfg.step))
    c = F.c
    for i in range(c):
        diag = prod.samples[:, i, i].real
        support = prod.points()[diag > 0.5]
        if len(support):
            print(f"phi_{i + 1}: nonzero for x in [{support.min():.4f}, {support.max():.4f}], "
                  f"measure ~ {len(support) * float(cfg.step):.4f}")
    rep = gram_multiplicity(generators_from_product(prod), cfg.ktrunc)
    print("multiplicity of the generated shift-invariant space:")
    for lo, hi, r in rep.runs:
        print(f"  [{lo}, {hi}): {r}")
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x"] + [f"phi_{i + 1}{j + 1}" for i in range(c) for j in range(c)])
            for x, s in zip(prod.points(), prod.samples):
                w.writerow([x] + [float(v.real) for v in s.ravel()])


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--filter", default=Config.filter, choices=gallery.FILTERS)
    p.add_argument("--depth", type=int, default=Config.depth)
    p.add_argument("--step", type=Fraction, default=Config.step)
    p.add_argument("--xmax", type=Fraction, default=Config.xmax)
    p.add_argument("--ktrunc", type=int, default=Config.ktrunc)
    p.add_argument("--csv")
    a = p.parse_args()
    main(Config(a.filter, a.depth, a.step, a.xmax, a.ktrunc, a.csv))
