"""Reproduce the two worked families: multiplicities, complements, rank windows, filters."""
from __future__ import annotations

import argparse
from dataclasses import dataclass

from gmra import gallery
from gmra.filterbank import (
    check_lowpass,
    synthesize,
    verify_filter_equation,
    verify_superfilter,
    verify_support,
)
from gmra.multiplicity import complement, rank_window, support_sets


@dataclass(frozen=True)
class Config:
    superfilter_depth: int = 3
    tol: float = 1e-12


def describe_m(label, m):
    mt = complement(m).m.simplify()
    w = rank_window(m)
    print(f"{label}: N={m.N}, c={m.c}")
    for i, cells in enumerate(support_sets(m), 1):
        print(f"  sigma_{i}: " + " U ".join(f"[{lo}, {hi})" for lo, hi in cells))
    print(f"  complement values: {sorted(set(mt.values.tolist()))}")
    print(f"  rank window: {w.ranks}  (radius {w.radius})")
    return w


def describe_filter(label, F, rank, cfg):
    sup = verify_support(F)
    eq = verify_filter_equation(F, cfg.tol)
    sf = max(verify_superfilter(F, n, cfg.tol).max_deviation
             for n in range(2, cfg.superfilter_depth + 1))
    low = check_lowpass(F, rank, cfg.tol)
    status = "ok" if sup.passed and eq.passed and low.valid else "FAILS"
    print(f"  {label:<34} {status:<6} support {'ok' if sup.passed else 'bad'}  "
          f"eq {eq.max_deviation:.1e}  superfilter {sf:.1e}  low-pass radius {low.radius}")


def main(cfg: Config) -> None:
    for label, m, names in (("first family", gallery.journe_m(), ["journe_rank2"]),
                            ("second family", gallery.example2_m(),
                             ["example2_rank2a", "example2_rank2b",
                              "example2_rank2b_fixed", "example2_rank3"])):
        w = describe_m(label, m)
        for name in names:
            describe_filter(name, gallery.filter_matrix(name), gallery.STATED_RANKS[name], cfg)
        for a in w.ranks:
            describe_filter(f"synthesized rank {a}", synthesize(m, a), a, cfg)
        print()


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--superfilter-depth", type=int, default=Config.superfilter_depth)
    p.add_argument("--tol", type=float, default=Config.tol)
    a = p.parse_args()
    main(Config(a.superfilter_depth, a.tol))
