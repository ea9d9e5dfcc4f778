"""Numerical consequences: purity decay, kernel averages, scaling products, Gram rank."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circle import HALF, Partition, StepFunction, as_rational, refine
from .filterbank import DEFAULT_TOL, FilterMatrix, _check_budget
from .hilbert import (
    ModulatedStepVector,
    OperatorContext,
    apply_S_power,
    apply_S_star,
    apply_S_star_power,
    norm,
    normalized,
)

TAU_RANK = 1e-8


# purity -------------------------------------------------------------------


@dataclass
class PurityReport:
    norms: list[float]  # p_n = ||S^n S*^n f|| for n = 0..n_max

    @property
    def minimum(self) -> float:
        return min(self.norms)

    def monotone(self, tol: float = DEFAULT_TOL) -> bool:
        return all(b <= a + tol for a, b in zip(self.norms, self.norms[1:]))

    def to_json(self) -> dict:
        return {"norms": self.norms, "min": self.minimum, "monotone": self.monotone()}


def purity_test(ctx: OperatorContext, f: ModulatedStepVector, n_max: int = 64) -> PurityReport:
    """``p_n = ||S^n S*^n f||`` for unit ``f``, computed as ``||S*^n f||`` (S^n is isometric)."""
    g = normalized(f)
    norms = [norm(g)]
    for _ in range(n_max):
        g = apply_S_star(ctx, g)
        norms.append(norm(g))
    return PurityReport(norms)


# kernel averages ----------------------------------------------------------


def kernel_average(g: StepFunction, N: int, n: int) -> StepFunction:
    """``X(omega) = N^-n sum_j g(omega + j / N^n)`` for a scalar real step function ``g``.

    ``X`` is ``1/N^n``-periodic; each value is a lattice-point count per cell.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    M = N**n
    h = Fraction(1, M)
    part = refine(g.partition, Partition([-HALF]))
    cells = part.cells()
    vals = g.on(part).values
    cuts = sorted({-HALF + (b + HALF) % h for b in part.breakpoints})
    fund = list(zip(cuts, cuts[1:] + [cuts[0] + h]))
    out = []
    for lo_t, hi_t in fund:
        t = (lo_t + hi_t) / 2
        acc = 0.0
        for (lo, hi), v in zip(cells, vals):
            count = math.ceil((hi - t) / h) - math.ceil((lo - t) / h)
            acc += count * float(v)
        out.append(acc / M)
    _check_budget(len(fund), M, None)
    pts = [r + k * h for k in range(M) for r in cuts]
    tiled = np.tile(np.asarray(out), M)
    return StepFunction(Partition(pts), tiled)


def martingale_average(f: ModulatedStepVector, N: int, n: int,
                       samples: tuple[np.ndarray, int] | None = None):
    """``X_n = N^-n sum over ker(alpha*^n) translates of ||f||^2``.

    Returns a step function for single-frequency ``f``; otherwise the values at
    ``samples`` (numerators, denominator).
    """
    if len(f.terms) <= 1 and samples is None:
        return kernel_average(f.pointwise_norm_sq(), N, n)
    if samples is None:
        raise ValueError("mixed-frequency vectors need sample points")
    nums, den = samples
    M = N**n
    nums = np.asarray(nums)
    js = np.arange(M, dtype=nums.dtype)
    pts = nums[:, None] * M + js[None, :] * den
    vals = f.at(pts, den * M)
    return np.sum(np.abs(vals) ** 2, axis=(1, 2)) / M


def straddle_constant(g: StepFunction) -> float:
    """``C`` with ``|X_n - int g| <= C N^-n``: cells times value range."""
    part = refine(g.partition, Partition([-HALF]))
    v = np.asarray(g.on(part).values, dtype=float)
    return len(part) * float(v.max() - v.min())


@dataclass
class MartingaleReport:
    deviations: list[float]  # n = 1..n_max: max over cells of |X_n - ||f||^2|
    bounds: list[float]
    target: float
    constant: float
    fitted_constant: float
    N: int

    @property
    def within_bound(self) -> bool:
        return all(d <= b for d, b in zip(self.deviations, self.bounds))

    def to_json(self) -> dict:
        return {"target": self.target, "constant": self.constant,
                "fitted_constant": self.fitted_constant, "within_bound": self.within_bound,
                "rows": [{"n": n + 1, "deviation": d, "bound": b}
                         for n, (d, b) in enumerate(zip(self.deviations, self.bounds))]}


def martingale_report(f: ModulatedStepVector, N: int, n_max: int = 12) -> MartingaleReport:
    g = f.pointwise_norm_sq()
    target = float(np.real(g.integral()))
    C = straddle_constant(g)
    devs, bounds = [], []
    for n in range(1, n_max + 1):
        X = kernel_average(g, N, n)
        devs.append(float(np.abs(X.values - target).max()))
        bounds.append(C / N**n)
    fitted = max(d * N ** (n + 1) for n, d in enumerate(devs)) if devs else 0.0
    return MartingaleReport(devs, bounds, target, C, fitted, N)


def norm_identity_deviation(ctx: OperatorContext, f: ModulatedStepVector, n: int,
                            samples: tuple[np.ndarray, int] | None = None) -> float:
    """Max over samples of ``| ||S*^n f(w)||^2 - N^-n sum_{a*^n z = w} ||f(z)||^2 |``."""
    fn = apply_S_star_power(ctx, f, n)
    if samples is None:
        parts = [c.partition for c in fn.terms.values()] + [c.partition for c in f.terms.values()]
        samples = refine(Partition([-HALF]), *parts).midpoint_grid()
    nums, den = samples
    lhs = np.sum(np.abs(fn.at(nums, den)) ** 2, axis=-1)
    M = ctx.N**n
    js = np.arange(M, dtype=np.asarray(nums).dtype)
    pts = np.asarray(nums)[:, None] + js[None, :] * den
    rhs = np.sum(np.abs(f.at(pts, den * M)) ** 2, axis=(1, 2)) / M
    return float(np.abs(lhs - rhs).max())


def norm_identity_check(ctx: OperatorContext, g: ModulatedStepVector, n: int) -> float:
    """The norm identity for the range vector ``f = S^n g``."""
    return norm_identity_deviation(ctx, apply_S_power(ctx, g, n), n)


# real-line products -------------------------------------------------------


@dataclass
class RealLineGrid:
    """Uniform grid ``k * step`` for ``|k * step| <= xmax`` with one sample array per point."""

    xmax: Fraction
    step: Fraction
    samples: np.ndarray | None = None

    def __post_init__(self):
        self.xmax = as_rational(self.xmax)
        self.step = as_rational(self.step)
        if self.step <= 0 or (self.xmax / self.step).denominator != 1:
            raise ValueError("step must be positive and divide xmax")

    @property
    def count(self) -> int:
        return 2 * int(self.xmax / self.step) + 1

    def indices(self) -> np.ndarray:
        K = int(self.xmax / self.step)
        return np.arange(-K, K + 1, dtype=np.int64)

    def exact(self) -> tuple[np.ndarray, int]:
        """Grid points as numerators over the step's denominator."""
        return self.indices() * self.step.numerator, self.step.denominator

    def points(self) -> np.ndarray:
        return self.indices() * float(self.step)

    def with_samples(self, samples: np.ndarray) -> "RealLineGrid":
        return RealLineGrid(self.xmax, self.step, samples)


def lowpass_rank(F: FilterMatrix) -> int:
    d = np.abs(np.diag(F.H(0))) / np.sqrt(F.N)
    return int(np.sum(d > 0.5))


def scaling_product(F: FilterMatrix, depth: int, grid: RealLineGrid, rank: int | None = None
                    ) -> RealLineGrid:
    """Samples of ``prod_{j=1}^{depth} N^-1/2 H(x / N^j)`` times the rank block, j = 1 leftmost."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    a = lowpass_rank(F) if rank is None else rank
    nums, den = grid.exact()
    N, c = F.N, F.c
    P = np.broadcast_to(np.eye(c, dtype=np.complex128), (len(nums), c, c)).copy()
    for j in range(1, depth + 1):
        P = P @ (F.H.at(nums, den * N**j) / np.sqrt(N))
    B = np.zeros((c, c))
    B[:a, :a] = np.eye(a)
    return grid.with_samples(P @ B)


def generators_from_product(prod: RealLineGrid) -> RealLineGrid:
    """Flatten each ``c x c`` sample into ``c^2`` generator values."""
    s = prod.samples
    return prod.with_samples(s.reshape(s.shape[0], -1))


def real_indicator(intervals, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    for lo, hi in intervals:
        out[(x >= float(lo)) & (x < float(hi))] = 1.0
    return out


def near_breakpoints(x_exact: tuple[np.ndarray, int], breakpoints, step: Fraction) -> np.ndarray:
    """Mask of grid points within one step of any breakpoint (exact)."""
    nums, den = x_exact
    mask = np.zeros(len(nums), dtype=bool)
    for b in breakpoints:
        b = as_rational(b)
        # |n/den - b| <= step  <=>  |n*b.den - b.num*den| <= step*den*b.den
        lhs = np.abs(nums.astype(object) * b.denominator - b.numerator * den)
        mask |= np.array([int(v) for v in lhs]) <= step * den * b.denominator
    return mask


@dataclass
class GramReport:
    x: np.ndarray  # grid points in [-1/2, 1/2)
    ranks: np.ndarray
    step: Fraction
    runs: list = field(default_factory=list)  # (lo, hi, rank) in grid units

    def to_json(self) -> dict:
        return {"step": f"{self.step.numerator}/{self.step.denominator}",
                "pieces": [{"lo": f"{lo.numerator}/{lo.denominator}",
                            "hi": f"{hi.numerator}/{hi.denominator}", "value": int(r)}
                           for lo, hi, r in self.runs]}


def gram_multiplicity(phi: RealLineGrid, K_trunc: int = 8, tau_rank: float = TAU_RANK
                      ) -> GramReport:
    """Rank of ``G(x) = sum_{|k| <= K} phi(x+k) phi(x+k)^*`` on grid points of ``[-1/2, 1/2)``.

    Samples outside the grid count as zero, so ``xmax`` should cover the support.
    """
    if (1 / phi.step).denominator != 1:
        raise ValueError("grid step must divide 1")
    per = int(1 / phi.step)
    idx = phi.indices()
    base = np.arange(-per // 2, per - per // 2, dtype=np.int64)  # k*step in [-1/2, 1/2)
    offset = int(-idx[0])
    S = phi.samples.reshape(phi.samples.shape[0], -1)
    G = np.zeros((len(base), S.shape[1], S.shape[1]), dtype=np.complex128)
    for k in range(-K_trunc, K_trunc + 1):
        pos = base + k * per + offset
        ok = (pos >= 0) & (pos < len(idx))
        v = np.zeros((len(base), S.shape[1]), dtype=np.complex128)
        v[ok] = S[pos[ok]]
        G += v[:, :, None] * v[:, None, :].conj()
    eig = np.linalg.eigvalsh(G)
    trace = np.maximum(eig.sum(axis=1), 0.0)
    ranks = np.sum(eig > tau_rank * trace[:, None], axis=1) * (trace > 0)
    x = base * float(phi.step)
    runs = []
    start = 0
    for i in range(1, len(base) + 1):
        if i == len(base) or ranks[i] != ranks[start]:
            runs.append((base[start] * phi.step, (base[i - 1] + 1) * phi.step, int(ranks[start])))
            start = i
    return GramReport(x, ranks.astype(int), phi.step, runs)
