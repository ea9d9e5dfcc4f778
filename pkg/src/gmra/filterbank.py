"""Filters relative to a multiplicity function: verification and synthesis.

A filter is a ``c x c`` matrix ``H = [h_ij]`` of step functions with
``h_ij`` vanishing off ``sigma_j`` and

    sum over N*zeta = omega of H(zeta) H(zeta)^*  =  N * diag(chi_sigma_i(omega)).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circle import (
    HALF,
    ParseError,
    Partition,
    StepFunction,
    format_rational,
    reduce,
    refine,
    stack,
)
from .multiplicity import MultiplicityFunction, rank_window, sigma

DEFAULT_TOL = 1e-12
DEFAULT_CELL_BUDGET = 10**6


class DepthTooLarge(RuntimeError):
    """The refined partition times the fiber size exceeds the cell budget."""


class RankOutOfWindow(ValueError):
    pass


class InsufficientDimensions(RuntimeError):
    pass


def cell_budget() -> int:
    return int(os.environ.get("GMRA_CELL_BUDGET", DEFAULT_CELL_BUDGET))


def _check_budget(cells: int, fiber: int, budget: int | None) -> None:
    budget = cell_budget() if budget is None else budget
    if cells * fiber > budget:
        raise DepthTooLarge(f"{cells} cells x {fiber} fiber points exceeds budget {budget}")


class FilterMatrix:
    """Matrix-valued step function ``H`` together with its multiplicity function."""

    __slots__ = ("H", "m")

    def __init__(self, H: StepFunction, m: MultiplicityFunction):
        if H.shape != (m.c, m.c):
            raise ValueError(f"filter shape {H.shape} does not match c = {m.c}")
        self.H = H.map(lambda v: v.astype(np.complex128)).simplify()
        self.m = m

    @property
    def N(self) -> int:
        return self.m.N

    @property
    def c(self) -> int:
        return self.m.c

    def entry(self, i: int, j: int) -> StepFunction:
        """``h_ij`` with 1-based indices."""
        return StepFunction(self.H.partition, self.H.values[:, i - 1, j - 1]).simplify()

    def __call__(self, x) -> np.ndarray:
        return self.H(x)

    @classmethod
    def from_entries(cls, entries, m: MultiplicityFunction) -> "FilterMatrix":
        c = len(entries)
        flat = [e for row in entries for e in row]
        return cls(stack(flat, (c, c)), m)

    @classmethod
    def diagonal(cls, diag, m: MultiplicityFunction) -> "FilterMatrix":
        c = len(diag)
        zero = StepFunction.constant(0j)
        return cls.from_entries([[diag[i] if i == j else zero for j in range(c)]
                                 for i in range(c)], m)

    def to_json(self, include_m: bool = True) -> dict:
        doc = {
            "N": self.N,
            "c": self.c,
            "entries": [[self.entry(i, j).to_json() for j in range(1, self.c + 1)]
                        for i in range(1, self.c + 1)],
        }
        if include_m:
            doc["m"] = self.m.to_json()
        return doc

    @classmethod
    def from_json(cls, doc, m: MultiplicityFunction | None = None) -> "FilterMatrix":
        """Parse filter JSON; ``"scale": "sqrtN"`` multiplies stored values by sqrt(N).

        The multiplicity function comes from ``m``, the optional ``"m"`` field,
        or, failing both, from the diagonal of the fiber sum of ``H H^*``.
        """
        if not isinstance(doc, dict):
            raise ParseError("expected an object")
        for key in doc:
            if key not in ("N", "c", "entries", "scale", "m", "name"):
                raise ParseError(f"unknown field {key!r}", f"/{key}")
        N, c = doc.get("N"), doc.get("c")
        if not isinstance(N, int) or N < 2:
            raise ParseError("'N' must be an integer >= 2", "/N")
        if not isinstance(c, int) or c < 1:
            raise ParseError("'c' must be a positive integer", "/c")
        scale = doc.get("scale")
        if scale not in (None, "sqrtN"):
            raise ParseError("'scale' must be \"sqrtN\" when present", "/scale")
        factor = np.sqrt(N) if scale == "sqrtN" else None
        rows = doc.get("entries")
        if not isinstance(rows, list) or len(rows) != c:
            raise ParseError(f"'entries' must be a {c} x {c} list", "/entries")
        flat = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != c:
                raise ParseError(f"row must have {c} entries", f"/entries/{i}")
            for j, e in enumerate(row):
                try:
                    flat.append(StepFunction.from_json(e, dtype=np.complex128, scale=factor))
                except ParseError as exc:
                    raise exc.at(f"/entries/{i}/{j}")
        H = stack(flat, (c, c))
        if m is None and "m" in doc:
            try:
                m = MultiplicityFunction.from_json(doc["m"])
            except ParseError as exc:
                raise exc.at("/m")
        if m is None:
            m = infer_multiplicity(H, N)
        if m.N != N or m.c != c:
            raise ParseError(f"multiplicity (N={m.N}, c={m.c}) does not match filter", "/m")
        return cls(H, m)


def _fiber_partition(H: StepFunction, N: int, power: int = 1) -> Partition:
    """Breakpoints in ``omega`` where some ``alpha*^k zeta`` (k < power) crosses a breakpoint of H."""
    pts = {Fraction(-1, 2)}
    for b in H.partition.breakpoints:
        for k in range(1, power + 1):
            pts.add(reduce(N**k * b))
    return Partition(pts)


def _fiber_points(part: Partition, N: int, power: int):
    """Numerators (cells x N**power) and the common denominator of all fiber points."""
    nums, den = part.midpoint_grid()
    M = N**power
    js = np.arange(M, dtype=nums.dtype)
    return nums[:, None] + js[None, :] * den, den * M


def infer_multiplicity(H: StepFunction, N: int) -> MultiplicityFunction:
    """Read ``m`` off ``diag(sum_fiber H H^*) / N``, rounded to 0/1 per row."""
    c = H.shape[0]
    part = _fiber_partition(H, N)
    pts, den = _fiber_points(part, N, 1)
    vals = H.at(pts, den)  # cells x N x c x c
    d = np.einsum("kzij,kzij->ki", vals, vals.conj()).real / N
    m = StepFunction(part, np.rint(d).astype(np.int64).clip(0, 1).sum(axis=1)).simplify()
    return MultiplicityFunction(m, c, N)


# verification -------------------------------------------------------------


@dataclass
class Report:
    passed: bool
    max_deviation: float = 0.0
    failures: list = field(default_factory=list)
    detail: str = ""

    def to_json(self) -> dict:
        def enc(x):
            if isinstance(x, Fraction):
                return format_rational(x)
            if isinstance(x, (np.floating, float)):
                return float(x)
            if isinstance(x, (np.integer,)):
                return int(x)
            return x
        return {"passed": self.passed, "max_deviation": self.max_deviation,
                "failures": [[enc(x) for x in f] for f in self.failures[:50]],
                "n_failures": len(self.failures), "detail": self.detail}


def _sigma_stack(m: MultiplicityFunction) -> StepFunction:
    return stack([sigma(m, i) for i in range(1, m.c + 1)])


def verify_support(F: FilterMatrix) -> Report:
    """Every ``h_ij`` must vanish exactly off ``sigma_j``; failures are ``(i, j, lo, hi)``."""
    sig = _sigma_stack(F.m)
    part = refine(F.H.partition, sig.partition)
    H = F.H.on(part).values
    S = sig.on(part).values
    failures = []
    for k, (lo, hi) in enumerate(part.cells()):
        for i in range(F.c):
            for j in range(F.c):
                if H[k, i, j] != 0 and S[k, j] == 0:
                    failures.append((i + 1, j + 1, lo, hi))
    return Report(not failures, failures=failures)


def verify_row_support(F: FilterMatrix) -> Report:
    """Derived law: ``h_ij(zeta) != 0`` implies ``N zeta`` lies in ``sigma_i``."""
    sig = _sigma_stack(F.m).pullback(F.N)
    part = refine(F.H.partition, sig.partition)
    H = F.H.on(part).values
    S = sig.on(part).values
    failures = []
    for k, (lo, hi) in enumerate(part.cells()):
        for i in range(F.c):
            if S[k, i] == 0 and np.any(H[k, i] != 0):
                failures.append((i + 1, lo, hi))
    return Report(not failures, failures=failures)


def _fiber_products(F: FilterMatrix, n: int, budget: int | None):
    """Cell partition in omega and the ordered products A(zeta) for every fiber point.

    ``A(zeta) = H(alpha*^{n-1} zeta) ... H(alpha*^0 zeta)``.
    """
    N = F.N
    part = refine(_fiber_partition(F.H, N, n), F.m.m.partition)
    _check_budget(len(part), N**n, budget)
    pts, den = _fiber_points(part, N, n)
    A = None
    for k in range(n):
        Hk = F.H.at(pts * N**k, den)  # H(alpha*^k zeta)
        A = Hk if A is None else Hk @ A
    return part, A


def verify_superfilter(F: FilterMatrix, n: int = 1, tol: float = DEFAULT_TOL,
                       budget: int | None = None) -> Report:
    """Iterated filter identity: fiber sum of ``A A^*`` equals ``N**n * Sigma(omega)``.

    Failures are ``(lo, hi, i, i', deviation)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    part, A = _fiber_products(F, n, budget)
    lhs = np.einsum("kzij,kzlj->kil", A, A.conj())
    sig = _sigma_stack(F.m).on(part).values
    target = (F.N**n) * np.einsum("ki,il->kil", sig, np.eye(F.c))
    dev = np.abs(lhs - target)
    failures = []
    cells = part.cells()
    for k, i, l in zip(*np.nonzero(dev > tol)):
        lo, hi = cells[k]
        failures.append((lo, hi, int(i) + 1, int(l) + 1, float(dev[k, i, l])))
    return Report(not failures, float(dev.max()) if dev.size else 0.0, failures)


def verify_filter_equation(F: FilterMatrix, tol: float = DEFAULT_TOL) -> Report:
    return verify_superfilter(F, 1, tol)


@dataclass
class LowPassCertificate:
    rank: int
    radius: Fraction
    block_ok: bool
    max_deviation: float
    reason: str = ""

    @property
    def valid(self) -> bool:
        return self.block_ok and self.radius > 0

    def to_json(self) -> dict:
        return {"rank": self.rank, "radius": format_rational(self.radius), "valid": self.valid,
                "block_ok": self.block_ok, "max_deviation": self.max_deviation,
                "reason": self.reason}


def lowpass_block(N: int, c: int, a: int) -> np.ndarray:
    B = np.zeros((c, c), dtype=np.complex128)
    B[:a, :a] = np.sqrt(N) * np.eye(a)
    return B


def constancy_radius(f: StepFunction) -> Fraction:
    """Largest ``eps`` with ``f`` constant on ``(-eps, eps)`` (0 if ``f`` jumps at 0)."""
    g = f.simplify()
    part = g.partition
    if len(part) == 1:
        return HALF
    if 0 in part.breakpoints:
        return Fraction(0)
    lo, hi = part.cells()[part.locate(0)]
    if not lo <= 0 < hi:
        lo, hi = lo - 1, hi - 1
    return min(-lo, hi)


def check_lowpass(F: FilterMatrix, a: int, tol: float = DEFAULT_TOL) -> LowPassCertificate:
    """Certify ``H`` constant near the identity with value ``diag(sqrt(N) 1_a, 0)``."""
    if not 1 <= a <= F.c:
        raise ValueError(f"rank must lie in [1, {F.c}]")
    radius = constancy_radius(F.H)
    if radius == 0:
        return LowPassCertificate(a, radius, False, float("inf"), "H jumps at the identity")
    dev = float(np.abs(F.H(0) - lowpass_block(F.N, F.c, a)).max())
    ok = dev <= tol
    reason = "" if ok else f"H(0) differs from the rank-{a} block by {dev:.3g}"
    return LowPassCertificate(a, radius, ok, dev, reason)


def scale_check(F: FilterMatrix) -> float:
    """``|sum_ij int |h_ij|^2 - sum_i lambda(sigma_i)|``."""
    energy = float(np.sum(F.H.map(lambda v: np.abs(v) ** 2).integral()))
    target = sum(float(sigma(F.m, i).integral()) for i in range(1, F.c + 1))
    return abs(energy - target)


# synthesis ----------------------------------------------------------------


def synthesize(m: MultiplicityFunction, a: int) -> FilterMatrix:
    """Low-pass filter of rank ``a`` for ``m`` by the counting construction.

    Points are written ``omega + j/N`` with ``omega`` in the section image
    ``C = [-1/(2N), 1/(2N))``.  On ``W = [-eps/N, eps/N)`` the first ``a``
    rows are ``sqrt(N)`` at the ``j = 0`` coordinate; every other required
    row takes the next free coordinate ``(col, j)`` with ``col <= m(omega + j/N)``,
    in the order ``j = 1, ..., N-1, 0`` and then ``col`` ascending.  Distinct
    coordinates make the rows orthogonal with squared norm ``N``.
    """
    window = rank_window(m)
    if a not in window:
        raise RankOutOfWindow(f"rank {a} is outside the admissible window {window.ranks}")
    N, c = m.N, m.c
    eps = window.radius
    edge = Fraction(1, 2 * N)
    w_lo, w_hi = -eps / N, eps / N

    cuts = {-edge, edge, w_lo, w_hi}
    for b in m.m.partition.breakpoints:
        cuts.add(b / N)  # m(N omega) jumps
        for j in range(N):
            cuts.add(reduce(b - Fraction(j, N)))  # m(omega + j/N) jumps
    cuts = sorted(x for x in cuts if -edge <= x <= edge)

    order = [j for j in range(1, N)] + [0]
    pieces = []  # (lo, hi, c x c matrix) in the full circle
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = (lo + hi) / 2
        d = [m(mid + Fraction(j, N)) for j in range(N)]
        M = m(N * mid)
        in_w = w_lo <= lo and hi <= w_hi
        rows = np.zeros((c, c, N), dtype=np.complex128)  # row i -> entry (col, j)
        coords = [(col, j) for j in order for col in range(d[j])]
        first = 0
        if in_w:
            for i in range(a):
                rows[i, i, 0] = np.sqrt(N)
            coords = [(col, j) for col, j in coords if j != 0]
            first = a
        need = M - first
        if need > len(coords):
            raise InsufficientDimensions(
                f"cell [{lo}, {hi}): {need} rows needed, {len(coords)} coordinates available")
        for i, (col, j) in zip(range(first, M), coords):
            rows[i, col, j] = np.sqrt(N)
        for j in range(N):
            shift = Fraction(j, N)
            pieces.append((lo + shift, hi + shift, rows[:, :, j]))

    part = Partition(reduce(lo) for lo, _, _ in pieces)
    vals = np.zeros((len(part), c, c), dtype=np.complex128)
    for lo, _, mat in pieces:
        vals[part.locate(lo)] = mat
    return FilterMatrix(StepFunction(part, vals), m)
