"""Multiplicity functions: consistency, complementary multiplicity, rank window."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circle import (
    HALF,
    ParseError,
    Partition,
    StepFunction,
    _check_modulus,
    format_rational,
    reduce,
    refine,
    stack,
)


class ConsistencyViolation(ValueError):
    """The consistency inequality fails, so the complement would be negative."""

    def __init__(self, violations):
        self.violations = violations
        lo, hi, mv, s = violations[0]
        super().__init__(
            f"consistency inequality fails on {len(violations)} cell(s), "
            f"first [{lo}, {hi}): m = {mv} > fiber sum {s}"
        )


class EmptyWindow(ValueError):
    """No positive rank ``a`` satisfies ``m - m~ <= a <= m`` near the identity."""


@dataclass(frozen=True, eq=False)
class MultiplicityFunction:
    """Integer step function ``m`` with values in ``{0, ..., c}`` for dilation by ``N``."""

    m: StepFunction
    c: int
    N: int

    def __post_init__(self):
        _check_modulus(self.N)
        if not np.issubdtype(self.m.dtype, np.integer) or self.m.shape != ():
            raise TypeError("a multiplicity function needs scalar integer values")
        if self.c < 1:
            raise ValueError("bound c must be positive")
        v = self.m.values
        if v.min() < 0 or v.max() > self.c:
            raise ValueError(f"values must lie in [0, {self.c}], got [{v.min()}, {v.max()}]")

    @classmethod
    def from_pieces(cls, pieces, N: int = 2, c: int | None = None) -> "MultiplicityFunction":
        m = StepFunction.from_pieces(pieces, default=0, dtype=np.int64)
        return cls(m, int(c if c is not None else max(1, m.values.max())), N)

    @classmethod
    def constant(cls, value: int, N: int = 2) -> "MultiplicityFunction":
        return cls(StepFunction.constant(value, dtype=np.int64), max(1, value), N)

    def __call__(self, x) -> int:
        return int(self.m(x))

    def tighten(self) -> "MultiplicityFunction":
        return MultiplicityFunction(self.m, max(1, int(self.m.values.max())), self.N)

    def to_json(self) -> dict:
        return {"N": self.N, "c": self.c, **self.m.to_json()}

    @classmethod
    def from_json(cls, doc) -> "MultiplicityFunction":
        if not isinstance(doc, dict):
            raise ParseError("expected an object")
        for key in doc:
            if key not in ("N", "c", "pieces"):
                raise ParseError(f"unknown field {key!r}", f"/{key}")
        N, c = doc.get("N"), doc.get("c")
        if not isinstance(N, int) or N < 2:
            raise ParseError("'N' must be an integer >= 2", "/N")
        if c is not None and (not isinstance(c, int) or c < 1):
            raise ParseError("'c' must be a positive integer", "/c")
        m = StepFunction.from_json({"pieces": doc.get("pieces")}, dtype=np.int64)
        for k, piece in enumerate(doc["pieces"]):
            if not isinstance(piece["value"], int) or piece["value"] < 0:
                raise ParseError("multiplicity values must be nonnegative integers",
                                 f"/pieces/{k}/value")
        c = c if c is not None else max(1, int(m.values.max()))
        if m.values.max() > c:
            raise ParseError(f"value {m.values.max()} exceeds bound c = {c}", "/c")
        return cls(m, c, N)


def fiber_sum(m: MultiplicityFunction) -> StepFunction:
    """``omega -> sum of m(zeta) over the N preimages zeta of omega``."""
    N = m.N
    part = refine(m.m.partition, Partition(reduce(N * b) for b in m.m.partition.breakpoints))
    nums, den = part.midpoint_grid()
    total = sum(m.m.at(nums + j * den, den * N) for j in range(N))
    return StepFunction(part, total)


def _cells(f: StepFunction):
    return f.partition.cells()


@dataclass
class ConsistencyReport:
    holds: bool
    violations: list = field(default_factory=list)  # (lo, hi, lhs, rhs)

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "violations": [
                {"lo": format_rational(lo), "hi": format_rational(hi), "lhs": int(a), "rhs": int(b)}
                for lo, hi, a, b in self.violations
            ],
        }


def check_consistency_inequality(m: MultiplicityFunction) -> ConsistencyReport:
    """``m(omega) <= sum over fiber of m``, cell by cell."""
    s = fiber_sum(m)
    part = s.partition
    mv, sv = m.m.on(part).values, s.values
    bad = [(lo, hi, int(a), int(b)) for (lo, hi), a, b in zip(part.cells(), mv, sv) if a > b]
    return ConsistencyReport(not bad, bad)


def complement(m: MultiplicityFunction) -> MultiplicityFunction:
    """``m~ = fiber sum of m - m``; raises :class:`ConsistencyViolation` if negative."""
    report = check_consistency_inequality(m)
    if not report.holds:
        raise ConsistencyViolation(report.violations)
    mt = (fiber_sum(m) - m.m).simplify()
    return MultiplicityFunction(mt, max(1, int(mt.values.max())), m.N)


def check_consistency_identity(m: MultiplicityFunction, mt: MultiplicityFunction
                               ) -> ConsistencyReport:
    """``m + m~ = fiber sum of m``; violations carry ``(lo, hi, m + m~, fiber sum)``."""
    s = fiber_sum(m)
    part = refine(s.partition, mt.m.partition)
    lhs = m.m.on(part).values + mt.m.on(part).values
    rhs = s.on(part).values
    bad = [(lo, hi, int(a), int(b)) for (lo, hi), a, b in zip(part.cells(), lhs, rhs) if a != b]
    return ConsistencyReport(not bad, bad)


def _merge_intervals(cells):
    out: list[list[Fraction]] = []
    for lo, hi in cells:
        if out and out[-1][1] == lo:
            out[-1][1] = hi
        else:
            out.append([lo, hi])
    return [tuple(x) for x in out]


def as_intervals(indicator: StepFunction) -> list[tuple[Fraction, Fraction]]:
    """Support of a step function as sorted disjoint intervals inside ``[-1/2, 1/2)``."""
    part = refine(indicator.partition, Partition([-HALF]))
    f = indicator.on(part)
    cells = [cell for cell, k in zip(part.cells(), range(len(part))) if np.any(f.values[k] != 0)]
    return _merge_intervals(cells)


def sigma(m: MultiplicityFunction, i: int) -> StepFunction:
    """Indicator of ``{omega : m(omega) >= i}`` as an integer step function."""
    return m.m.map(lambda v: (v >= i).astype(np.int64)).simplify()


def support_sets(m: MultiplicityFunction) -> list[list[tuple[Fraction, Fraction]]]:
    """Nested supports ``sigma_1 >= ... >= sigma_c`` as interval lists."""
    return [as_intervals(sigma(m, i)) for i in range(1, m.c + 1)]


@dataclass(frozen=True)
class RankWindow:
    lo: int
    hi: int
    radius: Fraction  # m and m~ are constant on (-radius, radius)
    m0: int
    mt0: int
    reason: str = ""

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    @property
    def ranks(self) -> list[int]:
        return list(range(self.lo, self.hi + 1))

    def __contains__(self, a: int) -> bool:
        return self.lo <= a <= self.hi

    def require(self) -> "RankWindow":
        if self.empty:
            raise EmptyWindow(self.reason or "no admissible rank")
        return self

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "ranks": self.ranks, "empty": self.empty,
                "radius": format_rational(self.radius), "m0": self.m0, "mt0": self.mt0,
                "reason": self.reason}


def joint_partition(m: MultiplicityFunction) -> StepFunction:
    """The pair ``(m, m~)`` as one vector step function on its coarsest partition."""
    mt = complement(m)
    return stack([m.m, mt.m]).simplify()


def rank_window(m: MultiplicityFunction) -> RankWindow:
    """Admissible ranks ``a`` with ``max(1, m - m~) <= a <= m`` on a neighborhood of 0."""
    pair = joint_partition(m)
    part = pair.partition
    if 0 in part.breakpoints and len(part) > 1:
        return RankWindow(1, 0, Fraction(0), -1, -1,
                          "m or its complement jumps at the identity")
    k = part.locate(0)
    if len(part) == 1:
        radius = HALF
    else:
        lo, hi = part.cells()[k]
        # the cell may be the wrapping one: shift so it contains 0
        if not lo <= 0 < hi:
            lo, hi = lo - 1, hi - 1
        radius = min(-lo, hi)
    m0, mt0 = (int(v) for v in pair.values[k])
    lo_rank, hi_rank = max(1, m0 - mt0), m0
    reason = "" if lo_rank <= hi_rank else f"m(0) - m~(0) = {m0 - mt0} exceeds m(0) = {m0}"
    if m0 == 0:
        reason = "m vanishes near the identity"
    return RankWindow(lo_rank, hi_rank, radius, m0, mt0, reason)
