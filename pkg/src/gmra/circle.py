"""Exact arithmetic on the circle R/Z.

Points are rationals in the fundamental domain [-1/2, 1/2).  A
:class:`Partition` is a finite set of breakpoints read cyclically, and a
:class:`StepFunction` carries one value per half-open cell ``[lo, hi)``.
Values live in a numpy array whose first axis indexes cells, so the same
class holds integer multiplicity functions, complex filter entries,
``c``-vectors and ``c x c`` matrices.
"""
from __future__ import annotations

import bisect
import math
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

HALF = Fraction(1, 2)

Rational = Fraction | int | str


class ParseError(ValueError):
    """Malformed serialized data; ``pointer`` is a JSON pointer into the document."""

    def __init__(self, message: str, pointer: str = "", path: str | None = None):
        self.message = message
        self.pointer = pointer
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.path or "<input>"
        return f"{where}#{self.pointer or '/'}: {self.message}"

    def at(self, prefix: str) -> "ParseError":
        return ParseError(self.message, prefix + self.pointer, self.path)


def as_rational(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {x!r}") from exc
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def reduce(x: Rational) -> Fraction:
    """Canonical representative of ``x mod 1`` in ``[-1/2, 1/2)``."""
    x = as_rational(x)
    return x - math.floor(x + HALF)


def preimages(omega: Rational, N: int) -> list[Fraction]:
    """The ``N`` points ``zeta`` with ``N*zeta = omega`` (mod 1), ``j = 0..N-1``."""
    _check_modulus(N)
    omega = reduce(omega)
    return [reduce((omega + j) / Fraction(N)) for j in range(N)]


def kernel(N: int, n: int) -> list[Fraction]:
    """Kernel of the ``n``-fold dilation: ``reduce(j / N**n)``."""
    _check_modulus(N)
    if n < 1:
        raise ValueError("n must be >= 1")
    M = N**n
    return [reduce(Fraction(j, M)) for j in range(M)]


def section(omega: Rational, N: int) -> Fraction:
    """Cross-section of the dilation with image ``[-1/(2N), 1/(2N))``."""
    _check_modulus(N)
    return reduce(omega) / N


def _check_modulus(N: int) -> None:
    if int(N) != N or N < 2:
        raise ValueError(f"dilation modulus must be an integer >= 2, got {N}")


def reduce_many(nums: np.ndarray, den: int) -> np.ndarray:
    """Numerators of ``reduce(n / den)`` over the same denominator."""
    return nums - den * ((2 * nums + den) // (2 * den))


def _int_array(values, bound: int) -> np.ndarray:
    # int64 unless products could overflow; object arrays keep exact Python ints
    if bound < 2**62:
        return np.asarray(values, dtype=np.int64)
    return np.asarray([int(v) for v in values], dtype=object)


class Partition:
    """Cyclically ordered breakpoints on the circle.

    Cell ``k`` is ``[b[k], b[k+1])``; the last cell wraps to ``b[0] + 1``.
    """

    __slots__ = ("breakpoints", "_den", "_hash")

    def __init__(self, breakpoints: Iterable[Rational]):
        pts = sorted({reduce(b) for b in breakpoints})
        if not pts:
            raise ValueError("a partition needs at least one breakpoint")
        self.breakpoints: tuple[Fraction, ...] = tuple(pts)
        self._den = math.lcm(*(b.denominator for b in pts))
        self._hash = None

    @classmethod
    def whole(cls) -> "Partition":
        return cls([-HALF])

    def __len__(self) -> int:
        return len(self.breakpoints)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and self.breakpoints == other.breakpoints

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.breakpoints)
        return self._hash

    def __repr__(self) -> str:
        return "Partition({" + ", ".join(map(str, self.breakpoints)) + "})"

    @property
    def denominator(self) -> int:
        return self._den

    def cells(self) -> list[tuple[Fraction, Fraction]]:
        b = self.breakpoints
        return [(b[k], b[k + 1]) for k in range(len(b) - 1)] + [(b[-1], b[0] + 1)]

    def lengths(self) -> list[Fraction]:
        return [hi - lo for lo, hi in self.cells()]

    def midpoints(self) -> list[Fraction]:
        return [reduce((lo + hi) / 2) for lo, hi in self.cells()]

    def locate(self, x: Rational) -> int:
        """Index of the cell containing ``x`` (breakpoints belong to the cell on their right)."""
        k = bisect.bisect_right(self.breakpoints, reduce(x)) - 1
        return k % len(self.breakpoints)

    def locate_many(self, nums: Sequence[int] | np.ndarray, den: int) -> np.ndarray:
        """Vectorized :meth:`locate` for the points ``nums[k] / den``, exactly."""
        L = self._den
        nums = np.asarray(nums)
        top = max(abs(int(nums.max())), abs(int(nums.min()))) if nums.size else 0
        bound = 4 * (top + den) * L + 4 * den * L
        nums = _int_array(nums.ravel(), bound).reshape(nums.shape)
        scaled = _int_array([b.numerator * (L // b.denominator) * den for b in self.breakpoints], bound)
        r = reduce_many(nums, den) * L
        idx = np.searchsorted(scaled, r, side="right") - 1
        return np.asarray(idx, dtype=np.int64) % len(self.breakpoints)

    def midpoint_grid(self) -> tuple[np.ndarray, int]:
        """Cell midpoints as integer numerators over one common denominator."""
        den = 2 * self._den
        mids = self.midpoints()
        nums = [m.numerator * (den // m.denominator) for m in mids]
        return _int_array(nums, 4 * den * den), den


def refine(*parts: Partition) -> Partition:
    """Coarsest common refinement."""
    pts: set[Fraction] = set()
    for p in parts:
        pts.update(p.breakpoints)
    return Partition(pts)


class StepFunction:
    """Piecewise-constant function on the circle.

    ``values[k]`` is the value on cell ``k`` of ``partition``; trailing axes
    give the value shape (``()`` for scalars, ``(c,)`` for vectors, ...).
    """

    __slots__ = ("partition", "values")

    def __init__(self, partition: Partition, values):
        values = np.array(values)
        if values.shape[:1] != (len(partition),):
            raise ValueError(
                f"{len(partition)} cells but values have leading dimension {values.shape[:1]}"
            )
        values.setflags(write=False)
        self.partition = partition
        self.values = values

    # construction ---------------------------------------------------------

    @classmethod
    def constant(cls, value, partition: Partition | None = None, dtype=None) -> "StepFunction":
        partition = partition or Partition.whole()
        v = np.asarray(value, dtype=dtype)
        return cls(partition, np.broadcast_to(v, (len(partition),) + v.shape).copy())

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[Rational, Rational, object]], default=0,
                    dtype=None) -> "StepFunction":
        """Build from half-open pieces ``[lo, hi)``; uncovered points get ``default``.

        A piece may extend past ``1/2`` (it is wrapped); later pieces win on overlap.
        """
        spans = []
        for lo, hi, value in pieces:
            lo, hi = as_rational(lo), as_rational(hi)
            if not lo < hi <= lo + 1:
                raise ValueError(f"bad piece [{lo}, {hi})")
            spans.append((lo, hi, value))
        pts = {-HALF}
        for lo, hi, _ in spans:
            pts.update((reduce(lo), reduce(hi)))
        part = Partition(pts)
        default = np.asarray(default, dtype=dtype)
        vals = np.broadcast_to(default, (len(part),) + default.shape).copy()
        for k, mid in enumerate(part.midpoints()):
            for lo, hi, value in spans:
                x = mid - math.floor(mid - lo)  # representative in [lo, lo+1)
                if lo <= x < hi:
                    vals[k] = value
        return cls(part, vals).simplify()

    @classmethod
    def indicator(cls, intervals: Iterable[tuple[Rational, Rational]], value=1, dtype=None
                  ) -> "StepFunction":
        zero = np.zeros_like(np.asarray(value, dtype=dtype))
        return cls.from_pieces(((lo, hi, value) for lo, hi in intervals), default=zero, dtype=dtype)

    @classmethod
    def tabulate(cls, partition: Partition, fn: Callable[[Fraction], object], dtype=None
                 ) -> "StepFunction":
        """Evaluate ``fn`` at each cell midpoint."""
        return cls(partition, np.array([fn(m) for m in partition.midpoints()], dtype=dtype))

    # evaluation -----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape[1:]

    @property
    def dtype(self):
        return self.values.dtype

    def __call__(self, x: Rational):
        return self.values[self.partition.locate(x)]

    def at(self, nums, den: int) -> np.ndarray:
        """Values at the points ``nums / den`` (exact cell lookup)."""
        return self.values[self.partition.locate_many(nums, den)]

    def on(self, partition: Partition) -> "StepFunction":
        """Restate on a finer partition (must refine ``self.partition``)."""
        if partition == self.partition:
            return self
        nums, den = partition.midpoint_grid()
        return StepFunction(partition, self.at(nums, den))

    def __repr__(self) -> str:
        return f"StepFunction({len(self.partition)} cells, shape={self.shape}, dtype={self.dtype})"

    # algebra --------------------------------------------------------------

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "StepFunction":
        """Apply ``fn`` to the whole value array (cells on axis 0)."""
        return StepFunction(self.partition, fn(self.values))

    def __add__(self, other):
        return combine(np.add, self, other)

    def __sub__(self, other):
        return combine(np.subtract, self, other)

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            return combine(np.multiply, self, other)
        return self.map(lambda v: v * other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.map(np.negative)

    def conj(self) -> "StepFunction":
        return self.map(np.conj)

    def equals(self, other: "StepFunction", tol: float = 0.0) -> bool:
        part = refine(self.partition, other.partition)
        a, b = self.on(part).values, other.on(part).values
        if a.shape != b.shape:
            return False
        if tol == 0.0:
            return bool(np.array_equal(a, b))
        return bool(np.all(np.abs(a - b) <= tol))

    def max_abs_diff(self, other: "StepFunction") -> float:
        part = refine(self.partition, other.partition)
        d = np.abs(self.on(part).values - other.on(part).values)
        return float(d.max()) if d.size else 0.0

    def simplify(self, keep: Iterable[Rational] = ()) -> "StepFunction":
        """Drop breakpoints between cells with identical values (except ``keep``)."""
        keep = {reduce(k) for k in keep}
        b = self.partition.breakpoints
        v = self.values
        n = len(b)
        if n == 1:
            return self
        flat = v.reshape(n, -1)
        same_as_prev = np.all(flat == np.roll(flat, 1, axis=0), axis=1)
        retain = [k for k in range(n) if not same_as_prev[k] or b[k] in keep]
        if len(retain) == n:
            return self
        if not retain:
            return StepFunction(Partition.whole(), v[:1])
        return StepFunction(Partition(b[k] for k in retain), v[retain])

    def integral(self):
        """Integral against normalized Haar measure (exact for integer values)."""
        lengths = self.partition.lengths()
        if np.issubdtype(self.dtype, np.integer):
            flat = self.values.reshape(len(lengths), -1)
            out = [sum((int(flat[k, i]) * lengths[k] for k in range(len(lengths))), Fraction(0))
                   for i in range(flat.shape[1])]
            return out[0] if self.shape == () else np.array(out, dtype=object).reshape(self.shape)
        w = np.array([float(x) for x in lengths])
        return np.tensordot(w, self.values, axes=(0, 0))

    def pullback(self, N: int) -> "StepFunction":
        """``x -> f(N x mod 1)``."""
        return pullback_dilation(self, N)

    def support_cells(self) -> list[int]:
        flat = self.values.reshape(len(self.partition), -1)
        return [k for k in range(len(self.partition)) if np.any(flat[k] != 0)]

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        if self.shape != ():
            raise ValueError("only scalar step functions serialize directly")
        pieces = []
        for (lo, hi), v in zip(self.partition.cells(), self.values):
            pieces.append({"lo": format_rational(lo), "hi": format_rational(hi),
                           "value": _value_to_json(v)})
        return {"pieces": pieces}

    @classmethod
    def from_json(cls, doc, dtype=None, scale=None) -> "StepFunction":
        """Inverse of :meth:`to_json`; ``scale`` multiplies values on load."""
        if not isinstance(doc, dict):
            raise ParseError("expected an object")
        extra = set(doc) - {"pieces"}
        if extra:
            raise ParseError(f"unknown field {sorted(extra)[0]!r}", "/" + sorted(extra)[0])
        pieces = doc.get("pieces")
        if not isinstance(pieces, list) or not pieces:
            raise ParseError("'pieces' must be a nonempty list", "/pieces")
        parsed = []
        for k, piece in enumerate(pieces):
            ptr = f"/pieces/{k}"
            if not isinstance(piece, dict):
                raise ParseError("expected an object", ptr)
            for key in piece:
                if key not in ("lo", "hi", "value"):
                    raise ParseError(f"unknown field {key!r}", f"{ptr}/{key}")
            ends = []
            for key in ("lo", "hi"):
                if key not in piece:
                    raise ParseError(f"missing {key!r}", ptr)
                try:
                    ends.append(as_rational(piece[key]))
                except (ParseError, TypeError) as exc:
                    raise ParseError(str(getattr(exc, "message", exc)), f"{ptr}/{key}") from None
            lo, hi = ends
            if not lo < hi <= lo + 1:
                raise ParseError(f"empty or overlong piece [{lo}, {hi})", ptr)
            if "value" not in piece:
                raise ParseError("missing 'value'", ptr)
            try:
                value = _value_from_json(piece["value"])
            except ParseError as exc:
                raise exc.at(f"{ptr}/value")
            if scale is not None:
                value = value * scale
            parsed.append((lo, hi, value))
        covered = sum((hi - lo for lo, hi, _ in parsed), Fraction(0))
        if covered != 1:
            raise ParseError(f"pieces cover total length {covered}, expected 1", "/pieces")
        if dtype is None:
            dtype = np.int64 if all(isinstance(v, int) for *_, v in parsed) else np.complex128
        zero = np.zeros((), dtype=dtype)
        return cls.from_pieces(parsed, default=zero, dtype=dtype)


def _value_to_json(v):
    v = v.item() if isinstance(v, np.generic) or isinstance(v, np.ndarray) else v
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float):
        return v
    return int(v)


def _value_from_json(v):
    if isinstance(v, bool):
        raise ParseError("booleans are not values")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return complex(v)
    if isinstance(v, str):
        return float(as_rational(v)) + 0j
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise ParseError(f"bad value {v!r}; expected a number or [re, im]")


def combine(fn, *fs: StepFunction) -> StepFunction:
    """Apply ``fn`` cellwise on the common refinement of ``fs``."""
    part = refine(*(f.partition for f in fs))
    return StepFunction(part, fn(*(f.on(part).values for f in fs)))


def stack(fs: Sequence[StepFunction], shape: tuple[int, ...] | None = None) -> StepFunction:
    """Scalar step functions -> one array-valued step function of ``shape``."""
    part = refine(*(f.partition for f in fs))
    vals = np.stack([f.on(part).values for f in fs], axis=1)
    if shape is not None:
        vals = vals.reshape((len(part),) + tuple(shape))
    return StepFunction(part, vals)


def component(f: StepFunction, index) -> StepFunction:
    if not isinstance(index, tuple):
        index = (index,)
    return StepFunction(f.partition, f.values[(slice(None),) + index]).simplify()


def dilation_partition(p: Partition, N: int) -> Partition:
    """Breakpoints of ``x -> f(Nx)`` for ``f`` constant on the cells of ``p``."""
    return Partition(reduce((b + j) / Fraction(N)) for b in p.breakpoints for j in range(N))


def pullback_dilation(f: StepFunction, N: int) -> StepFunction:
    """``g(x) = f(reduce(N x))``."""
    _check_modulus(N)
    part = dilation_partition(f.partition, N)
    nums, den = part.midpoint_grid()
    return StepFunction(part, f.at(nums * N, den))
