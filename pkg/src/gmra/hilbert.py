"""The space K = (+)_i L^2(sigma_i) on modulated step vectors, and S_H.

A vector is a finite sum ``sum_gamma e^{2 pi i gamma x} c_gamma(x)`` where
``x`` is the representative in ``[-1/2, 1/2)``, each ``gamma`` lies in
``Z[1/N]`` and ``c_gamma`` is a ``C^c``-valued step function.  Every
coefficient partition contains ``-1/2`` so no cell straddles the point where
a non-integer frequency is discontinuous.  The class is closed under the
translation representation, ``S_H`` and ``S_H^*``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .circle import (
    HALF,
    ParseError,
    Partition,
    StepFunction,
    as_rational,
    dilation_partition,
    format_rational,
    reduce,
    reduce_many,
    refine,
    stack,
)
from .filterbank import (
    DEFAULT_TOL,
    FilterMatrix,
    _check_budget,
    _sigma_stack,
    verify_filter_equation,
    verify_support,
)

TWO_PI_I = 2j * np.pi
_CUT = Partition([-HALF])


def _frac_phase(gamma: Fraction, ints: np.ndarray, scale: int = 1) -> np.ndarray:
    """``exp(2 pi i gamma * ints / scale)`` with the exponent reduced mod 1 exactly."""
    q = gamma.denominator * scale
    r = (gamma.numerator * np.asarray(ints, dtype=object)) % q
    return np.exp(TWO_PI_I * np.array([int(x) / q for x in r.ravel()]).reshape(r.shape))


class ModulatedStepVector:
    """Finite sum of frequency-modulated ``C^c``-valued step functions."""

    __slots__ = ("terms", "c")

    def __init__(self, terms: dict[Fraction, StepFunction] | Iterable, c: int):
        self.c = c
        merged: dict[Fraction, StepFunction] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for gamma, coeff in items:
            gamma = as_rational(gamma)
            if coeff.shape != (c,):
                raise ValueError(f"coefficient shape {coeff.shape} != ({c},)")
            coeff = coeff.map(lambda v: v.astype(np.complex128))
            merged[gamma] = merged[gamma] + coeff if gamma in merged else coeff
        self.terms = {}
        for gamma in sorted(merged):
            coeff = merged[gamma]
            if not np.any(coeff.values != 0):
                continue
            self.terms[gamma] = coeff.on(refine(coeff.partition, _CUT)).simplify(keep=[-HALF])

    @classmethod
    def zero(cls, c: int) -> "ModulatedStepVector":
        return cls({}, c)

    @classmethod
    def single(cls, gamma, coeff: StepFunction) -> "ModulatedStepVector":
        return cls({as_rational(gamma): coeff}, coeff.shape[0])

    @classmethod
    def from_components(cls, gamma, comps: list[StepFunction]) -> "ModulatedStepVector":
        return cls.single(gamma, stack(comps))

    @property
    def frequencies(self) -> list[Fraction]:
        return list(self.terms)

    def __repr__(self) -> str:
        parts = ", ".join(f"{g}: {len(f.partition)} cells" for g, f in self.terms.items())
        return f"ModulatedStepVector(c={self.c}, {{{parts}}})"

    def __add__(self, other: "ModulatedStepVector") -> "ModulatedStepVector":
        return ModulatedStepVector(list(self.terms.items()) + list(other.terms.items()), self.c)

    def __neg__(self) -> "ModulatedStepVector":
        return ModulatedStepVector({g: -f for g, f in self.terms.items()}, self.c)

    def __sub__(self, other: "ModulatedStepVector") -> "ModulatedStepVector":
        return self + (-other)

    def __mul__(self, scalar) -> "ModulatedStepVector":
        return ModulatedStepVector({g: f * scalar for g, f in self.terms.items()}, self.c)

    __rmul__ = __mul__

    def __call__(self, x) -> np.ndarray:
        x = reduce(x)
        out = np.zeros(self.c, dtype=np.complex128)
        for gamma, coeff in self.terms.items():
            out += cmath.exp(TWO_PI_I * float(gamma * x)) * coeff(x)
        return out

    def at(self, nums: np.ndarray, den: int) -> np.ndarray:
        """Values at the points ``nums / den``; shape ``nums.shape + (c,)``."""
        nums = np.asarray(nums)
        r = reduce_many(nums, den)
        out = np.zeros(nums.shape + (self.c,), dtype=np.complex128)
        for gamma, coeff in self.terms.items():
            out += _frac_phase(gamma, r, den)[..., None] * coeff.at(r, den)
        return out

    def pointwise_norm_sq(self) -> StepFunction:
        """``omega -> ||f(omega)||^2``; only piecewise constant for a single frequency."""
        if len(self.terms) > 1:
            raise ValueError("pointwise norm of a mixed-frequency vector is not a step function")
        if not self.terms:
            return StepFunction.constant(0.0)
        (coeff,) = self.terms.values()
        return coeff.map(lambda v: np.sum(np.abs(v) ** 2, axis=-1)).simplify()

    def to_json(self) -> dict:
        return {"terms": [
            {"freq": format_rational(g),
             "coeffs": [StepFunction(f.partition, f.values[:, i]).simplify().to_json()
                        for i in range(self.c)]}
            for g, f in self.terms.items()]}

    @classmethod
    def from_json(cls, doc, c: int | None = None) -> "ModulatedStepVector":
        if not isinstance(doc, dict) or set(doc) - {"terms"}:
            raise ParseError("expected an object with a single 'terms' field")
        terms = doc.get("terms")
        if not isinstance(terms, list):
            raise ParseError("'terms' must be a list", "/terms")
        out = []
        for k, term in enumerate(terms):
            ptr = f"/terms/{k}"
            if not isinstance(term, dict) or set(term) - {"freq", "coeffs"}:
                raise ParseError("term must have exactly 'freq' and 'coeffs'", ptr)
            try:
                gamma = as_rational(term.get("freq", "0"))
            except ParseError as exc:
                raise exc.at(ptr + "/freq")
            coeffs = term.get("coeffs")
            if not isinstance(coeffs, list) or not coeffs:
                raise ParseError("'coeffs' must be a nonempty list", ptr + "/coeffs")
            if c is None:
                c = len(coeffs)
            if len(coeffs) != c:
                raise ParseError(f"expected {c} coefficient functions", ptr + "/coeffs")
            comps = []
            for i, e in enumerate(coeffs):
                try:
                    comps.append(StepFunction.from_json(e, dtype=np.complex128))
                except ParseError as exc:
                    raise exc.at(f"{ptr}/coeffs/{i}")
            out.append((gamma, stack(comps)))
        return cls(out, c or 1)


def _cell_integrals(part: Partition, delta: Fraction) -> np.ndarray:
    """``int_lo^hi exp(2 pi i delta x) dx`` per cell (partition contains -1/2)."""
    cells = part.cells()
    lengths = np.array([float(hi - lo) for lo, hi in cells])
    if delta == 0:
        return lengths.astype(np.complex128)
    mids = np.array([float((lo + hi) / 2) for lo, hi in cells])
    d = float(delta)
    # sinc form stays accurate when delta * length is tiny
    return np.exp(TWO_PI_I * d * mids) * lengths * np.sinc(d * lengths)


def inner_product(f: ModulatedStepVector, g: ModulatedStepVector) -> complex:
    """``<f, g> = int sum_i f_i(x) conj(g_i(x)) dx``."""
    total = 0j
    for gf, a in f.terms.items():
        for gg, b in g.terms.items():
            part = refine(a.partition, b.partition)
            prod = np.sum(a.on(part).values * b.on(part).values.conj(), axis=1)
            total += complex(np.dot(prod, _cell_integrals(part, gf - gg)))
    return total


def norm(f: ModulatedStepVector) -> float:
    return float(np.sqrt(max(inner_product(f, f).real, 0.0)))


def distance(f: ModulatedStepVector, g: ModulatedStepVector) -> float:
    return norm(f - g)


def in_space(f: ModulatedStepVector, m) -> bool:
    """Component ``i`` vanishes off ``sigma_i`` for every term."""
    sig = _sigma_stack(m)
    for coeff in f.terms.values():
        part = refine(coeff.partition, sig.partition)
        if np.any((coeff.on(part).values != 0) & (sig.on(part).values == 0)):
            return False
    return True


def apply_rho(gamma: int, f: ModulatedStepVector) -> ModulatedStepVector:
    """``(rho_gamma f)(omega) = e^{2 pi i gamma omega} f(omega)`` for integer ``gamma``."""
    if Fraction(gamma).denominator != 1:
        raise ValueError("rho is defined for integer gamma")
    return ModulatedStepVector({g + gamma: c for g, c in f.terms.items()}, f.c)


@dataclass(frozen=True)
class OperatorContext:
    """A verified filter, ready to define ``S_H`` and its adjoint."""

    F: FilterMatrix
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not verify_support(self.F).passed:
            raise ValueError("filter fails the support condition")
        rep = verify_filter_equation(self.F, self.tol)
        if not rep.passed:
            raise ValueError(f"filter fails the filter equation (max deviation {rep.max_deviation:.3g})")

    @classmethod
    def unchecked(cls, F: FilterMatrix) -> "OperatorContext":
        ctx = object.__new__(cls)
        object.__setattr__(ctx, "F", F)
        object.__setattr__(ctx, "tol", DEFAULT_TOL)
        return ctx

    @property
    def N(self) -> int:
        return self.F.N

    @property
    def c(self) -> int:
        return self.F.c


def apply_S_power(ctx: OperatorContext, f: ModulatedStepVector, n: int = 1,
                  budget: int | None = None) -> ModulatedStepVector:
    """``(S^n f)(w) = H^t(w) H^t(a* w) ... H^t(a*^{n-1} w) f(a*^n w)``."""
    if n < 0:
        raise ValueError("power must be >= 0")
    if n == 0:
        return f
    N, H = ctx.N, ctx.F.H
    Nn = N**n
    out = []
    for gamma, coeff in f.terms.items():
        parts = [dilation_partition(coeff.partition, Nn), _CUT,
                 Partition(Fraction(2 * k + 1, 2 * Nn) for k in range(Nn))]
        parts += [dilation_partition(H.partition, N**k) if k else H.partition for k in range(n)]
        part = refine(*parts)
        _check_budget(len(part), 1, budget)
        nums, den = part.midpoint_grid()
        y = reduce_many(nums * Nn, den)
        shift = (nums * Nn - y) // den
        val = coeff.at(y, den)
        for k in reversed(range(n)):
            Ht = np.swapaxes(H.at(nums * N**k, den), 1, 2)
            val = np.einsum("kij,kj->ki", Ht, val)
        val = val * _frac_phase(-gamma, shift)[:, None]
        out.append((gamma * Nn, StepFunction(part, val)))
    return ModulatedStepVector(out, f.c)


def apply_S_star_power(ctx: OperatorContext, f: ModulatedStepVector, n: int = 1,
                       budget: int | None = None) -> ModulatedStepVector:
    """``(S*^n f)(w) = N^-n sum_{a*^n z = w} conj(H(a*^{n-1} z)) ... conj(H(z)) f(z)``."""
    if n < 0:
        raise ValueError("power must be >= 0")
    if n == 0:
        return f
    N, H = ctx.N, ctx.F.H
    Nn = N**n
    out = []
    for gamma, coeff in f.terms.items():
        pts = {-HALF, Fraction(0)}
        pts.update(reduce(Nn * b) for b in coeff.partition.breakpoints)
        for b in H.partition.breakpoints:
            pts.update(reduce(N**k * b) for k in range(1, n + 1))
        part = Partition(pts)
        _check_budget(len(part), Nn, budget)
        nums, den = part.midpoint_grid()
        js = np.arange(Nn, dtype=nums.dtype)
        t = nums[:, None] + js[None, :] * den  # (omega + j) / N^n over den * N^n
        D = den * Nn
        z = reduce_many(t, D)
        wrap = (t - z) // D  # integer shift k_j
        val = coeff.at(z, D)  # cells x fiber x c
        for k in range(n):
            Hk = H.at(z * N**k, D).conj()
            val = np.einsum("kzij,kzj->kzi", Hk, val)
        phase = _frac_phase(gamma, js[None, :] - Nn * wrap, Nn)
        val = np.sum(val * phase[..., None], axis=1) / Nn
        out.append((gamma / Nn, StepFunction(part, val)))
    return ModulatedStepVector(out, f.c)


def apply_S(ctx: OperatorContext, f: ModulatedStepVector) -> ModulatedStepVector:
    return apply_S_power(ctx, f, 1)


def apply_S_star(ctx: OperatorContext, f: ModulatedStepVector) -> ModulatedStepVector:
    return apply_S_star_power(ctx, f, 1)


def check_intertwining(ctx: OperatorContext, gamma: int, f: ModulatedStepVector) -> float:
    """``|| S rho_gamma f - rho_{N gamma} S f ||``."""
    lhs = apply_S(ctx, apply_rho(gamma, f))
    rhs = apply_rho(ctx.N * gamma, apply_S(ctx, f))
    return distance(lhs, rhs)


def random_vector(m, rng: np.random.Generator, n_terms: int = 2, n_breaks: int = 4,
                  freqs: Iterable | None = None, denominators=(7, 8, 12, 15)
                  ) -> ModulatedStepVector:
    """Random element of K: component ``i`` is masked to ``sigma_i``."""
    c = m.c
    sig = _sigma_stack(m)
    freqs = list(freqs) if freqs is not None else [-3, -2, -1, 0, 1, 2, 3, Fraction(1, 2),
                                                    Fraction(-3, 4)]
    terms = []
    for _ in range(n_terms):
        gamma = Fraction(freqs[rng.integers(len(freqs))])
        q = int(denominators[rng.integers(len(denominators))])
        cuts = {Fraction(int(k), q) for k in rng.integers(-q, q, size=n_breaks)}
        part = refine(Partition(cuts), sig.partition, _CUT)
        vals = rng.normal(size=(len(part), c)) + 1j * rng.normal(size=(len(part), c))
        vals = vals * sig.on(part).values
        terms.append((gamma, StepFunction(part, vals)))
    return ModulatedStepVector(terms, c)


def normalized(f: ModulatedStepVector) -> ModulatedStepVector:
    n = norm(f)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return f * (1.0 / n)
