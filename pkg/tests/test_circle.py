from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gmra.circle import (
    HALF,
    ParseError,
    Partition,
    StepFunction,
    format_rational,
    kernel,
    preimages,
    reduce,
    reduce_many,
    refine,
    section,
)

from conftest import circle_points, int_step_functions, moduli, partitions, rationals

F = Fraction


class TestReduce:
    @pytest.mark.parametrize("x, expected", [
        (F(3, 4), F(-1, 4)), (F(1, 2), F(-1, 2)), (F(-1, 2), F(-1, 2)),
        (F(7, 3), F(1, 3)), (0, 0), (F(-5, 7), F(2, 7)),
    ])
    def test_examples(self, x, expected):
        assert reduce(x) == expected

    @given(rationals)
    def test_range(self, x):
        r = reduce(x)
        assert -HALF <= r < HALF and (x - r).denominator == 1

    @given(rationals, rationals)
    def test_homomorphism(self, x, y):
        assert reduce(x + y) == reduce(reduce(x) + reduce(y))

    @given(st.lists(rationals, min_size=1, max_size=20))
    def test_vectorized_agrees(self, xs):
        den = int(np.lcm.reduce([x.denominator for x in xs]))
        nums = np.array([int(x * den) for x in xs])
        out = reduce_many(nums, den)
        assert [F(int(n), den) for n in out] == [reduce(x) for x in xs]

    def test_rejects_floats(self):
        with pytest.raises(TypeError):
            reduce(0.25)


class TestFibers:
    def test_preimages_of_zero(self):
        assert preimages(0, 2) == [F(0), F(-1, 2)]

    def test_kernel(self):
        assert sorted(kernel(2, 2)) == [F(-1, 2), F(-1, 4), F(0), F(1, 4)]
        assert len(kernel(3, 3)) == 27

    @given(circle_points, moduli)
    def test_preimage_round_trip(self, w, N):
        zs = preimages(w, N)
        assert len(set(zs)) == N
        assert all(reduce(N * z) == w for z in zs)

    @given(circle_points, moduli)
    def test_section_is_preimage(self, w, N):
        s = section(w, N)
        assert s in preimages(w, N)
        assert -HALF / N <= s < HALF / N

    def test_bad_modulus(self):
        with pytest.raises(ValueError):
            preimages(0, 1)


class TestPartition:
    def test_whole_cell(self):
        p = Partition.whole()
        assert p.cells() == [(-HALF, HALF)]

    def test_wrapping_cell_and_lookup(self):
        p = Partition([F(-1, 7), F(1, 7)])
        assert p.cells() == [(F(-1, 7), F(1, 7)), (F(1, 7), F(6, 7))]
        assert p.locate(F(1, 7)) == 1  # breakpoint joins the cell on its right
        assert p.locate(F(-1, 7)) == 0
        assert p.locate(F(-1, 2)) == 1

    @given(partitions(), partitions())
    def test_refine_commutative(self, p, q):
        assert refine(p, q) == refine(q, p)

    @given(partitions(), partitions(), partitions())
    def test_refine_associative(self, p, q, r):
        assert refine(refine(p, q), r) == refine(p, refine(q, r))

    @given(partitions())
    def test_refine_idempotent(self, p):
        assert refine(p, p) == p

    @given(partitions())
    def test_lengths_sum_to_one(self, p):
        assert sum(p.lengths()) == 1

    @given(partitions(), st.lists(circle_points, min_size=1, max_size=15))
    def test_locate_many_matches_locate(self, p, xs):
        den = int(np.lcm.reduce([x.denominator for x in xs]))
        got = p.locate_many(np.array([int(x * den) for x in xs]), den)
        assert list(got) == [p.locate(x) for x in xs]


class TestStepFunction:
    def test_indicator_values(self):
        f = StepFunction.indicator([(F(-1, 7), F(1, 7))])
        assert f(0) == 1 and f(F(1, 7)) == 0 and f(F(-1, 7)) == 1

    def test_wrapping_piece(self):
        f = StepFunction.indicator([(F(3, 7), F(4, 7))])
        assert f(F(-1, 2)) == 1 and f(F(3, 7)) == 1 and f(F(-3, 7)) == 0

    def test_integral_is_exact(self):
        f = StepFunction.indicator([(F(-1, 7), F(1, 7))], value=2)
        assert f.integral() == F(4, 7)

    @given(int_step_functions(), moduli)
    def test_pullback_preserves_measure(self, f, N):
        assert f.pullback(N).integral() == f.integral()

    @given(int_step_functions(), moduli, circle_points)
    def test_pullback_is_composition(self, f, N, x):
        assert f.pullback(N)(x) == f(reduce(N * x))

    @given(int_step_functions(), int_step_functions())
    def test_arithmetic_pointwise(self, f, g):
        h = f + g * g
        for x in refine(f.partition, g.partition).midpoints():
            assert h(x) == f(x) + g(x) ** 2

    @given(int_step_functions())
    def test_simplify_preserves_values(self, f):
        s = f.simplify()
        assert s.equals(f)
        assert len(s.partition) <= len(f.partition)

    def test_values_are_immutable(self):
        vals = np.array([1, 2])
        f = StepFunction(Partition([0, F(1, 4)]), vals)
        vals[0] = 9
        assert f(F(1, 8)) == 1
        with pytest.raises(ValueError):
            f.values[0] = 5

    @given(int_step_functions())
    def test_json_round_trip(self, f):
        assert StepFunction.from_json(f.to_json()).equals(f)

    def test_complex_json_round_trip(self):
        f = StepFunction.from_pieces([(F(-1, 4), F(1, 4), 1 + 2j)], default=0j)
        doc = f.to_json()
        assert doc["pieces"][0]["value"] in ([1.0, 2.0], [0.0, 0.0])
        assert StepFunction.from_json(doc).equals(f)

    def test_format_rational(self):
        assert format_rational(F(2)) == "2/1"
        assert format_rational(F(-3, 6)) == "-1/2"


class TestParseErrors:
    def _doc(self, **piece):
        base = {"lo": "-1/2", "hi": "1/2", "value": 1}
        base.update(piece)
        return {"pieces": [base]}

    def test_bad_rational_pointer(self):
        with pytest.raises(ParseError) as exc:
            StepFunction.from_json(self._doc(hi="x"))
        assert exc.value.pointer == "/pieces/0/hi"

    def test_unknown_field(self):
        with pytest.raises(ParseError) as exc:
            StepFunction.from_json(self._doc(colour=1))
        assert exc.value.pointer == "/pieces/0/colour"

    def test_incomplete_cover(self):
        with pytest.raises(ParseError) as exc:
            StepFunction.from_json(self._doc(hi="0"))
        assert exc.value.pointer == "/pieces"

    def test_message_includes_path(self):
        err = ParseError("boom", "/a/0", "m.json")
        assert str(err) == "m.json#/a/0: boom"
