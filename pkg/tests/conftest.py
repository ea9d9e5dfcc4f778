from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from gmra import gallery
from gmra.circle import HALF, Partition, StepFunction
from gmra.filterbank import synthesize
from gmra.hilbert import OperatorContext, random_vector
from gmra.multiplicity import MultiplicityFunction

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

rationals = st.fractions(min_value=-3, max_value=3, max_denominator=60)
circle_points = st.fractions(min_value=-HALF, max_value=HALF, max_denominator=60).filter(
    lambda x: x < HALF)
moduli = st.integers(min_value=2, max_value=5)


@st.composite
def partitions(draw, max_breaks=6):
    bps = draw(st.lists(circle_points, min_size=0, max_size=max_breaks, unique=True))
    return Partition(bps) if bps else Partition.whole()


@st.composite
def int_step_functions(draw, lo=0, hi=3):
    p = draw(partitions())
    vals = draw(st.lists(st.integers(lo, hi), min_size=len(p), max_size=len(p)))
    return StepFunction(p, np.array(vals, dtype=np.int64))


@st.composite
def multiplicities(draw, c=3):
    N = draw(moduli)
    f = draw(int_step_functions(0, c))
    return MultiplicityFunction(f, c, N)


def _contexts():
    out = {name: gallery.filter_matrix(name) for name in
           ("journe_rank2", "example2_rank2a", "example2_rank3", "haar", "identity")}
    out["synth_journe_1"] = synthesize(gallery.journe_m(), 1)
    out["synth_example2_2"] = synthesize(gallery.example2_m(), 2)
    return {k: OperatorContext(F) for k, F in out.items()}


CONTEXTS = _contexts()


@pytest.fixture(params=sorted(CONTEXTS))
def ctx(request):
    return CONTEXTS[request.param]


@pytest.fixture
def journe_ctx():
    return CONTEXTS["journe_rank2"]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def vectors_for(ctx, rng, count):
    return [random_vector(ctx.F.m, rng) for _ in range(count)]


def frac(s: str) -> Fraction:
    return Fraction(s)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: (int(k.split("[")[0]), k)):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
