import numpy as np
import pytest

from gmra.hilbert import apply_S, random_vector
from gmra.limit import (
    LimitVector,
    apply_delta,
    apply_pi,
    apply_S_infinity,
    check_gmra_axioms,
    default_test_vectors,
    limit_distance,
    limit_equal,
    limit_inner,
    limit_norm,
    lift,
    project_V,
)

from conftest import CONTEXTS


@pytest.fixture
def vec(journe_ctx):
    return random_vector(journe_ctx.F.m, np.random.default_rng(7))


def test_equivalent_representatives(journe_ctx, vec):
    u = LimitVector(1, vec)
    v = LimitVector(2, apply_S(journe_ctx, vec))
    assert limit_equal(journe_ctx, u, v)
    assert limit_norm(journe_ctx, u) == pytest.approx(limit_norm(journe_ctx, v))


def test_lift_refuses_to_lower(journe_ctx, vec):
    with pytest.raises(ValueError):
        lift(journe_ctx, LimitVector(3, vec), 1)


def test_delta_inverts_shift(journe_ctx, vec):
    for level in (0, 2):
        v = LimitVector(level, vec)
        assert limit_equal(journe_ctx, apply_S_infinity(journe_ctx, apply_delta(v)), v)
        assert limit_equal(journe_ctx, apply_delta(apply_S_infinity(journe_ctx, v)), v)


def test_delta_unitary(journe_ctx, vec):
    u, w = LimitVector(0, vec), LimitVector(2, vec * 0.5)
    assert limit_inner(journe_ctx, apply_delta(u), apply_delta(w)) == pytest.approx(
        limit_inner(journe_ctx, u, w), abs=1e-12)


def test_pi_group_law(journe_ctx, vec):
    v = LimitVector(1, vec)
    for a, b in ((1, 2), (-3, 1), (2, -2)):
        lhs = apply_pi(journe_ctx, a, apply_pi(journe_ctx, b, v))
        assert limit_distance(journe_ctx, lhs, apply_pi(journe_ctx, a + b, v)) <= 1e-12


def test_pi_dilation_relation(journe_ctx, vec):
    # delta pi_gamma = pi_{gamma/N} delta on the lattice N Z
    v = LimitVector(1, vec)
    lhs = apply_delta(apply_pi(journe_ctx, 2, v))
    rhs = apply_pi(journe_ctx, 1, apply_delta(v))
    assert limit_equal(journe_ctx, lhs, rhs)


def test_projection_idempotent_and_self_adjoint(journe_ctx):
    u, w = default_test_vectors(journe_ctx, 2, 3, seed=3)
    u, w = LimitVector(3, u.payload), LimitVector(2, w.payload)
    for n in range(3):
        p = project_V(journe_ctx, n, u)
        assert limit_distance(journe_ctx, project_V(journe_ctx, n, p), p) <= 1e-10
        assert limit_inner(journe_ctx, p, w) == pytest.approx(
            limit_inner(journe_ctx, u, project_V(journe_ctx, n, w)), abs=1e-10)


def test_projection_fixes_lower_levels(journe_ctx, vec):
    v = LimitVector(1, vec)
    assert project_V(journe_ctx, 2, v) is v


@pytest.mark.parametrize("name", ["journe_rank2", "haar", "synth_example2_2"])
def test_axioms_pass(name):
    rep = check_gmra_axioms(CONTEXTS[name], levels=3)
    assert rep.all_passed
    assert "structural" in rep.notes["c"]
    assert "axiom" in rep.table()
    assert set(rep.to_json()["axioms"]) == {"a", "b", "c", "d"}
