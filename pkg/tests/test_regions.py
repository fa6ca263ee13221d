import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcbound.probcore import cond_mutual_info, product_channel, random_channel, random_joint
from bcbound.regions import (bound1_slacks, claim_check, frontier, hull_dominates, nj_slacks,
                             obs1_meta_identity)
from bcbound.schemes import (PRIVATE_VARS, COMMON_VARS, build_common_joint, build_private_joint,
                             lift_to_common, product_scheme, rate_point_private, residuals_private,
                             singleton_private)
from bcbound.search import SearchConfig, refine_to_constraints, sample_scheme

seeds = st.integers(0, 2**32 - 1)
points2 = st.lists(st.tuples(st.floats(0, 2), st.floats(0, 2)), min_size=1, max_size=12)


def joint7(seed):
    cards = dict(zip(PRIVATE_VARS, np.random.default_rng(seed).integers(1, 4, size=7)))
    return random_joint(cards, np.random.default_rng(seed + 1), sparsity=0.2)


@pytest.fixture(scope="module")
def feasible_private():
    """Constraint-satisfying schemes on a random channel, produced by the feasibility solver."""
    ch = random_channel(2, 2, 2, np.random.default_rng(7))
    cfg = SearchConfig()
    out = []
    for seed in range(12):
        ref = refine_to_constraints(sample_scheme((2, 2, 2, 2), 2, seed), ch, cfg)
        if ref.success:
            out.append(build_private_joint(ref.scheme, ch))
    assert len(out) >= 3
    return out


# Bound 1 ------------------------------------------------------------------

def test_bound1_product_tight():
    j = build_private_joint(product_scheme(), product_channel())
    s = bound1_slacks(j, (1.0, 1.0))
    assert len(s.entries) == 4
    np.testing.assert_allclose([e.slack for e in s.entries], 0.0, atol=1e-15)


@given(seeds)
def test_bound1_origin_nonnegative(seed):
    assert bound1_slacks(joint7(seed), (0.0, 0.0)).min_slack >= -1e-12


@given(seeds)
def test_sum_slack_difference_is_obs1(seed):
    j = joint7(seed)
    s = bound1_slacks(j, (0.3, 0.2)).entries
    lhs, _ = obs1_meta_identity(j)
    assert (s[2].slack - s[3].slack) == pytest.approx(lhs, abs=1e-10)


def test_claim1_chain_on_feasible(feasible_private):
    for j in feasible_private:
        r1, r2 = rate_point_private(j)
        w = ["W1", "W2"]
        top = cond_mutual_info(j, ["U", "W1", "W2"], ["Y1"]) + cond_mutual_info(j, ["V"], ["Y2"], ["U"] + w)
        assert top - r1 - r2 >= -1e-9
        res = residuals_private(j).norm_inf
        step_a = cond_mutual_info(j, ["V"], ["Y2"], ["U", "W2"]) - cond_mutual_info(j, ["V"], ["Y2"], ["W2"])
        assert abs(step_a) <= res + 1e-10
        assert bound1_slacks(j, (r1, r2)).min_slack >= -1e-6


# obs1 ---------------------------------------------------------------------

@given(seeds)
def test_obs1_identity(seed):
    lhs, disc = obs1_meta_identity(joint7(seed))
    assert abs(lhs - disc) <= 1e-10


def test_obs1_product_zero():
    assert obs1_meta_identity(build_private_joint(product_scheme(), product_channel())) == pytest.approx((0, 0), abs=1e-15)


def test_obs1_zero_when_residual3_zero(feasible_private):
    for j in feasible_private:
        lhs, disc = obs1_meta_identity(j)
        assert abs(lhs) <= 1e-6 and abs(disc) <= 1e-6


# New-Jersey bound ---------------------------------------------------------

def common_joint(seed):
    ch = random_channel(2, 2, 2, np.random.default_rng(seed))
    return build_common_joint(sample_scheme((2, 2, 2, 2, 2), 2, seed, deterministic=True), ch)


@given(seeds)
def test_nj_origin_nonnegative(seed):
    j = common_joint(seed % 1000)
    assert len(nj_slacks(j, (0, 0, 0)).entries) == 11
    assert nj_slacks(j, (0, 0, 0)).min_slack >= -1e-12
    assert nj_slacks(j, (0, 0, 0), literal_mode=True).min_slack >= -1e-12


def test_nj_product_corrected():
    j = build_common_joint(lift_to_common(product_scheme()), product_channel())
    assert nj_slacks(j, (0.0, 1.0, 1.0)).min_slack >= -1e-15


@pytest.mark.parametrize("seed", range(10))
def test_nj_modes_differ_only_on_flagged_lines(seed):
    j = common_joint(seed)
    a = nj_slacks(j, (0.1, 0.1, 0.1)).entries
    b = nj_slacks(j, (0.1, 0.1, 0.1), literal_mode=True).entries
    changed = [k for k in range(11) if a[k].id != b[k].id or abs(a[k].bound - b[k].bound) > 1e-15]
    assert set(changed) <= {2, 5}
    assert a[2].id == "R2<=I(V;Y2|W2)" and b[2].id == "R2<=I(V;Y2|W)"
    assert a[5].id == "R0+R2<=I(T,V;Y2|W2)" and b[5].id == "R0+R2<=I(T,U;Y2|W2)"


def test_nj_missing_t():
    with pytest.raises(KeyError):
        nj_slacks(build_private_joint(product_scheme(), product_channel()), (0, 0, 0))


# claim_check --------------------------------------------------------------

def test_claim_check_product():
    rep = claim_check(product_scheme(), product_channel(), "claim1")
    assert rep.verdict == "pass"
    assert rep.slacks.min_slack == pytest.approx(0.0, abs=1e-15)


def test_claim_check_degenerate():
    ch = random_channel(2, 2, 2, np.random.default_rng(3))
    rep = claim_check(singleton_private([0.5, 0.5]), ch, "claim1")
    assert rep.verdict == "pass" and rep.rate == (0.0, 0.0)


def test_claim_check_infeasible_scheme_fails():
    ch = random_channel(2, 2, 2, np.random.default_rng(3))
    rep = claim_check(sample_scheme((2, 2, 2, 2), 2, 0), ch, "claim1")
    assert not rep.feasible and rep.verdict == "fail"


def test_claim_check_type_errors():
    with pytest.raises(TypeError):
        claim_check(product_scheme(), product_channel(), "claim2")
    with pytest.raises(ValueError):
        claim_check(product_scheme(), product_channel(), "claim3")


def test_claim_check_claim2():
    rep = claim_check(lift_to_common(product_scheme()), product_channel(), "claim2")
    assert rep.verdict == "pass" and len(rep.residuals.entries) == 93


# frontier -----------------------------------------------------------------

def test_frontier_single():
    assert frontier([(0.3, 0.4)]) == [(0.3, 0.4)]
    assert frontier([(0.3, 0.4)], "hull") == [(0.3, 0.4)]


def test_frontier_removes_dominated():
    assert frontier([(0.2, 0.2), (1.0, 1.0)]) == [(1.0, 1.0)]


def test_frontier_hull_segment():
    f = frontier([(1.0, 0.0), (0.0, 1.0)], "hull")
    assert f == [(0.0, 1.0), (1.0, 0.0)]
    assert hull_dominates(f, (0.5, 0.5), tol=1e-12)
    assert not hull_dominates(f, (0.6, 0.6))


def test_frontier_hull_drops_interior():
    pts = [(1.0, 0.0), (0.0, 1.0), (0.4, 0.4), (0.6, 0.6), (0.3, 0.5)]
    assert frontier(pts, "raw") == [(0.0, 1.0), (0.6, 0.6), (1.0, 0.0)]
    assert frontier(pts, "hull") == [(0.0, 1.0), (0.6, 0.6), (1.0, 0.0)]


def test_frontier_errors():
    with pytest.raises(ValueError):
        frontier([])
    with pytest.raises(ValueError):
        frontier([(1, 1)], "convex")


@given(points2)
def test_hull_contains_raw(pts):
    raw = frontier(pts, "raw")
    hull = frontier(pts, "hull")
    assert set(hull) <= set(raw)
    for p in raw:
        assert hull_dominates(hull, p, tol=1e-9)
    # convexity: no hull vertex lies under the hull of the others
    for i, p in enumerate(hull):
        others = hull[:i] + hull[i + 1:]
        if others:
            assert not hull_dominates(others, np.asarray(p) + 1e-9)


@given(points2)
def test_raw_is_pareto(pts):
    raw = np.array(frontier(pts, "raw"))
    for p in pts:
        assert np.any(np.all(raw >= np.asarray(p) - 1e-15, axis=1))
    for i, p in enumerate(raw):
        others = np.delete(raw, i, axis=0)
        assert not np.any(np.all(others >= p, axis=1) & np.any(others > p, axis=1))


def test_common_vars_exported():
    assert COMMON_VARS[0] == "T"
