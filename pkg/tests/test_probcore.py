import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcbound.probcore import (Channel, JointDist, SupportCapError, VariableSpec, binary_entropy, bsc_pair,
                              cond_entropy, cond_mutual_info, entropy, marginalize, mutual_info, product,
                              product_channel, random_joint)

seeds = st.integers(0, 2**32 - 1)


def point(name, card, at):
    m = np.zeros(card)
    m[at] = 1.0
    return JointDist([VariableSpec(name, card)], m)


def single(name, pmf):
    return JointDist([VariableSpec(name, len(pmf))], np.asarray(pmf, float))


# entropy ------------------------------------------------------------------

def test_entropy_uniform_bit():
    assert entropy(single("A", [0.5, 0.5]), ["A"]) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("card,at", [(2, 0), (3, 2), (5, 1)])
def test_entropy_point_mass(card, at):
    assert entropy(point("A", card, at), ["A"]) == 0.0


def test_entropy_skewed_bit():
    ref = -(0.9 * math.log2(0.9) + 0.1 * math.log2(0.1))
    h = entropy(single("A", [0.9, 0.1]), ["A"])
    assert h == pytest.approx(ref, abs=1e-14)
    assert h == pytest.approx(0.4690, abs=1e-4)


def test_entropy_errors():
    d = single("A", [0.5, 0.5])
    with pytest.raises(KeyError):
        entropy(d, ["B"])
    with pytest.raises(ValueError):
        entropy(d, [])


@given(seeds)
def test_entropy_bounds(seed):
    rng = np.random.default_rng(seed)
    cards = {"A": 3, "B": 2, "C": 4}
    d = random_joint(cards, rng, sparsity=0.3)
    for r in range(1, 4):
        for S in itertools.combinations(cards, r):
            h = entropy(d, S)
            assert -1e-12 <= h <= sum(math.log2(cards[v]) for v in S) + 1e-12


# mutual information -------------------------------------------------------

def test_mi_product_is_zero(rng):
    d = product(random_joint({"A": 3}, rng), random_joint({"B": 4}, rng))
    assert cond_mutual_info(d, ["A"], ["B"], []) == pytest.approx(0.0, abs=1e-12)


def test_mi_copy_is_entropy():
    d = JointDist([VariableSpec("A", 2), VariableSpec("B", 2)], np.eye(2) / 2)
    assert mutual_info(d, ["A"], ["B"]) == pytest.approx(1.0, abs=1e-14)


def test_mi_bsc():
    ch = bsc_pair(0.1)
    law = ch.law.sum(axis=2)
    d = JointDist([VariableSpec("X", 2), VariableSpec("Y", 2)], 0.5 * law)
    ref = 1 + 0.1 * math.log2(0.1) + 0.9 * math.log2(0.9)
    assert mutual_info(d, ["X"], ["Y"]) == pytest.approx(ref, abs=1e-14)
    assert mutual_info(d, ["X"], ["Y"]) == pytest.approx(0.5310, abs=1e-4)
    assert ref == pytest.approx(1 - binary_entropy(0.1), abs=1e-15)


def test_mi_overlap_rejected(rng):
    d = random_joint({"A": 2, "B": 2}, rng)
    with pytest.raises(ValueError):
        cond_mutual_info(d, ["A"], ["A", "B"])


def test_mi_conditioning_stripped(rng):
    d = random_joint({"A": 2, "B": 2, "C": 2}, rng)
    assert cond_mutual_info(d, ["A", "C"], ["B"], ["C"]) == pytest.approx(
        cond_mutual_info(d, ["A"], ["B"], ["C"]), abs=1e-14)


@given(seeds)
def test_chain_rule(seed):
    rng = np.random.default_rng(seed)
    d = random_joint({"A": 3, "B": 2, "C": 2}, rng, sparsity=0.2)
    assert entropy(d, ["A", "B"]) == pytest.approx(entropy(d, ["A"]) + cond_entropy(d, ["B"], ["A"]), abs=1e-10)


@pytest.mark.parametrize("seed", range(4))
def test_nonnegativity_exhaustive(seed):
    rng = np.random.default_rng(seed)
    names = ["A", "B", "C", "D", "E"]
    d = random_joint({n: 2 for n in names}, rng, sparsity=0.4 * (seed % 2))
    # every assignment of each variable to A-side, B-side, C-side or unused
    for roles in itertools.product(range(4), repeat=len(names)):
        A = [n for n, r in zip(names, roles) if r == 0]
        B = [n for n, r in zip(names, roles) if r == 1]
        C = [n for n, r in zip(names, roles) if r == 2]
        if A and B:
            assert cond_mutual_info(d, A, B, C) >= -1e-12


# marginalization ----------------------------------------------------------

@given(seeds)
def test_marginal_invariance(seed):
    rng = np.random.default_rng(seed)
    d = random_joint({"A": 2, "B": 3, "C": 2, "D": 2}, rng)
    for S in (["A"], ["B", "D"], ["A", "C", "D"]):
        m = marginalize(d, S)
        assert set(m.names) == set(S)
        assert abs(m.mass.sum() - 1.0) <= 1e-12
        assert abs(entropy(m, S) - entropy(d, S)) <= 1e-12


def test_marginal_brute_force(rng):
    d = random_joint({"A": 2, "B": 3, "C": 2}, rng)
    m = marginalize(d, ["A", "C"])
    ref = np.zeros((2, 2))
    for a, b, c in itertools.product(range(2), range(3), range(2)):
        ref[a, c] += d.mass[a, b, c]
    np.testing.assert_allclose(m.mass, ref, atol=1e-15)


def test_marginal_of_product(rng):
    fa = random_joint({"A": 3}, rng)
    d = product(fa, random_joint({"B": 2}, rng))
    np.testing.assert_allclose(marginalize(d, ["A"]).mass, fa.mass, atol=1e-15)


def test_marginal_uniform_pair():
    d = JointDist([VariableSpec("A", 2), VariableSpec("B", 2)], np.full((2, 2), 0.25))
    np.testing.assert_allclose(marginalize(d, ["B"]).mass, [0.5, 0.5])


# pure Csiszar sum identity over sequences A_1..A_n, B_1..B_n and a side variable K

@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("seed", range(3))
def test_csiszar_identity_on_random_joint(n, seed):
    rng = np.random.default_rng(seed)
    cards = {f"A{i}": 2 for i in range(1, n + 1)} | {f"B{i}": 2 for i in range(1, n + 1)} | {"K": 2}
    d = random_joint(cards, rng)
    for K in ([], ["K"]):
        lhs = rhs = 0.0
        for i in range(1, n + 1):
            pre = [f"A{j}" for j in range(1, i)]
            suf = [f"B{j}" for j in range(i + 1, n + 1)]
            if suf:
                lhs += cond_mutual_info(d, suf, [f"A{i}"], pre + K)
            if pre:
                rhs += cond_mutual_info(d, pre, [f"B{i}"], suf + K)
        assert abs(lhs - rhs) <= 1e-10


# validation ---------------------------------------------------------------

def test_jointdist_validation():
    with pytest.raises(ValueError):
        JointDist([VariableSpec("A", 2)], [0.6, 0.6])
    with pytest.raises(ValueError):
        JointDist([VariableSpec("A", 2), VariableSpec("A", 2)], np.full((2, 2), 0.25))
    with pytest.raises(ValueError):
        JointDist([VariableSpec("A", 3)], [0.5, 0.5])
    with pytest.raises(SupportCapError):
        JointDist([VariableSpec("A", 10), VariableSpec("B", 10)], np.full((10, 10), 0.01), support_cap=50)


def test_channel_validation():
    with pytest.raises(ValueError, match="x=1"):
        Channel(np.array([[[1.0]], [[0.9]]]))
    ch = product_channel()
    assert (ch.x_card, ch.y1_card, ch.y2_card) == (4, 2, 2)
    assert ch.law[3, 1, 1] == 1.0
