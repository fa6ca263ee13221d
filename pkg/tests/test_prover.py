from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcbound.probcore import JointDist, VariableSpec, entropy, random_joint
from bcbound.prover import (CLAIM1_LABELS, MAX_VARS, NOT_PROVABLE, PROVABLE, EntropySpace, H, I, InfoExpr,
                            ParseError, certify_claim1, claim1_targets, elemental_inequalities,
                            parse_constraints, parse_expr, parse_statement, private_constraints,
                            prove_equality, prove_nonneg)

seeds = st.integers(0, 2**32 - 1)


def evaluator(joint):
    return lambda s: entropy(joint, s)


def markov_joint(seed):
    """A -> B -> C on random binary/ternary alphabets."""
    rng = np.random.default_rng(seed)
    pa = rng.dirichlet(np.ones(2))
    pb = rng.dirichlet(np.ones(3), size=2)
    pc = rng.dirichlet(np.ones(2), size=3)
    m = pa[:, None, None] * pb[:, :, None] * pc[None, :, :]
    return JointDist([VariableSpec("A", 2), VariableSpec("B", 3), VariableSpec("C", 2)], m)


def assert_certificate(v):
    assert v.provable
    assert v.reconstruction_error() <= 1e-8
    assert np.all(v.elemental_multipliers >= 0)


def assert_witness(v):
    assert v.status == NOT_PROVABLE
    lo, cons, val = v.witness_violation()
    assert lo >= -1e-8 and cons <= 1e-8 and val < -1e-8


# elemental inequalities ---------------------------------------------------

@pytest.mark.parametrize("k,count", [(1, 1), (2, 3), (3, 9), (7, 679)])
def test_elemental_count(k, count):
    assert len(elemental_inequalities(k)) == count
    if k >= 2:
        assert count == k + comb(k, 2) * 2 ** (k - 2)


def test_elemental_range():
    with pytest.raises(ValueError):
        elemental_inequalities(0)
    with pytest.raises(ValueError):
        elemental_inequalities(MAX_VARS + 1)


@given(seeds)
def test_elemental_hold_on_distributions(seed):
    j = random_joint({"A": 2, "B": 3, "C": 2, "D": 2}, np.random.default_rng(seed), sparsity=0.3)
    for e in elemental_inequalities(["A", "B", "C", "D"]):
        assert e.evaluate(evaluator(j)) >= -1e-12


# prove_nonneg -------------------------------------------------------------

def test_mi_nonneg():
    v = prove_nonneg(I("A", "B"))
    assert v.status == PROVABLE and v.value == pytest.approx(0, abs=1e-8)
    assert_certificate(v)


def test_data_processing():
    v = prove_nonneg(I("A", "B") - I("A", "C"), [I("A", "C", "B")])
    assert_certificate(v)


@pytest.mark.parametrize("seed", range(30))
def test_data_processing_brute_force(seed):
    j = markov_joint(seed)
    assert (I("A", "B") - I("A", "C")).evaluate(evaluator(j)) >= -1e-12


def test_negative_entropy_witness():
    v = prove_nonneg(-H("A"))
    assert_witness(v)
    assert dict(v.witness_terms())["H(A)"] == pytest.approx(1.0)


def test_without_constraint_data_processing_fails():
    assert_witness(prove_nonneg(I("A", "B") - I("A", "C")))


@given(seeds)
def test_random_elemental_combination(seed):
    """Nonnegative combinations of elemental inequalities are certified and hold numerically."""
    rng = np.random.default_rng(seed)
    el = elemental_inequalities(["A", "B", "C"])
    w = rng.integers(0, 3, size=len(el))
    target = InfoExpr()
    for c, e in zip(w, el):
        target = target + int(c) * e
    if not target:
        return
    v = prove_nonneg(target, space=EntropySpace(("A", "B", "C")))
    assert_certificate(v)
    for s in range(3):
        j = random_joint({"A": 2, "B": 2, "C": 3}, np.random.default_rng(seed + s))
        assert target.evaluate(evaluator(j)) >= -1e-9


def test_mutual_info_subadditivity_negative():
    # fails for A = B = C, where I(A;B) = 1 and I(A;B|C) = 0
    assert_witness(prove_nonneg(I("A", "B", "C") - I("A", "B")))


# prove_equality -----------------------------------------------------------

def test_equality_entropy_difference_fails_both_ways():
    a, b = prove_equality(H("A") - H("B"))
    assert not a.provable and not b.provable


def test_equality_chain_rule():
    target = H("A,B") - H("A") - H("B", "A")
    assert not target  # canonical form cancels to zero
    a, b = prove_equality(target, space=EntropySpace(("A", "B")))
    assert a.provable and b.provable


def test_obs1_from_constraint3():
    space = EntropySpace(("U", "V", "W1", "W2", "Y1", "Y2"))
    obs1 = dict((n, e) for n, _, e in claim1_targets())["obs1"]
    c3 = I("U", "V", "W1,W2,Y1") - I("U", "V", "W1,W2,Y2")
    for v in prove_equality(obs1, [c3], space):
        assert_certificate(v)


def test_step_a_from_constraint2():
    target = I("V", "Y2", "U,W2") - I("V", "Y2", "W2")
    c2 = I("V", "Y2", "W2") - I("V", "Y2", "U,W2")
    for v in prove_equality(target, [c2]):
        assert_certificate(v)


# claim fixture ------------------------------------------------------------

@pytest.fixture(scope="module")
def report():
    return certify_claim1()


def test_claim1_all_provable(report):
    names = [n for n, _, _ in report.results]
    assert names[:2] == ["sum1_Y1", "sum1_Y2"]
    assert len(names) == 14
    for _, _, vs in report.results:
        for v in vs:
            assert_certificate(v)
    assert report.all_provable


def test_claim1_pair_ablation_not_provable(report):
    assert_witness(report.pair_ablation)


def test_claim1_constraint_count():
    assert [n for n, _ in private_constraints()] == [f"eq{k}" for k in range(1, 8)] + ["markov", "independence"]
    assert len(private_constraints(drop=[5])) == 8
    assert EntropySpace(CLAIM1_LABELS).dim == 127


# parser -------------------------------------------------------------------

def test_parse_expr_forms():
    assert parse_expr("I(A;B|C)") == I("A", "B", "C")
    assert parse_expr("H(A,B) - H(B)") == H("A", "B")
    assert parse_expr("2*I(A;B) + H(C|A)") == 2 * I("A", "B") + H("C", "A")
    assert parse_expr("I(U,W1;Y1)") == I("U,W1", "Y1")


def test_parse_statement_flip():
    rel, e = parse_statement("I(A;C) <= I(A;B)")
    assert rel == ">=" and e == I("A", "B") - I("A", "C")
    assert parse_statement("I(A;B) = 0") == ("=", I("A", "B"))


@pytest.mark.parametrize("bad", ["I(A;B", "I(A B)", "H(A) >", "H(A) >= 0 0", "Q(A)", "H(A) & H(B)"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_statement(bad)


def test_parse_constraints_lines():
    cs = parse_constraints("# comment\nI(A;B) = 0\n\nH(A|B) = 0  # trailing\n")
    assert cs == [I("A", "B"), H("A", "B")]
    with pytest.raises(ParseError, match="line 2"):
        parse_constraints("I(A;B) = 0\nI(A;B) >= 0\n")
