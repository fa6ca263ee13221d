"""Shannon-type inequality prover over the entropy space of k variables.

An expression sum_S c_S H(S) is nonnegative for every polymatroid that
satisfies the given linear equalities iff the LP

    min  c.h   s.t.  elemental(h) >= 0,  constraints(h) = 0,  h(full) <= 1

has optimal value 0. In that case the dual gives a certificate: nonnegative
multipliers on elemental inequalities plus free multipliers on constraints
that reproduce c exactly. Otherwise the primal optimum is a witness vector
on which the expression is negative. A negative verdict only means "not
Shannon-provable under these constraints"; non-Shannon inequalities exist.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .probcore import info_terms

MAX_VARS = 10
LP_TOL = 1e-8

PROVABLE = "ShannonProvable"
NOT_PROVABLE = "NotProvable"


class ProverError(RuntimeError):
    """The LP solver failed; distinct from a NotProvable verdict."""


class ParseError(ValueError):
    pass


def _group(names: Iterable[str] | str) -> frozenset:
    if isinstance(names, str):
        names = [x.strip() for x in names.split(",") if x.strip()]
    return frozenset(names)


class InfoExpr:
    """Linear combination of joint entropies, kept in canonical form."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[frozenset, Real] | None = None):
        out: dict[frozenset, Real] = {}
        for s, c in (terms or {}).items():
            s = frozenset(s)
            if not s:
                continue
            out[s] = out.get(s, 0) + c
        self.terms = {s: c for s, c in sorted(out.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
                      if c != 0}

    @classmethod
    def H(cls, a, given=()) -> "InfoExpr":
        a, c = _group(a), _group(given)
        return cls({a | c: 1, c: -1})

    @classmethod
    def I(cls, a, b, given=()) -> "InfoExpr":  # noqa: E743
        return cls(info_terms(_group(a), _group(b), _group(given)))

    @property
    def labels(self) -> frozenset:
        return frozenset().union(*self.terms) if self.terms else frozenset()

    def __add__(self, other: "InfoExpr") -> "InfoExpr":
        t = dict(self.terms)
        for s, c in other.terms.items():
            t[s] = t.get(s, 0) + c
        return InfoExpr(t)

    def __neg__(self) -> "InfoExpr":
        return InfoExpr({s: -c for s, c in self.terms.items()})

    def __sub__(self, other: "InfoExpr") -> "InfoExpr":
        return self + (-other)

    def __mul__(self, k: Real) -> "InfoExpr":
        return InfoExpr({s: k * c for s, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, InfoExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for s, c in self.terms.items():
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag}*"
            parts.append(f"{sign} {coef}H({','.join(sorted(s))})")
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else "-" + out[2:]

    __repr__ = __str__

    def vector(self, space: "EntropySpace") -> np.ndarray:
        v = np.zeros(space.dim)
        for s, c in self.terms.items():
            v[space.coord(s)] += float(c)
        return v

    def evaluate(self, entropy_of) -> float:
        """Value given a callable mapping a frozenset of names to H(S)."""
        return float(sum(float(c) * entropy_of(s) for s, c in self.terms.items()))


H = InfoExpr.H
I = InfoExpr.I  # noqa: E741


@dataclass(frozen=True)
class EntropySpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        if not 1 <= len(self.labels) <= MAX_VARS:
            raise ValueError(f"entropy space needs 1..{MAX_VARS} variables, got {len(self.labels)}")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels")

    @classmethod
    def of(cls, *exprs: InfoExpr, extra: Iterable[str] = ()) -> "EntropySpace":
        names = set(extra)
        for e in exprs:
            names |= e.labels
        return cls(tuple(sorted(names)))

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 2**self.k - 1

    def mask(self, s: Iterable[str]) -> int:
        m = 0
        for n in s:
            try:
                m |= 1 << self.labels.index(n)
            except ValueError:
                raise KeyError(f"label {n!r} not in entropy space {self.labels}") from None
        return m

    def coord(self, s: Iterable[str]) -> int:
        m = self.mask(s)
        if m == 0:
            raise ValueError("empty subset has no coordinate")
        return m - 1

    def subset(self, coord: int) -> frozenset:
        m = coord + 1
        return frozenset(n for i, n in enumerate(self.labels) if m >> i & 1)


def elemental_inequalities(k: int | Sequence[str]) -> list[InfoExpr]:
    """H(X_i | rest) >= 0 for each i, and I(X_i; X_j | S) >= 0 for i < j, S within the rest."""
    labels = tuple(f"X{i + 1}" for i in range(k)) if isinstance(k, int) else tuple(k)
    if not 1 <= len(labels) <= MAX_VARS:
        raise ValueError(f"k must be in 1..{MAX_VARS}")
    out = []
    for i, a in enumerate(labels):
        out.append(InfoExpr.H([a], [x for x in labels if x != a]))
    for a, b in itertools.combinations(labels, 2):
        rest = [x for x in labels if x not in (a, b)]
        for r in range(len(rest) + 1):
            for S in itertools.combinations(rest, r):
                out.append(InfoExpr.I([a], [b], S))
    return out


def _elemental_matrix(space: EntropySpace) -> np.ndarray:
    rows = elemental_inequalities(space.labels)
    return np.array([e.vector(space) for e in rows])


@dataclass
class Verdict:
    status: str
    value: float
    target: InfoExpr
    space: EntropySpace
    constraints: tuple[InfoExpr, ...] = ()
    elemental_multipliers: np.ndarray | None = None
    constraint_multipliers: np.ndarray | None = None
    witness: np.ndarray | None = None

    @property
    def provable(self) -> bool:
        return self.status == PROVABLE

    def reconstruction_error(self) -> float:
        """Max coordinate error of the certificate's combination against the target."""
        if self.elemental_multipliers is None:
            raise ValueError("no certificate")
        E = _elemental_matrix(self.space)
        C = np.array([c.vector(self.space) for c in self.constraints]).reshape(-1, self.space.dim)
        rebuilt = E.T @ self.elemental_multipliers
        if len(C):
            rebuilt = rebuilt + C.T @ self.constraint_multipliers
        return float(np.max(np.abs(rebuilt - self.target.vector(self.space))))

    def witness_violation(self) -> tuple[float, float, float]:
        """(min elemental value, max |constraint value|, target value) at the witness."""
        if self.witness is None:
            raise ValueError("no witness")
        E = _elemental_matrix(self.space)
        C = np.array([c.vector(self.space) for c in self.constraints]).reshape(-1, self.space.dim)
        cons = float(np.max(np.abs(C @ self.witness))) if len(C) else 0.0
        return float(np.min(E @ self.witness)), cons, float(self.target.vector(self.space) @ self.witness)

    def certificate_terms(self, tol: float = 1e-12) -> list[tuple[str, float]]:
        """Nonzero multipliers as (readable inequality or constraint, weight)."""
        out = []
        if self.elemental_multipliers is not None:
            for e, y in zip(elemental_inequalities(self.space.labels), self.elemental_multipliers):
                if y > tol:
                    out.append((f"{e} >= 0", float(y)))
            for c, z in zip(self.constraints, self.constraint_multipliers):
                if abs(z) > tol:
                    out.append((f"{c} = 0", float(z)))
        return out

    def witness_terms(self) -> list[tuple[str, float]]:
        if self.witness is None:
            return []
        return [(f"H({','.join(sorted(self.space.subset(i)))})", float(v))
                for i, v in enumerate(self.witness)]


_HIGHS_OPTS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _certificate(E: np.ndarray, C: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m, q = E.shape[0], C.shape[0]
    A = np.hstack([E.T, C.T]) if q else E.T
    cost = np.concatenate([np.ones(m), np.zeros(q)])
    bounds = [(0, None)] * m + [(None, None)] * q
    res = linprog(cost, A_eq=A, b_eq=t, bounds=bounds, method="highs", options=_HIGHS_OPTS)
    if res.status != 0:
        raise ProverError(f"certificate LP failed: {res.message}")
    y, z = res.x[:m].copy(), res.x[m:].copy()
    # polish on the support so the combination is exact to rounding
    supp = np.flatnonzero(y > 1e-12)
    B = np.hstack([E[supp].T, C.T]) if q else E[supp].T
    sol, *_ = np.linalg.lstsq(B, t, rcond=None)
    ys = sol[:len(supp)]
    if np.all(ys >= -1e-12):
        y = np.zeros(m)
        y[supp] = np.clip(ys, 0, None)
        z = sol[len(supp):]
    return y, z


def prove_nonneg(target: InfoExpr, constraints: Sequence[InfoExpr] = (),
                 space: EntropySpace | None = None, tol: float = LP_TOL) -> Verdict:
    """Decide whether ``target >= 0`` follows from Shannon inequalities and ``constraints = 0``."""
    constraints = tuple(constraints)
    space = space or EntropySpace.of(target, *constraints)
    E = _elemental_matrix(space)
    C = np.array([c.vector(space) for c in constraints]).reshape(-1, space.dim)
    t = target.vector(space)
    top = np.zeros(space.dim)
    top[space.dim - 1] = 1.0
    res = linprog(t, A_ub=np.vstack([-E, top]), b_ub=np.concatenate([np.zeros(len(E)), [1.0]]),
                  A_eq=C if len(C) else None, b_eq=np.zeros(len(C)) if len(C) else None,
                  bounds=[(None, None)] * space.dim, method="highs", options=_HIGHS_OPTS)
    if res.status != 0:
        raise ProverError(f"LP failed (status {res.status}): {res.message}")
    value = float(res.fun)
    if value >= -tol:
        y, z = _certificate(E, C, t)
        return Verdict(PROVABLE, max(value, 0.0) if value > -tol else value, target, space, constraints, y, z)
    return Verdict(NOT_PROVABLE, value, target, space, constraints, witness=res.x)


def prove_equality(target: InfoExpr, constraints: Sequence[InfoExpr] = (),
                   space: EntropySpace | None = None) -> tuple[Verdict, Verdict]:
    space = space or EntropySpace.of(target, *constraints)
    return prove_nonneg(target, constraints, space), prove_nonneg(-target, constraints, space)


# ---------------------------------------------------------------------------
# the private-message inclusion chain

CLAIM1_LABELS = ("U", "V", "W1", "W2", "X", "Y1", "Y2")


def private_constraints(drop: Iterable[int] = ()) -> list[tuple[str, InfoExpr]]:
    """Seven equalities (1-based index order), Markov chain through X, and independence of U and V."""
    eqs = [
        I("U", "Y1", "W1") - I("U", "Y1", "V,W1"),
        I("V", "Y2", "W2") - I("V", "Y2", "U,W2"),
        I("U", "V", "W1,W2,Y1") - I("U", "V", "W1,W2,Y2"),
        I("W2", "Y1", "W1") - I("W1", "Y2", "W2"),
        I("W2", "Y1", "U,W1") - I("W1", "Y2", "U,W2"),
        I("W2", "Y1", "V,W1") - I("W1", "Y2", "V,W2"),
        I("W2", "Y1", "U,V,W1") - I("W1", "Y2", "U,V,W2"),
    ]
    drop = set(drop)
    out = [(f"eq{k + 1}", e) for k, e in enumerate(eqs) if k + 1 not in drop]
    out.append(("markov", I("U,V,W1,W2", "Y1,Y2", "X")))
    out.append(("independence", I("U", "V")))
    return out


def claim1_targets() -> list[tuple[str, str, InfoExpr]]:
    """(name, relation, expression) for every statement certified for the private claim."""
    r_sum = I("U", "Y1", "W1") + I("V", "Y2", "W2")
    sum_a = I("U", "Y1", "W1,W2") + I("V", "Y2", "U,W1,W2")
    sum_b = I("U", "Y1", "V,W1,W2") + I("V", "Y2", "W1,W2")
    chain = [
        I("U,W1,W2", "Y1") + I("V", "Y2", "U,W1,W2"),
        I("W1", "Y1") + I("U", "Y1", "W1") + I("W2", "Y1", "U,W1") + I("V", "Y2", "U,W1,W2"),
        I("W1", "Y1") + I("U", "Y1", "W1") + I("W1", "Y2", "U,W2") + I("V", "Y2", "U,W1,W2"),
        I("W1", "Y1") + I("U", "Y1", "W1") + I("V,W1", "Y2", "U,W2"),
        I("W1", "Y1") + I("U", "Y1", "W1") + I("W1", "Y2", "U,V,W2") + I("V", "Y2", "U,W2"),
        I("W1", "Y1") + I("U", "Y1", "W1") + I("W1", "Y2", "U,V,W2") + I("V", "Y2", "W2"),
    ]
    out = [
        ("sum1_Y1", ">=", I("W1,W2", "Y1") + sum_a - r_sum),
        ("sum1_Y2", ">=", I("W1,W2", "Y2") + sum_a - r_sum),
        ("sum2_Y1", ">=", I("W1,W2", "Y1") + sum_b - r_sum),
        ("sum2_Y2", ">=", I("W1,W2", "Y2") + sum_b - r_sum),
        ("R1_individual", ">=", I("U,W1,W2", "Y1") - I("U", "Y1", "W1")),
        ("R2_individual", ">=", I("V,W1,W2", "Y2") - I("V", "Y2", "W2")),
        ("obs1", "=", sum_a - sum_b),
        ("step_a", "=", I("V", "Y2", "U,W2") - I("V", "Y2", "W2")),
    ]
    for k in range(len(chain) - 1):
        out.append((f"chain_{k + 1}", "=", chain[k] - chain[k + 1]))
    out.append((f"chain_{len(chain)}", ">=", chain[-1] - r_sum))
    return out


@dataclass
class CertificationReport:
    results: list[tuple[str, str, tuple[Verdict, ...]]] = field(default_factory=list)
    ablation: Verdict | None = None
    pair_ablation: Verdict | None = None

    def ok(self, name: str) -> bool:
        for n, _, vs in self.results:
            if n == name:
                return all(v.provable for v in vs)
        raise KeyError(name)

    @property
    def all_provable(self) -> bool:
        return all(v.provable for _, _, vs in self.results for v in vs)


def certify_claim1(ablate: int = 5, pair: tuple[int, int] = (4, 5)) -> CertificationReport:
    """Certify every claim statement under the full constraint set, then re-prove
    the main target with equality ``ablate`` removed and with the ``pair`` removed.

    The main target has two minimal supporting sets, {eq2, eq5} and
    {eq1, eq3, eq4, eq6}, so removing one equality is not enough to break it.
    """
    space = EntropySpace(CLAIM1_LABELS)
    cons = [e for _, e in private_constraints()]
    report = CertificationReport()
    for name, rel, expr in claim1_targets():
        if rel == ">=":
            report.results.append((name, rel, (prove_nonneg(expr, cons, space),)))
        else:
            report.results.append((name, rel, prove_equality(expr, cons, space)))
    main = claim1_targets()[0][2]
    report.ablation = prove_nonneg(main, [e for _, e in private_constraints(drop=[ablate])], space)
    report.pair_ablation = prove_nonneg(main, [e for _, e in private_constraints(drop=pair)], space)
    return report


# ---------------------------------------------------------------------------
# text syntax

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:/\d+)?)|(?P<fn>[HI])\(|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
                    r"|(?P<op>>=|<=|=|[-+*;|,()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at column {pos + 1}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        k, v = self.peek()
        if k is None or (kind and k != kind) or (value and v != value):
            raise ParseError(f"expected {value or kind} in {self.text!r}, got {v!r}")
        self.i += 1
        return v

    def group(self) -> list[str]:
        names = [self.take("name")]
        while self.peek() == ("op", ","):
            self.take()
            names.append(self.take("name"))
        return names

    def atom(self) -> InfoExpr:
        fn = self.take("fn")
        if fn == "H":
            a = self.group()
            c: list[str] = []
            if self.peek() == ("op", "|"):
                self.take()
                c = self.group()
            self.take("op", ")")
            return InfoExpr.H(a, c)
        a = self.group()
        self.take("op", ";")
        b = self.group()
        c = []
        if self.peek() == ("op", "|"):
            self.take()
            c = self.group()
        self.take("op", ")")
        return InfoExpr.I(a, b, c)

    def term(self) -> InfoExpr:
        k, v = self.peek()
        if k == "num":
            coef = Fraction(self.take())
            if self.peek() == ("op", "*"):
                self.take()
            elif self.peek()[0] != "fn":
                if coef != 0:
                    raise ParseError("nonzero constants are not supported (expressions are conic)")
                return InfoExpr()
            return coef * self.atom()
        return self.atom()

    def expr(self) -> InfoExpr:
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take() == "-" else 1
        out = sign * self.term()
        while self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take() == "-" else 1
            out = out + sign * self.term()
        return out


def parse_expr(text: str) -> InfoExpr:
    p = _Parser(text)
    e = p.expr()
    if p.peek()[0] is not None:
        raise ParseError(f"trailing input in {text!r}")
    return e


def parse_statement(text: str) -> tuple[str, InfoExpr]:
    """Parse ``lhs REL rhs`` into (REL, lhs - rhs) with REL in {'=', '>='}; '<=' is flipped."""
    p = _Parser(text)
    lhs = p.expr()
    rel = p.take("op")
    if rel not in ("=", ">=", "<="):
        raise ParseError(f"expected =, >= or <= in {text!r}")
    rhs = p.expr()
    if p.peek()[0] is not None:
        raise ParseError(f"trailing input in {text!r}")
    if rel == "<=":
        return ">=", rhs - lhs
    return rel, lhs - rhs


def statement_labels(text: str) -> list[str]:
    """Variable names mentioned in ``text``, including ones whose terms cancel."""
    return sorted({v for k, v in _tokenize(text) if k == "name"})


def parse_constraints(text: str) -> list[InfoExpr]:
    """One equality per line; '#' starts a comment; blank lines ignored."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rel, e = parse_statement(line)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if rel != "=":
            raise ParseError(f"line {lineno}: constraints must be equalities")
        out.append(e)
    return out
