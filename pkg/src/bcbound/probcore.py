"""Finite-alphabet joint distributions and Shannon information measures.

All quantities are in bits. A :class:`JointDist` is a dense probability
tensor whose axes are named variables; entropies of variable subsets are
computed by summing out the complementary axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

PROB_TOL = 1e-12
DEFAULT_SUPPORT_CAP = 10**7


class SupportCapError(ValueError):
    """Raised when a dense tensor would exceed the configured support cap."""


@dataclass(frozen=True)
class VariableSpec:
    name: str
    cardinality: int

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise ValueError(f"invalid variable name {self.name!r}")
        if int(self.cardinality) < 1:
            raise ValueError(f"variable {self.name} has cardinality {self.cardinality} < 1")


def _as_names(S: Iterable[str] | str) -> tuple[str, ...]:
    if isinstance(S, str):
        return (S,)
    return tuple(S)


def check_support(size: int, cap: int = DEFAULT_SUPPORT_CAP) -> None:
    if size > cap:
        raise SupportCapError(f"dense tensor of {size} entries exceeds support cap {cap}")


class JointDist:
    """Dense joint pmf over an ordered list of named finite variables.

    The mass tensor is copied, made read-only, and validated on construction.
    Tiny negative entries (above ``-PROB_TOL``) are clamped to zero.
    """

    __slots__ = ("variables", "mass", "_index")

    def __init__(self, variables: Sequence[VariableSpec], mass: np.ndarray,
                 *, support_cap: int = DEFAULT_SUPPORT_CAP):
        variables = tuple(variables)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        shape = tuple(int(v.cardinality) for v in variables)
        check_support(int(np.prod(shape, dtype=np.int64)), support_cap)
        mass = np.array(mass, dtype=float)
        if mass.shape != shape:
            raise ValueError(f"mass shape {mass.shape} does not match cardinalities {shape}")
        if not np.all(np.isfinite(mass)):
            raise ValueError("mass contains non-finite entries")
        if mass.size and mass.min() < -PROB_TOL:
            raise ValueError(f"negative probability {mass.min():.3e}")
        mass = np.clip(mass, 0.0, None)
        total = mass.sum()
        if abs(total - 1.0) > PROB_TOL * max(1, mass.size) ** 0.5 + PROB_TOL:
            raise ValueError(f"mass sums to {total!r}, not 1")
        mass.setflags(write=False)
        self.variables = variables
        self.mass = mass
        self._index = {n: i for i, n in enumerate(names)}

    @classmethod
    def from_dict(cls, cards: Mapping[str, int], mass: np.ndarray) -> "JointDist":
        return cls([VariableSpec(n, c) for n, c in cards.items()], mass)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mass.shape

    def card(self, name: str) -> int:
        return self.variables[self.axis(name)].cardinality

    def axis(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}; have {list(self._index)}") from None

    def axes(self, S: Iterable[str]) -> tuple[int, ...]:
        return tuple(sorted({self.axis(n) for n in _as_names(S)}))

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __repr__(self) -> str:
        body = ", ".join(f"{v.name}:{v.cardinality}" for v in self.variables)
        return f"JointDist({body})"


def _entropy_of_marginal(m: np.ndarray) -> float:
    p = m[m > 0]
    return float(-(p * np.log2(p)).sum())


def marginal_mass(dist: JointDist, S: Iterable[str]) -> np.ndarray:
    """Marginal tensor over ``S`` with axes in the distribution's variable order."""
    keep = dist.axes(S)
    drop = tuple(i for i in range(dist.mass.ndim) if i not in keep)
    return dist.mass.sum(axis=drop)


def marginalize(dist: JointDist, S: Iterable[str]) -> JointDist:
    names = _as_names(S)
    if not names:
        raise ValueError("cannot marginalize onto an empty set")
    keep = dist.axes(names)
    m = marginal_mass(dist, names)
    m = m / m.sum()
    return JointDist([dist.variables[i] for i in keep], m)


def entropy(dist: JointDist, S: Iterable[str]) -> float:
    """H(S) in bits."""
    names = _as_names(S)
    if not names:
        raise ValueError("entropy of an empty set is not defined here; use 0")
    # constant variables carry no entropy; dropping them makes equal marginals sum identically
    names = [n for n in names if dist.card(n) > 1]
    if not names:
        return 0.0
    return _entropy_of_marginal(marginal_mass(dist, names))


def cond_entropy(dist: JointDist, A: Iterable[str], C: Iterable[str] = ()) -> float:
    A, C = set(_as_names(A)), set(_as_names(C))
    if not A:
        raise ValueError("empty target set")
    hc = entropy(dist, C) if C else 0.0
    return max(entropy(dist, A | C) - hc, 0.0)


def info_terms(A: Iterable[str], B: Iterable[str], C: Iterable[str] = ()) -> dict[frozenset, int]:
    """Entropy expansion of I(A;B|C) as ``{subset: coefficient}``.

    Groups are treated as sets, so overlapping groups follow the usual
    convention (e.g. I(A;A|C) = H(A|C)); empty subsets are dropped.
    """
    A, B, C = frozenset(_as_names(A)), frozenset(_as_names(B)), frozenset(_as_names(C))
    out: dict[frozenset, int] = {}
    for s, c in ((A | C, 1), (B | C, 1), (A | B | C, -1), (C, -1)):
        if s:
            out[s] = out.get(s, 0) + c
    return {s: c for s, c in out.items() if c}


def eval_terms(dist: JointDist, terms: Mapping[frozenset, float]) -> float:
    return float(sum(c * entropy(dist, s) for s, c in terms.items()))


def cond_mutual_info(dist: JointDist, A: Iterable[str], B: Iterable[str],
                     C: Iterable[str] = ()) -> float:
    """I(A;B|C) in bits, clamped at zero within ``PROB_TOL``.

    Variables repeated in C and in A or B are dropped from A or B; A and B
    themselves must not share a variable.
    """
    A, B, C = set(_as_names(A)), set(_as_names(B)), set(_as_names(C))
    for n in A | B | C:
        dist.axis(n)
    if not A or not B:
        raise ValueError("I(A;B|C) needs nonempty A and B")
    if A & B:
        raise ValueError(f"A and B share variables {sorted(A & B)}")
    A, B = A - C, B - C
    if not A or not B:
        return 0.0
    val = eval_terms(dist, info_terms(A, B, C))
    if val < 0:
        if val < -1e-9:
            raise FloatingPointError(f"I(A;B|C) = {val:.3e} is significantly negative")
        return 0.0
    return val


def mutual_info(dist: JointDist, A: Iterable[str], B: Iterable[str]) -> float:
    return cond_mutual_info(dist, A, B, ())


def product(*dists: JointDist) -> JointDist:
    """Independent product of distributions over disjoint variable sets."""
    mass = dists[0].mass
    variables = list(dists[0].variables)
    for d in dists[1:]:
        mass = np.multiply.outer(mass, d.mass)
        variables.extend(d.variables)
    return JointDist(variables, mass)


def random_joint(cards: Mapping[str, int], rng: np.random.Generator,
                 sparsity: float = 0.0) -> JointDist:
    """Random joint pmf; ``sparsity`` is the probability that an entry is zeroed."""
    shape = tuple(cards.values())
    m = rng.exponential(size=shape)
    if sparsity > 0:
        m = m * (rng.random(shape) >= sparsity)
        if m.sum() == 0:
            m.flat[0] = 1.0
    return JointDist.from_dict(cards, m / m.sum())


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


class Channel:
    """Broadcast channel law p(y1, y2 | x) stored as an array ``[x, y1, y2]``."""

    __slots__ = ("law",)

    def __init__(self, law: np.ndarray, tol: float = PROB_TOL):
        law = np.array(law, dtype=float)
        if law.ndim != 3:
            raise ValueError(f"channel law must be 3-D [x][y1][y2], got shape {law.shape}")
        if law.size == 0:
            raise ValueError("empty channel law")
        if law.min() < 0:
            bad = int(np.argwhere(law < 0)[0][0])
            raise ValueError(f"negative entry in channel row x={bad}")
        sums = law.sum(axis=(1, 2))
        for x, s in enumerate(sums):
            if abs(s - 1.0) > tol:
                raise ValueError(f"channel row x={x} sums to {s!r}, not 1")
        law.setflags(write=False)
        self.law = law

    @property
    def x_card(self) -> int:
        return self.law.shape[0]

    @property
    def y1_card(self) -> int:
        return self.law.shape[1]

    @property
    def y2_card(self) -> int:
        return self.law.shape[2]

    @classmethod
    def from_marginals(cls, w1: np.ndarray, w2: np.ndarray) -> "Channel":
        """Channel whose outputs are conditionally independent given X."""
        w1, w2 = np.asarray(w1, float), np.asarray(w2, float)
        return cls(w1[:, :, None] * w2[:, None, :])

    def __eq__(self, other):
        return isinstance(other, Channel) and np.array_equal(self.law, other.law)

    def __repr__(self) -> str:
        return f"Channel(x={self.x_card}, y1={self.y1_card}, y2={self.y2_card})"


def bsc(p: float) -> np.ndarray:
    return np.array([[1 - p, p], [p, 1 - p]])


def bsc_pair(p1: float, p2: float | None = None) -> Channel:
    """Binary input observed through two independent BSCs."""
    return Channel.from_marginals(bsc(p1), bsc(p1 if p2 is None else p2))


def product_channel(a: int = 2, b: int = 2) -> Channel:
    """Input X = (A, B) flattened as ``x = a_sym * b + b_sym``; Y1 = A and Y2 = B, noiseless."""
    law = np.zeros((a * b, a, b))
    for i in range(a):
        for j in range(b):
            law[i * b + j, i, j] = 1.0
    return Channel(law)


def random_channel(x: int, y1: int, y2: int, rng: np.random.Generator) -> Channel:
    law = rng.exponential(size=(x, y1, y2))
    return Channel(law / law.sum(axis=(1, 2), keepdims=True))
