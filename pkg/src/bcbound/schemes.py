"""Auxiliary-variable schemes for the private and common-message outer bounds.

A scheme is a factored law for the auxiliaries and the channel input;
pushing it through a :class:`~bcbound.probcore.Channel` yields the full
joint on which the equality constraints and rate expressions are evaluated.

Variable names used throughout: ``T, U, V, W1, W2, X, Y1, Y2``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .probcore import Channel, JointDist, VariableSpec, entropy, info_terms

PRIVATE_VARS = ("U", "V", "W1", "W2", "X", "Y1", "Y2")
COMMON_VARS = ("T", "U", "V", "W1", "W2", "X", "Y1", "Y2")
SIMPLEX_TOL = 1e-12


def _check_simplex(name: str, p: np.ndarray, ndim_simplex: int = 1) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim < ndim_simplex:
        raise ValueError(f"{name} has too few dimensions ({p.ndim})")
    if p.size and p.min() < 0:
        raise ValueError(f"{name} has a negative entry")
    axes = tuple(range(p.ndim - ndim_simplex, p.ndim))
    sums = p.sum(axis=axes)
    if np.any(np.abs(sums - 1.0) > SIMPLEX_TOL):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise ValueError(f"{name} slices do not sum to 1 (max deviation {worst:.3e})")
    return p


@dataclass(frozen=True, eq=False)
class PrivateScheme:
    """p(u) p(v) p(w1, w2 | u, v) p(x | u, v, w1, w2)."""

    p_u: np.ndarray
    p_v: np.ndarray
    p_w12_given_uv: np.ndarray  # [u, v, w1, w2]
    p_x_given_uvw: np.ndarray  # [u, v, w1, w2, x]

    def __post_init__(self):
        pu = _check_simplex("p_u", self.p_u)
        pv = _check_simplex("p_v", self.p_v)
        pw = _check_simplex("p_w12_given_uv", self.p_w12_given_uv, 2)
        px = _check_simplex("p_x_given_uvw", self.p_x_given_uvw)
        if pu.ndim != 1 or pv.ndim != 1 or pw.ndim != 4 or px.ndim != 5:
            raise ValueError("private scheme factors have the wrong number of axes")
        if pw.shape[:2] != (pu.size, pv.size) or px.shape[:4] != pw.shape:
            raise ValueError(f"inconsistent factor shapes {pu.shape}, {pv.shape}, {pw.shape}, {px.shape}")
        for k, v in (("p_u", pu), ("p_v", pv), ("p_w12_given_uv", pw), ("p_x_given_uvw", px)):
            object.__setattr__(self, k, v)

    @property
    def cards(self) -> tuple[int, int, int, int]:
        return tuple(int(c) for c in self.p_w12_given_uv.shape)  # type: ignore[return-value]

    @property
    def x_card(self) -> int:
        return self.p_x_given_uvw.shape[-1]

    def permuted(self, var: str, perm: Sequence[int]) -> "PrivateScheme":
        """Relabel the symbols of one auxiliary (or X) by ``perm``."""
        perm = np.asarray(perm)
        axis = {"U": 0, "V": 1, "W1": 2, "W2": 3, "X": 4}[var]
        f = dict(p_u=self.p_u, p_v=self.p_v, p_w12_given_uv=self.p_w12_given_uv,
                 p_x_given_uvw=self.p_x_given_uvw)
        if axis == 0:
            f["p_u"] = f["p_u"][perm]
        if axis == 1:
            f["p_v"] = f["p_v"][perm]
        if axis < 4:
            f["p_w12_given_uv"] = np.take(f["p_w12_given_uv"], perm, axis=axis)
        f["p_x_given_uvw"] = np.take(f["p_x_given_uvw"], perm, axis=axis)
        return PrivateScheme(**f)


@dataclass(frozen=True, eq=False)
class CommonScheme:
    """p(t) p(u) p(v) p(w1, w2 | t, u, v) p(x | t, u, v, w1, w2).

    With ``deterministic`` set, every slice of ``p_x_given_tuvw`` must be a
    point mass, i.e. X = f(t, u, v, w1, w2).
    """

    p_t: np.ndarray
    p_u: np.ndarray
    p_v: np.ndarray
    p_w12_given_tuv: np.ndarray  # [t, u, v, w1, w2]
    p_x_given_tuvw: np.ndarray  # [t, u, v, w1, w2, x]
    deterministic: bool = False

    def __post_init__(self):
        pt = _check_simplex("p_t", self.p_t)
        pu = _check_simplex("p_u", self.p_u)
        pv = _check_simplex("p_v", self.p_v)
        pw = _check_simplex("p_w12_given_tuv", self.p_w12_given_tuv, 2)
        px = _check_simplex("p_x_given_tuvw", self.p_x_given_tuvw)
        if pw.ndim != 5 or px.ndim != 6 or pw.shape[:3] != (pt.size, pu.size, pv.size):
            raise ValueError("inconsistent common scheme factor shapes")
        if px.shape[:5] != pw.shape:
            raise ValueError("p_x_given_tuvw does not match p_w12_given_tuv")
        if self.deterministic and not np.all((px == 0) | (px == 1)):
            raise ValueError("deterministic scheme has a non point-mass X slice")
        for k, v in (("p_t", pt), ("p_u", pu), ("p_v", pv), ("p_w12_given_tuv", pw),
                     ("p_x_given_tuvw", px)):
            object.__setattr__(self, k, v)

    @classmethod
    def from_map(cls, p_t, p_u, p_v, p_w12_given_tuv, x_map: np.ndarray, x_card: int) -> "CommonScheme":
        """Build a deterministic-X scheme from an integer map ``x_map[t, u, v, w1, w2]``."""
        x_map = np.asarray(x_map, dtype=int)
        if x_map.min() < 0 or x_map.max() >= x_card:
            raise ValueError("x_map has symbols outside the input alphabet")
        px = np.eye(x_card)[x_map]
        return cls(p_t, p_u, p_v, p_w12_given_tuv, px, deterministic=True)

    @property
    def x_map(self) -> np.ndarray | None:
        return self.p_x_given_tuvw.argmax(axis=-1) if self.deterministic else None

    @property
    def cards(self) -> tuple[int, int, int, int, int]:
        """(|U|, |V|, |W1|, |W2|, |T|)."""
        t, u, v, w1, w2 = self.p_w12_given_tuv.shape
        return (u, v, w1, w2, t)

    @property
    def x_card(self) -> int:
        return self.p_x_given_tuvw.shape[-1]

    def permuted(self, var: str, perm: Sequence[int]) -> "CommonScheme":
        perm = np.asarray(perm)
        axis = {"T": 0, "U": 1, "V": 2, "W1": 3, "W2": 4, "X": 5}[var]
        f = dict(p_t=self.p_t, p_u=self.p_u, p_v=self.p_v,
                 p_w12_given_tuv=self.p_w12_given_tuv, p_x_given_tuvw=self.p_x_given_tuvw)
        for k, i in (("p_t", 0), ("p_u", 1), ("p_v", 2)):
            if axis == i:
                f[k] = f[k][perm]
        if axis < 5:
            f["p_w12_given_tuv"] = np.take(f["p_w12_given_tuv"], perm, axis=axis)
        f["p_x_given_tuvw"] = np.take(f["p_x_given_tuvw"], perm, axis=axis)
        return CommonScheme(**f, deterministic=self.deterministic)


def singleton_private(p_x: Sequence[float]) -> PrivateScheme:
    """All auxiliaries trivial, X drawn from ``p_x`` independently of them."""
    p_x = np.asarray(p_x, float)
    return PrivateScheme(np.ones(1), np.ones(1), np.ones((1, 1, 1, 1)), p_x.reshape(1, 1, 1, 1, -1))


def product_scheme() -> PrivateScheme:
    """U, V uniform bits sent as X = (U, V) on the binary product channel; W1, W2 trivial."""
    px = np.zeros((2, 2, 1, 1, 4))
    for u in range(2):
        for v in range(2):
            px[u, v, 0, 0, 2 * u + v] = 1.0
    return PrivateScheme(np.full(2, 0.5), np.full(2, 0.5), np.ones((2, 2, 1, 1)), px)


def lift_to_common(scheme: PrivateScheme, p_t: Sequence[float] = (1.0,)) -> CommonScheme:
    """Add an independent T that X ignores."""
    p_t = np.asarray(p_t, float)
    nt = p_t.size
    pw = np.broadcast_to(scheme.p_w12_given_uv, (nt,) + scheme.p_w12_given_uv.shape).copy()
    px = np.broadcast_to(scheme.p_x_given_uvw, (nt,) + scheme.p_x_given_uvw.shape).copy()
    det = bool(np.all((px == 0) | (px == 1)))
    return CommonScheme(p_t, scheme.p_u, scheme.p_v, pw, px, deterministic=det)


def _variables(names: Iterable[str], cards: Sequence[int]) -> list[VariableSpec]:
    return [VariableSpec(n, int(c)) for n, c in zip(names, cards)]


def build_private_joint(scheme: PrivateScheme, ch: Channel) -> JointDist:
    """Joint over (U, V, W1, W2, X, Y1, Y2)."""
    if scheme.x_card != ch.x_card:
        raise ValueError(f"scheme input alphabet {scheme.x_card} != channel input alphabet {ch.x_card}")
    mass = np.einsum("u,v,uvab,uvabx,xyz->uvabxyz", scheme.p_u, scheme.p_v,
                     scheme.p_w12_given_uv, scheme.p_x_given_uvw, ch.law, optimize=True)
    cards = scheme.cards + (ch.x_card, ch.y1_card, ch.y2_card)
    return JointDist(_variables(PRIVATE_VARS, cards), mass)


def build_common_joint(scheme: CommonScheme, ch: Channel) -> JointDist:
    """Joint over (T, U, V, W1, W2, X, Y1, Y2)."""
    if scheme.x_card != ch.x_card:
        raise ValueError(f"scheme input alphabet {scheme.x_card} != channel input alphabet {ch.x_card}")
    mass = np.einsum("t,u,v,tuvab,tuvabx,xyz->tuvabxyz", scheme.p_t, scheme.p_u, scheme.p_v,
                     scheme.p_w12_given_tuv, scheme.p_x_given_tuvw, ch.law, optimize=True)
    t = scheme.p_t.size
    u, v, w1, w2, _ = scheme.cards
    cards = (t, u, v, w1, w2, ch.x_card, ch.y1_card, ch.y2_card)
    return JointDist(_variables(COMMON_VARS, cards), mass)


def build_joint(scheme, ch: Channel) -> JointDist:
    if isinstance(scheme, CommonScheme):
        return build_common_joint(scheme, ch)
    return build_private_joint(scheme, ch)


# ---------------------------------------------------------------------------
# information expressions and constraint families


@dataclass(frozen=True)
class Info:
    """I(A;B|C) over named groups, kept exactly as written."""

    a: tuple[str, ...]
    b: tuple[str, ...]
    c: tuple[str, ...] = ()

    def __str__(self) -> str:
        s = f"I({','.join(self.a)};{','.join(self.b)}"
        return s + (f"|{','.join(self.c)})" if self.c else ")")

    def terms(self) -> dict[frozenset, int]:
        return info_terms(self.a, self.b, self.c)

    @property
    def names(self) -> frozenset:
        return frozenset(self.a) | frozenset(self.b) | frozenset(self.c)


def I(a: str, b: str, c: str = "") -> Info:  # noqa: E743
    """Shorthand: ``I("U", "Y1", "V,W1")``."""
    split = lambda s: tuple(x for x in s.split(",") if x)  # noqa: E731
    return Info(split(a), split(b), split(c))


@dataclass(frozen=True)
class Equality:
    lhs: Info
    rhs: Info
    family: str = ""

    @property
    def id(self) -> str:
        return f"{self.lhs}={self.rhs}"

    def terms(self) -> dict[frozenset, int]:
        out = dict(self.lhs.terms())
        for s, c in self.rhs.terms().items():
            out[s] = out.get(s, 0) - c
        return {s: c for s, c in out.items() if c}


PRIVATE_EQUALITIES: tuple[Equality, ...] = (
    Equality(I("U", "Y1", "W1"), I("U", "Y1", "V,W1"), "1"),
    Equality(I("V", "Y2", "W2"), I("V", "Y2", "U,W2"), "1"),
    Equality(I("U", "V", "W1,W2,Y1"), I("U", "V", "W1,W2,Y2"), "1"),
    Equality(I("W2", "Y1", "W1"), I("W1", "Y2", "W2"), "1"),
    Equality(I("W2", "Y1", "U,W1"), I("W1", "Y2", "U,W2"), "1"),
    Equality(I("W2", "Y1", "V,W1"), I("W1", "Y2", "V,W2"), "1"),
    Equality(I("W2", "Y1", "U,V,W1"), I("W1", "Y2", "U,V,W2"), "1"),
)


def _subsets(items: Sequence[str], nonempty: bool = False) -> list[tuple[str, ...]]:
    out = []
    for r in range(1 if nonempty else 0, len(items) + 1):
        out.extend(itertools.combinations(items, r))
    return out


def _common_equalities() -> tuple[Equality, ...]:
    eqs = [Equality(I("T", "Y1", "W1"), I("T", "Y2", "W2"), "2")]
    chains = [
        ("T", "Y1", "W1", ["V", "U", "U,V"]),
        ("T", "Y2", "W2", ["V", "U", "U,V"]),
        ("U", "Y1", "W1", ["V", "T", "T,V"]),
        ("V", "Y2", "W2", ["U", "T", "T,U"]),
    ]
    for a, y, w, extras in chains:
        head = I(a, y, w)
        for e in extras:
            eqs.append(Equality(head, I(a, y, f"{e},{w}"), "2"))
    for A in _subsets(("T", "U", "V")):
        for B1 in _subsets(("T", "U"), nonempty=True):
            for B2 in _subsets(("T", "V"), nonempty=True):
                c = A + ("W1", "W2")
                eqs.append(Equality(Info(B1, B2, c + ("Y1",)), Info(B1, B2, c + ("Y2",)), "3"))
    for A in _subsets(("T", "U", "V")):
        eqs.append(Equality(Info(("W2",), ("Y1",), A + ("W1",)),
                            Info(("W1",), ("Y2",), A + ("W2",)), "4"))
    return tuple(eqs)


COMMON_EQUALITIES: tuple[Equality, ...] = _common_equalities()


@dataclass(frozen=True)
class ResidualEntry:
    id: str
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class ConstraintResiduals:
    entries: tuple[ResidualEntry, ...] = field(default_factory=tuple)

    @property
    def values(self) -> np.ndarray:
        return np.array([e.residual for e in self.entries])

    @property
    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values))) if self.entries else 0.0

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> ResidualEntry:
        return self.entries[i]

    def by_id(self) -> dict[str, ResidualEntry]:
        return {e.id: e for e in self.entries}


class _EntropyCache:
    """Memoizes H(S) for one joint; constraint families reuse subsets heavily."""

    def __init__(self, joint: JointDist):
        self.joint = joint
        self._h: dict[frozenset, float] = {}

    def H(self, s: frozenset) -> float:
        if s not in self._h:
            self._h[s] = entropy(self.joint, s)
        return self._h[s]

    def info(self, term: Info) -> float:
        return max(sum(c * self.H(s) for s, c in term.terms().items()), 0.0)


def _require(joint: JointDist, names: Iterable[str]) -> None:
    missing = [n for n in names if n not in joint]
    if missing:
        raise KeyError(f"joint is missing variables {missing}")


def evaluate_equalities(joint: JointDist, equalities: Sequence[Equality]) -> ConstraintResiduals:
    needed = set().union(*(e.lhs.names | e.rhs.names for e in equalities)) if equalities else set()
    _require(joint, sorted(needed))
    cache = _EntropyCache(joint)
    return ConstraintResiduals(tuple(
        ResidualEntry(e.id, cache.info(e.lhs), cache.info(e.rhs)) for e in equalities))


def residuals_private(joint: JointDist) -> ConstraintResiduals:
    """The seven private-message equalities, in their canonical order."""
    return evaluate_equalities(joint, PRIVATE_EQUALITIES)


def residuals_common(joint: JointDist) -> ConstraintResiduals:
    """13 chained T/U/V equalities, 72 cross-receiver instances, 8 W-exchange instances."""
    return evaluate_equalities(joint, COMMON_EQUALITIES)


def rate_point_private(joint: JointDist) -> tuple[float, float]:
    _require(joint, PRIVATE_VARS[:4] + ("Y1", "Y2"))
    cache = _EntropyCache(joint)
    return cache.info(I("U", "Y1", "W1")), cache.info(I("V", "Y2", "W2"))


def rate_point_common(joint: JointDist) -> tuple[float, float, float]:
    _require(joint, ("T", "U", "V", "W1", "W2", "Y1", "Y2"))
    cache = _EntropyCache(joint)
    r0 = min(cache.info(I("T", "Y1", "W1")), cache.info(I("T", "Y2", "W2")))
    return r0, cache.info(I("U", "Y1", "W1")), cache.info(I("V", "Y2", "W2"))
