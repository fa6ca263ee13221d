"""Membership slacks for the comparison bounds and pointwise inclusion checks.

Two prior regions are evaluated on a given joint: the private-message
polytope (two individual and two sum-rate inequalities, with W taken as the
pair (W1, W2)) and the eleven-inequality common-message region. A rate
point from the new constrained bound is "included" when every slack is
nonnegative up to tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .probcore import Channel, JointDist, entropy, info_terms
from .schemes import (CommonScheme, ConstraintResiduals, PrivateScheme, build_common_joint,
                      build_private_joint, rate_point_common, rate_point_private,
                      residuals_common, residuals_private)

MEMBERSHIP_TOL = 1e-5
CONSTRAINT_TOL = 1e-6
HULL_TOL = 1e-9  # margin below which a point counts as on the hull boundary


@dataclass(frozen=True)
class SlackEntry:
    id: str
    bound: float
    rate: float

    @property
    def slack(self) -> float:
        return self.bound - self.rate


@dataclass(frozen=True)
class SlackVector:
    entries: tuple[SlackEntry, ...]

    @property
    def min_slack(self) -> float:
        return min(e.slack for e in self.entries)

    def contains(self, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.min_slack >= -tol

    def by_id(self) -> dict[str, SlackEntry]:
        return {e.id: e for e in self.entries}


class _Terms:
    """Cached I(A;B|C) evaluator over a joint, groups given as comma strings."""

    def __init__(self, joint: JointDist):
        self.joint = joint
        self._h: dict[frozenset, float] = {}

    def H(self, s: frozenset) -> float:
        if s not in self._h:
            self._h[s] = entropy(self.joint, s)
        return self._h[s]

    def __call__(self, a: str, b: str, c: str = "") -> float:
        sp = lambda s: [x for x in s.split(",") if x]  # noqa: E731
        val = sum(k * self.H(s) for s, k in info_terms(sp(a), sp(b), sp(c)).items())
        return max(val, 0.0)


def _require(joint: JointDist, names: str) -> None:
    missing = [n for n in names.split(",") if n not in joint]
    if missing:
        raise KeyError(f"joint is missing variables {missing}")


def bound1_slacks(joint: JointDist, r: Sequence[float]) -> SlackVector:
    """Slacks of (R1, R2) against the private-message polytope with W = (W1, W2)."""
    _require(joint, "U,V,W1,W2,Y1,Y2")
    i = _Terms(joint)
    r1, r2 = float(r[0]), float(r[1])
    m = min(i("W1,W2", "Y1"), i("W1,W2", "Y2"))
    return SlackVector((
        SlackEntry("R1<=I(U,W;Y1)", i("U,W1,W2", "Y1"), r1),
        SlackEntry("R2<=I(V,W;Y2)", i("V,W1,W2", "Y2"), r2),
        SlackEntry("R1+R2<=min{I(W;Y1),I(W;Y2)}+I(U;Y1|W)+I(V;Y2|U,W)",
                   m + i("U", "Y1", "W1,W2") + i("V", "Y2", "U,W1,W2"), r1 + r2),
        SlackEntry("R1+R2<=min{I(W;Y1),I(W;Y2)}+I(U;Y1|V,W)+I(V;Y2|W)",
                   m + i("U", "Y1", "V,W1,W2") + i("V", "Y2", "W1,W2"), r1 + r2),
    ))


def obs1_meta_identity(joint: JointDist) -> tuple[float, float]:
    """Return (difference of the two sum-rate private terms, cross-receiver discrepancy).

    The first value is [I(U;Y1|W)+I(V;Y2|U,W)] - [I(U;Y1|V,W)+I(V;Y2|W)], the
    second I(U;V|W,Y2) - I(U;V|W,Y1), with W = (W1, W2). They agree for every
    joint by the chain rule.
    """
    _require(joint, "U,V,W1,W2,Y1,Y2")
    i = _Terms(joint)
    lhs = (i("U", "Y1", "W1,W2") + i("V", "Y2", "U,W1,W2")
           - i("U", "Y1", "V,W1,W2") - i("V", "Y2", "W1,W2"))
    disc = i("U", "V", "W1,W2,Y2") - i("U", "V", "W1,W2,Y1")
    return lhs, disc


NJ_MODES = ("corrected", "literal")


def nj_slacks(joint: JointDist, r: Sequence[float], literal_mode: bool = False) -> SlackVector:
    """Slacks of (R0, R1, R2) against the eleven New-Jersey inequalities.

    Corrected mode (default) reads the third line as I(V;Y2|W2) and the sixth
    as I(T,V;Y2|W2). Literal mode evaluates them as printed, with the
    unqualified W taken as (W1, W2).
    """
    _require(joint, "T,U,V,W1,W2,Y1,Y2")
    i = _Terms(joint)
    r0, r1, r2 = (float(x) for x in r)
    if literal_mode:
        line3 = ("R2<=I(V;Y2|W)", i("V", "Y2", "W1,W2"))
        line6 = ("R0+R2<=I(T,U;Y2|W2)", i("T,U", "Y2", "W2"))
    else:
        line3 = ("R2<=I(V;Y2|W2)", i("V", "Y2", "W2"))
        line6 = ("R0+R2<=I(T,V;Y2|W2)", i("T,V", "Y2", "W2"))
    s = r0 + r1 + r2
    return SlackVector((
        SlackEntry("R0<=min{I(T;Y1|W1),I(T;Y2|W2)}", min(i("T", "Y1", "W1"), i("T", "Y2", "W2")), r0),
        SlackEntry("R1<=I(U;Y1|W1)", i("U", "Y1", "W1"), r1),
        SlackEntry(line3[0], line3[1], r2),
        SlackEntry("R0+R1<=I(T,U;Y1|W1)", i("T,U", "Y1", "W1"), r0 + r1),
        SlackEntry("R0+R1<=I(U;Y1|T,W1,W2)+I(T,W1;Y2|W2)",
                   i("U", "Y1", "T,W1,W2") + i("T,W1", "Y2", "W2"), r0 + r1),
        SlackEntry(line6[0], line6[1], r0 + r2),
        SlackEntry("R0+R2<=I(V;Y2|T,W1,W2)+I(T,W2;Y1|W1)",
                   i("V", "Y2", "T,W1,W2") + i("T,W2", "Y1", "W1"), r0 + r2),
        SlackEntry("R0+R1+R2<=I(U;Y1|T,V,W1,W2)+I(T,V,W1;Y2|W2)",
                   i("U", "Y1", "T,V,W1,W2") + i("T,V,W1", "Y2", "W2"), s),
        SlackEntry("R0+R1+R2<=I(V;Y2|T,U,W1,W2)+I(T,U,W2;Y1|W1)",
                   i("V", "Y2", "T,U,W1,W2") + i("T,U,W2", "Y1", "W1"), s),
        SlackEntry("R0+R1+R2<=I(U;Y1|T,V,W1,W2)+I(T,W1,W2;Y1)+I(V;Y2|T,W1,W2)",
                   i("U", "Y1", "T,V,W1,W2") + i("T,W1,W2", "Y1") + i("V", "Y2", "T,W1,W2"), s),
        SlackEntry("R0+R1+R2<=I(V;Y2|T,U,W1,W2)+I(T,W1,W2;Y2)+I(U;Y1|T,W1,W2)",
                   i("V", "Y2", "T,U,W1,W2") + i("T,W1,W2", "Y2") + i("U", "Y1", "T,W1,W2"), s),
    ))


@dataclass(frozen=True)
class InclusionReport:
    which: str
    residuals: ConstraintResiduals
    rate: tuple[float, ...]
    slacks: SlackVector
    constraint_tol: float = CONSTRAINT_TOL
    membership_tol: float = MEMBERSHIP_TOL

    @property
    def residual_inf(self) -> float:
        return self.residuals.norm_inf

    @property
    def feasible(self) -> bool:
        return self.residual_inf <= self.constraint_tol

    @property
    def contained(self) -> bool:
        return self.slacks.contains(self.membership_tol)

    @property
    def verdict(self) -> str:
        return "pass" if self.feasible and self.contained else "fail"


def claim_check(scheme: PrivateScheme | CommonScheme, channel: Channel, which: str = "claim1",
                constraint_tol: float = CONSTRAINT_TOL, membership_tol: float = MEMBERSHIP_TOL,
                literal_mode: bool = False) -> InclusionReport:
    """Check that the scheme's constrained rate point lies in the comparison region."""
    if which == "claim1":
        if not isinstance(scheme, PrivateScheme):
            raise TypeError("claim1 needs a PrivateScheme")
        joint = build_private_joint(scheme, channel)
        res = residuals_private(joint)
        rate = rate_point_private(joint)
        slacks = bound1_slacks(joint, rate)
    elif which == "claim2":
        if not isinstance(scheme, CommonScheme):
            raise TypeError("claim2 needs a CommonScheme")
        joint = build_common_joint(scheme, channel)
        res = residuals_common(joint)
        rate = rate_point_common(joint)
        slacks = nj_slacks(joint, rate, literal_mode=literal_mode)
    else:
        raise ValueError(f"unknown claim {which!r}")
    return InclusionReport(which, res, tuple(rate), slacks, constraint_tol, membership_tol)


# ---------------------------------------------------------------------------
# frontiers


def _pareto_mask(P: np.ndarray) -> np.ndarray:
    keep = np.ones(len(P), dtype=bool)
    for i, p in enumerate(P):
        ge = np.all(P >= p, axis=1)
        gt = np.any(P > p, axis=1)
        if np.any(ge & gt):
            keep[i] = False
    # exact duplicates: keep the first
    _, first = np.unique(P, axis=0, return_index=True)
    dup = np.ones(len(P), dtype=bool)
    dup[first] = False
    return keep & ~dup


def _dominance_margin(Q: np.ndarray, p: np.ndarray) -> float:
    """Largest t such that some convex combination of the rows of Q is >= p + t in every coordinate."""
    n, d = Q.shape
    # variables (lam_1..lam_n, t): maximize t s.t. Q^T lam >= p + t, lam in the simplex
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-Q.T, np.ones((d, 1))])
    A_eq = np.concatenate([np.ones(n), [0.0]])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=-p, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * n + [(None, None)], method="highs")
    if res.status != 0:
        raise RuntimeError(f"dominance LP failed: {res.message}")
    return float(res.x[-1])


def frontier(points: Sequence[Sequence[float]], mode: str = "raw") -> list[tuple[float, ...]]:
    """Non-dominated rate points, sorted by the first coordinate.

    ``raw`` keeps the Pareto-maximal sample points. ``hull`` keeps the
    vertices of the upper-right boundary of the convex hull of the sample
    and its projections onto the axes (time sharing makes that hull
    achievable whenever the sample is).
    """
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        raise ValueError("frontier of an empty sample")
    if P.ndim != 2:
        raise ValueError("points must be a 2-D array of rate tuples")
    P = P[_pareto_mask(P)]
    if mode == "hull":
        # drop one point at a time so that of two (near-)equal vertices one survives
        keep = list(range(len(P)))
        for i in np.argsort(P.sum(axis=1), kind="stable"):
            others = [j for j in keep if j != i]
            if others and _dominance_margin(P[others], P[i]) >= -HULL_TOL:
                keep.remove(i)
        P = P[keep]
    elif mode != "raw":
        raise ValueError(f"unknown frontier mode {mode!r}")
    order = np.lexsort(tuple(P[:, k] for k in reversed(range(P.shape[1]))))
    return [tuple(float(x) for x in P[i]) for i in order]


def hull_dominates(vertices: Sequence[Sequence[float]], point: Sequence[float], tol: float = 0.0) -> bool:
    """True if ``point`` lies in the down-closed convex hull of ``vertices`` (up to ``tol``)."""
    Q = np.asarray(vertices, dtype=float)
    if Q.size == 0:
        return False
    return _dominance_margin(Q, np.asarray(point, dtype=float)) >= -tol
