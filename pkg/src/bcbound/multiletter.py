"""Finite-blocklength code joints and the identities behind the converse.

A block code maps independent uniform messages to an input sequence x^n,
which the memoryless broadcast channel turns into Y1^n and Y2^n. From that
exact joint we check the Csiszar sum identity, the telescoping of the
cross-receiver message information, and build the time-shared single-letter
joint with W1 = (Q, Y1^{Q-1}) and W2 = (Q, Y2_{Q+1}^n).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .probcore import (DEFAULT_SUPPORT_CAP, Channel, JointDist, SupportCapError, VariableSpec,
                       check_support, cond_entropy, cond_mutual_info, marginal_mass)
from .schemes import ConstraintResiduals, residuals_common, residuals_private

MAX_BLOCKLENGTH = 3
IDENTITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BlockCode:
    """Deterministic encoder ``encoder[m0?, m1, m2] -> x^n`` (last axis has length n)."""

    n: int
    m1_card: int
    m2_card: int
    encoder: np.ndarray
    m0_card: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("blocklength must be >= 1")
        enc = np.asarray(self.encoder, dtype=int)
        msg_shape = ((self.m0_card,) if self.m0_card else ()) + (self.m1_card, self.m2_card)
        if enc.shape != msg_shape + (self.n,):
            raise ValueError(f"encoder shape {enc.shape} != {msg_shape + (self.n,)}")
        if enc.size and enc.min() < 0:
            raise ValueError("encoder emits a negative symbol")
        enc.setflags(write=False)
        object.__setattr__(self, "encoder", enc)

    @property
    def messages(self) -> tuple[str, ...]:
        return ("M0", "M1", "M2") if self.m0_card else ("M1", "M2")

    @property
    def message_cards(self) -> tuple[int, ...]:
        return ((self.m0_card,) if self.m0_card else ()) + (self.m1_card, self.m2_card)


def random_code(n: int, m1_card: int, m2_card: int, x_card: int, seed: int,
                m0_card: int | None = None) -> BlockCode:
    rng = np.random.default_rng(seed)
    shape = ((m0_card,) if m0_card else ()) + (m1_card, m2_card, n)
    return BlockCode(n, m1_card, m2_card, rng.integers(0, x_card, size=shape), m0_card)


def identity_code(n: int, a: int = 2, b: int = 2) -> BlockCode:
    """Uncoded transmission on the ``a x b`` product channel: symbol i carries digit i of each message."""
    enc = np.zeros((a**n, b**n, n), dtype=int)
    for m1 in range(a**n):
        d1 = np.unravel_index(m1, (a,) * n)
        for m2 in range(b**n):
            d2 = np.unravel_index(m2, (b,) * n)
            enc[m1, m2] = [d1[i] * b + d2[i] for i in range(n)]
    return BlockCode(n, a**n, b**n, enc)


def repetition_code(n: int) -> BlockCode:
    """One bit for receiver 1 repeated n times; receiver 2's message set is trivial."""
    enc = np.repeat(np.arange(2)[:, None, None], n, axis=2)
    return BlockCode(n, 2, 1, enc)


def x_name(i: int) -> str:
    return f"X_{i}"


def y1_name(i: int) -> str:
    return f"Y1_{i}"


def y2_name(i: int) -> str:
    return f"Y2_{i}"


def _y1(idx: Iterable[int]) -> list[str]:
    return [y1_name(i) for i in idx]


def _y2(idx: Iterable[int]) -> list[str]:
    return [y2_name(i) for i in idx]


def code_joint(code: BlockCode, ch: Channel, support_cap: int = DEFAULT_SUPPORT_CAP) -> JointDist:
    """Exact joint over (messages, X_1..X_n, Y1_1..Y1_n, Y2_1..Y2_n); positions are 1-based."""
    n = code.n
    if n > MAX_BLOCKLENGTH:
        raise SupportCapError(f"blocklength {n} exceeds the cap {MAX_BLOCKLENGTH}")
    if code.encoder.size and code.encoder.max() >= ch.x_card:
        raise ValueError(f"encoder emits symbols outside the channel input alphabet of size {ch.x_card}")
    mcards = code.message_cards
    X, A, B = ch.law.shape
    shape = mcards + (X,) * n + (A,) * n + (B,) * n
    check_support(int(np.prod(shape, dtype=np.int64)), support_cap)

    nm = len(mcards)
    enc = np.zeros(mcards + (X,) * n)
    for m in itertools.product(*(range(c) for c in mcards)):
        enc[m + tuple(code.encoder[m])] = 1.0
    enc /= np.prod(mcards)
    mass = enc.reshape(enc.shape + (1,) * (2 * n))
    for i in range(n):
        bshape = [1] * len(shape)
        bshape[nm + i], bshape[nm + n + i], bshape[nm + 2 * n + i] = X, A, B
        mass = mass * ch.law.reshape(bshape)
    names = list(code.messages) + [x_name(i) for i in range(1, n + 1)] + _y1(range(1, n + 1)) + _y2(range(1, n + 1))
    return JointDist([VariableSpec(nm_, c) for nm_, c in zip(names, shape)], mass,
                     support_cap=support_cap)


def code_length(joint: JointDist) -> int:
    n = sum(1 for nm in joint.names if nm.startswith("Y1_"))
    if n < 1 or any(y1_name(i) not in joint or y2_name(i) not in joint for i in range(1, n + 1)):
        raise ValueError("joint does not hold well-formed Y1_i / Y2_i sequences")
    return n


def memoryless_residual(joint: JointDist, i: int) -> float:
    """I(Y1_i, Y2_i ; everything else | X_i)."""
    ys = [y1_name(i), y2_name(i)]
    rest = [nm for nm in joint.names if nm not in ys and nm != x_name(i)]
    return cond_mutual_info(joint, ys, rest, [x_name(i)])


def _mi(joint: JointDist, A: Sequence[str], B: Sequence[str], C: Sequence[str]) -> float:
    if not A or not B:
        return 0.0
    return cond_mutual_info(joint, A, B, C)


def csiszar_check(joint: JointDist, K: Sequence[str] = ()) -> tuple[float, float]:
    """(sum_i I(Y2_{i+1}^n; Y1_i | Y1^{i-1}, K), sum_i I(Y1^{i-1}; Y2_i | Y2_{i+1}^n, K))."""
    n = code_length(joint)
    K = list(K)
    lhs = rhs = 0.0
    for i in range(1, n + 1):
        prefix, suffix = _y1(range(1, i)), _y2(range(i + 1, n + 1))
        lhs += _mi(joint, suffix, [y1_name(i)], prefix + K)
        rhs += _mi(joint, prefix, [y2_name(i)], suffix + K)
    return lhs, rhs


def telescope_check(joint: JointDist) -> tuple[float, float]:
    """(sum of per-position differences, I(M1;M2|Y1^n) - I(M1;M2|Y2^n))."""
    n = code_length(joint)
    total = 0.0
    for i in range(1, n + 1):
        total += (cond_mutual_info(joint, ["M1"], ["M2"], _y1(range(1, i + 1)) + _y2(range(i + 1, n + 1)))
                  - cond_mutual_info(joint, ["M1"], ["M2"], _y1(range(1, i)) + _y2(range(i, n + 1))))
    end = (cond_mutual_info(joint, ["M1"], ["M2"], _y1(range(1, n + 1)))
           - cond_mutual_info(joint, ["M1"], ["M2"], _y2(range(1, n + 1))))
    return total, end


def is_zero_error(code: BlockCode, ch: Channel) -> tuple[bool, bool]:
    """Whether H(M_k | Y_k^n) vanishes for receiver k = 1, 2."""
    joint = code_joint(code, ch)
    n = code.n
    return (cond_entropy(joint, ["M1"], _y1(range(1, n + 1))) <= IDENTITY_TOL,
            cond_entropy(joint, ["M2"], _y2(range(1, n + 1))) <= IDENTITY_TOL)


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    observed: float
    predicted: float
    tol: float = IDENTITY_TOL

    @property
    def error(self) -> float:
        return abs(self.observed - self.predicted)

    @property
    def ok(self) -> bool:
        return self.error <= self.tol


@dataclass(frozen=True)
class Identification:
    joint: JointDist
    residuals: ConstraintResiduals
    identities: tuple[IdentityCheck, ...]


def _single_letter_joint(cj: JointDist, n: int, msgs: Sequence[str]) -> JointDist:
    A, B = cj.card(y1_name(1)), cj.card(y2_name(1))
    X = cj.card(x_name(1))
    w1_sizes = [A ** (q - 1) for q in range(1, n + 1)]
    w2_sizes = [B ** (n - q) for q in range(1, n + 1)]
    w1_off = np.concatenate([[0], np.cumsum(w1_sizes)])
    w2_off = np.concatenate([[0], np.cumsum(w2_sizes)])
    mcards = [cj.card(m) for m in msgs]
    out = np.zeros(mcards + [int(w1_off[-1]), int(w2_off[-1]), X, A, B])
    nm = len(msgs)
    for q in range(1, n + 1):
        prefix, suffix = _y1(range(1, q)), _y2(range(q + 1, n + 1))
        order = list(msgs) + prefix + suffix + [x_name(q), y1_name(q), y2_name(q)]
        marg = marginal_mass(cj, order)
        # marginal_mass returns axes in the joint's order; permute to `order`
        axes_sorted = sorted(order, key=cj.axis)
        marg = np.transpose(marg, [axes_sorted.index(v) for v in order])
        block = marg.reshape(mcards + [w1_sizes[q - 1], w2_sizes[q - 1], X, A, B]) / n
        sl = (slice(None),) * nm + (slice(w1_off[q - 1], w1_off[q]), slice(w2_off[q - 1], w2_off[q]))
        out[sl] = block
    names = (["T"] if nm == 3 else []) + ["U", "V", "W1", "W2", "X", "Y1", "Y2"]
    return JointDist([VariableSpec(v, c) for v, c in zip(names, out.shape)], out)


def single_letter_identify(code: BlockCode, ch: Channel) -> Identification:
    """Time-shared single-letter joint with (T =) M0, U = M1, V = M2.

    W1 takes values in the tagged union over q of Y1^{q-1} realizations, W2
    in the tagged union over q of Y2_{q+1}^n realizations; both tags equal
    the uniform time index Q. For private-message codes the seven residuals
    are compared with their exact finite-n values.
    """
    cj = code_joint(code, ch)
    n = code.n
    sl = _single_letter_joint(cj, n, code.messages)
    if code.m0_card:
        return Identification(sl, residuals_common(sl), ())
    res = residuals_private(sl)
    y1n, y2n = _y1(range(1, n + 1)), _y2(range(1, n + 1))
    a = cond_mutual_info(cj, ["M1"], ["M2"], y1n)
    b = cond_mutual_info(cj, ["M1"], ["M2"], y2n)
    predicted = [-a / n, -b / n, (a - b) / n, 0.0, 0.0, 0.0, 0.0]
    checks = [IdentityCheck(f"residual_{k + 1}", res[k].residual, p) for k, p in enumerate(predicted)]
    # rate consistency: I(U;Y1|W1) = (1/n) sum_i I(M1; Y1_i | Y1^{i-1})
    r1 = sum(cond_mutual_info(cj, ["M1"], [y1_name(i)], _y1(range(1, i))) for i in range(1, n + 1)) / n
    r2 = sum(cond_mutual_info(cj, ["M2"], [y2_name(i)], _y2(range(i + 1, n + 1))) for i in range(1, n + 1)) / n
    checks.append(IdentityCheck("rate_1", res[0].lhs, r1))
    checks.append(IdentityCheck("rate_2", res[1].lhs, r2))
    return Identification(sl, res, tuple(checks))
