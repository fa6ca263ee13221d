"""Seeded multistart search over auxiliary schemes.

Every simplex factor of a scheme is written as a softmax of free logits.
Entropies of variable subsets are differentiated analytically with respect
to the joint tensor (dH(S)/dp = -log2 p_S, up to a constant that drops out
because the joint always sums to one) and pulled back through the einsum
that assembles the joint and through the softmax.

Each restart runs in two phases: a least-squares feasibility solve that
drives every equality residual to zero, then a quadratic-penalty ascent on
the weighted rate with a feasibility restore after every penalty stage.
Only stages that come back feasible and do not lower the rate are kept.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from .probcore import Channel, info_terms
from .schemes import (COMMON_EQUALITIES, COMMON_VARS, PRIVATE_EQUALITIES, PRIVATE_VARS,
                      CommonScheme, PrivateScheme, build_joint, rate_point_common,
                      rate_point_private, residuals_common, residuals_private)

log = logging.getLogger(__name__)

MIN_ENTRY = 1e-6
_LETTERS = {"T": "t", "U": "u", "V": "v", "W1": "a", "W2": "b", "X": "x", "Y1": "y", "Y2": "z"}


@dataclass(frozen=True)
class SearchConfig:
    cards: tuple[int, ...] | None = None  # (u, v, w1, w2[, t]); None -> channel input size
    common: bool = False
    deterministic_x: bool = True  # common schemes only
    restarts: int = 8
    max_iters: int = 400
    constraint_tol: float = 1e-6
    penalty_weights: tuple[float, ...] = (10.0, 100.0, 1000.0, 10000.0)
    sweep: tuple[tuple[float, ...], ...] = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0))
    seed: int = 0
    jobs: int = 1
    hops: int = 2  # perturb-and-reascend rounds after each restart's ascent
    hop_scale: float = 1.0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.constraint_tol <= 0:
            raise ValueError("constraint_tol must be > 0")
        if not self.penalty_weights or min(self.penalty_weights) <= 0:
            raise ValueError("penalty weights must be positive")
        if self.cards is not None:
            n = 5 if self.common else 4
            if len(self.cards) != n or min(self.cards) < 1:
                raise ValueError(f"cards must be {n} positive integers")
        dim = 3 if self.common else 2
        for lam in self.sweep:
            if len(lam) != dim or min(lam) < 0:
                raise ValueError(f"each rate weight vector must have {dim} nonnegative entries")
        if not self.sweep:
            raise ValueError("rate weight sweep is empty")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.hops < 0 or self.hop_scale < 0:
            raise ValueError("hops and hop_scale must be >= 0")

    def resolved_cards(self, channel: Channel) -> tuple[int, ...]:
        if self.cards is not None:
            return tuple(int(c) for c in self.cards)
        return (channel.x_card,) * (5 if self.common else 4)


# ---------------------------------------------------------------------------
# random schemes


def _simplex(rng: np.random.Generator, shape: tuple[int, ...], ndim: int = 1) -> np.ndarray:
    p = rng.exponential(size=shape) + MIN_ENTRY
    axes = tuple(range(len(shape) - ndim, len(shape)))
    return p / p.sum(axis=axes, keepdims=True)


def sample_scheme(cards: Sequence[int], x_card: int, seed: int,
                  deterministic: bool = False) -> PrivateScheme | CommonScheme:
    """Random strictly positive scheme; four cards give a private scheme, five a common one."""
    rng = np.random.default_rng(seed)
    if len(cards) == 4:
        u, v, w1, w2 = cards
        return PrivateScheme(_simplex(rng, (u,)), _simplex(rng, (v,)),
                             _simplex(rng, (u, v, w1, w2), 2), _simplex(rng, (u, v, w1, w2, x_card)))
    u, v, w1, w2, t = cards
    pt, pu, pv = _simplex(rng, (t,)), _simplex(rng, (u,)), _simplex(rng, (v,))
    pw = _simplex(rng, (t, u, v, w1, w2), 2)
    if deterministic:
        return CommonScheme.from_map(pt, pu, pv, pw, rng.integers(0, x_card, size=(t, u, v, w1, w2)), x_card)
    return CommonScheme(pt, pu, pv, pw, _simplex(rng, (t, u, v, w1, w2, x_card)))


# ---------------------------------------------------------------------------
# differentiable model


@dataclass
class _Factor:
    key: str
    subs: str
    shape: tuple[int, ...]
    n_simplex: int  # trailing axes forming the simplex
    value: np.ndarray | None = None  # fixed factors only

    @property
    def free(self) -> bool:
        return self.value is None

    @property
    def logit_shape(self) -> tuple[int, int]:
        k = int(np.prod(self.shape[len(self.shape) - self.n_simplex:]))
        return int(np.prod(self.shape)) // k, k


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class SchemeModel:
    """Differentiable map from logits to entropies of all subsets used by the constraints."""

    def __init__(self, channel: Channel, cards: Sequence[int], common: bool = False,
                 x_map: np.ndarray | None = None):
        self.channel = channel
        self.common = common
        X, Y1, Y2 = channel.law.shape
        if common:
            u, v, w1, w2, t = cards
            names = COMMON_VARS
            self.equalities = COMMON_EQUALITIES
            px = None if x_map is None else np.eye(X)[np.asarray(x_map, dtype=int)]
            self.factors = [
                _Factor("p_t", "t", (t,), 1), _Factor("p_u", "u", (u,), 1), _Factor("p_v", "v", (v,), 1),
                _Factor("p_w12_given_tuv", "tuvab", (t, u, v, w1, w2), 2),
                _Factor("p_x_given_tuvw", "tuvabx", (t, u, v, w1, w2, X), 1, px),
            ]
            self.shape = (t, u, v, w1, w2, X, Y1, Y2)
        else:
            u, v, w1, w2 = cards
            names = PRIVATE_VARS
            self.equalities = PRIVATE_EQUALITIES
            self.factors = [
                _Factor("p_u", "u", (u,), 1), _Factor("p_v", "v", (v,), 1),
                _Factor("p_w12_given_uv", "uvab", (u, v, w1, w2), 2),
                _Factor("p_x_given_uvw", "uvabx", (u, v, w1, w2, X), 1),
            ]
            self.shape = (u, v, w1, w2, X, Y1, Y2)
        self.factors.append(_Factor("channel", "xyz", channel.law.shape, 2, channel.law))
        self.names = names
        self.out = "".join(_LETTERS[n] for n in names)
        self.cards = tuple(cards)

        subsets: dict[frozenset, int] = {}
        rows = []
        for eq in self.equalities:
            rows.append(eq.terms())
        self._rate_terms = self._rate_term_rows()
        for row in rows + self._rate_terms:
            for s in row:
                subsets.setdefault(s, len(subsets))
        self.subsets = list(subsets)
        self._drop = [tuple(i for i, n in enumerate(names) if n not in s) for s in self.subsets]
        self.C = np.zeros((len(rows), len(self.subsets)))
        for i, row in enumerate(rows):
            for s, c in row.items():
                self.C[i, subsets[s]] = c
        self.R = np.zeros((len(self._rate_terms), len(self.subsets)))
        for i, row in enumerate(self._rate_terms):
            for s, c in row.items():
                self.R[i, subsets[s]] = c

        self._sizes = [int(np.prod(f.logit_shape)) for f in self.factors if f.free]
        self.n_params = sum(self._sizes)

    def _rate_term_rows(self) -> list[dict]:
        rows = [info_terms(["U"], ["Y1"], ["W1"]), info_terms(["V"], ["Y2"], ["W2"])]
        if self.common:
            rows = [info_terms(["T"], ["Y1"], ["W1"]), info_terms(["T"], ["Y2"], ["W2"])] + rows
        return rows

    def rate_weights(self, lam: Sequence[float]) -> np.ndarray:
        """Coefficients over the rate-term rows for a rate-weight vector."""
        lam = np.asarray(lam, float)
        if self.common:
            return np.array([lam[0] / 2, lam[0] / 2, lam[1], lam[2]])
        return lam

    # -- parameter plumbing

    def unpack(self, theta: np.ndarray) -> list[np.ndarray]:
        out, pos = [], 0
        for f in self.factors:
            if f.free:
                n = int(np.prod(f.logit_shape))
                out.append(_softmax(theta[pos:pos + n].reshape(f.logit_shape)).reshape(f.shape))
                pos += n
            else:
                out.append(f.value)
        return out

    def theta_from_scheme(self, scheme) -> np.ndarray:
        parts = []
        for f in self.factors:
            if f.free:
                p = np.asarray(getattr(scheme, f.key), float).reshape(f.logit_shape)
                parts.append(np.log(np.maximum(p, 1e-300)).ravel())
        return np.concatenate(parts) if parts else np.zeros(0)

    def scheme(self, theta: np.ndarray):
        vals = dict(zip((f.key for f in self.factors), self.unpack(theta)))
        vals.pop("channel")
        if self.common:
            det = not self.factors[4].free
            return CommonScheme(**vals, deterministic=det)
        return PrivateScheme(**vals)

    def x_map_of(self, scheme) -> np.ndarray | None:
        return scheme.x_map if self.common and scheme.deterministic else None

    # -- forward / backward

    def forward(self, theta: np.ndarray):
        fs = self.unpack(theta)
        spec = ",".join(f.subs for f in self.factors) + "->" + self.out
        J = np.einsum(spec, *fs, optimize=True)
        h = np.empty(len(self.subsets))
        logs = []
        for k, drop in enumerate(self._drop):
            m = J.sum(axis=drop, keepdims=True) if drop else J
            pos = m > 0
            lm = np.zeros_like(m)
            lm[pos] = np.log2(m[pos])
            h[k] = -(m[pos] * lm[pos]).sum()
            logs.append(lm)
        return fs, J, h, logs

    def _backprop(self, fs, logs, W: np.ndarray) -> np.ndarray:
        """Gradient w.r.t. theta of ``W @ h`` for a weight matrix W of shape (m, K)."""
        m = W.shape[0]
        G = np.zeros((m,) + self.shape)
        for k, lm in enumerate(logs):
            w = W[:, k]
            if np.any(w):
                G -= w.reshape((m,) + (1,) * len(self.shape)) * lm
        grads = []
        for i, f in enumerate(self.factors):
            if not f.free:
                continue
            others = [g for j, g in enumerate(fs) if j != i]
            subs = [g.subs for j, g in enumerate(self.factors) if j != i]
            spec = "k" + self.out + "," + ",".join(subs) + "->k" + f.subs
            gf = np.einsum(spec, G, *others, optimize=True).reshape((m,) + f.logit_shape)
            p = fs[i].reshape((1,) + f.logit_shape)
            gl = p * (gf - (p * gf).sum(axis=-1, keepdims=True))
            grads.append(gl.reshape(m, -1))
        return np.concatenate(grads, axis=1) if grads else np.zeros((m, 0))

    def residuals(self, theta: np.ndarray) -> np.ndarray:
        return self.C @ self.forward(theta)[2]

    def residual_jacobian(self, theta: np.ndarray) -> np.ndarray:
        fs, _, _, logs = self.forward(theta)
        return self._backprop(fs, logs, self.C)

    def rate_terms(self, theta: np.ndarray) -> np.ndarray:
        return self.R @ self.forward(theta)[2]

    def rate_objective(self, theta: np.ndarray, lam: Sequence[float]) -> tuple[float, np.ndarray]:
        fs, _, h, logs = self.forward(theta)
        w = self.rate_weights(lam) @ self.R
        return float(w @ h), self._backprop(fs, logs, w[None, :])[0]

    def residual_sq(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        fs, _, h, logs = self.forward(theta)
        r = self.C @ h
        return float(r @ r), self._backprop(fs, logs, (2 * r @ self.C)[None, :])[0]

    def penalty(self, theta: np.ndarray, lam: Sequence[float], mu: float) -> tuple[float, np.ndarray]:
        """-rate + mu * sum(residual^2) and its gradient."""
        fs, _, h, logs = self.forward(theta)
        r = self.C @ h
        w_rate = self.rate_weights(lam) @ self.R
        w = -w_rate + 2 * mu * (r @ self.C)
        return float(-w_rate @ h + mu * r @ r), self._backprop(fs, logs, w[None, :])[0]


def finite_difference(fn, theta: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central differences of a scalar or vector function."""
    cols = []
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = step
        cols.append((np.asarray(fn(theta + e)) - np.asarray(fn(theta - e))) / (2 * step))
    return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# local solvers


@dataclass
class RefineResult:
    scheme: PrivateScheme | CommonScheme
    residual_inf: float
    success: bool
    trace: list[float] = field(default_factory=list)


@dataclass
class MaximizeResult:
    scheme: PrivateScheme | CommonScheme
    rate: tuple[float, ...]
    objective: float
    residual_inf: float
    feasible: bool
    trace: list[float] = field(default_factory=list)


def _model_for(scheme, channel: Channel) -> SchemeModel:
    if isinstance(scheme, CommonScheme):
        return SchemeModel(channel, scheme.cards, common=True, x_map=scheme.x_map)
    return SchemeModel(channel, scheme.cards)


def _project(model: SchemeModel, theta: np.ndarray, max_iters: int) -> np.ndarray:
    if theta.size == 0 or not np.any(model.residuals(theta)):
        return theta
    sol = least_squares(model.residuals, theta, jac=model.residual_jacobian, method="trf",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_iters)
    return sol.x


def exact_residual_inf(scheme, channel: Channel) -> float:
    joint = build_joint(scheme, channel)
    res = residuals_common(joint) if isinstance(scheme, CommonScheme) else residuals_private(joint)
    return res.norm_inf


def refine_to_constraints(scheme, channel: Channel, cfg: SearchConfig) -> RefineResult:
    """Drive every equality residual toward zero from ``scheme``; return the best iterate."""
    model = _model_for(scheme, channel)
    theta = model.theta_from_scheme(scheme)
    trace = [float(np.max(np.abs(model.residuals(theta)), initial=0.0))]
    theta = _project(model, theta, cfg.max_iters)
    if not np.all(np.isfinite(theta)):
        raise FloatingPointError("non-finite parameters during feasibility solve")
    out = model.scheme(theta)
    r = exact_residual_inf(out, channel)
    trace.append(r)
    return RefineResult(out, r, r <= cfg.constraint_tol, trace)


def _rate_of(scheme, channel: Channel) -> tuple[float, ...]:
    joint = build_joint(scheme, channel)
    return rate_point_common(joint) if isinstance(scheme, CommonScheme) else rate_point_private(joint)


def weighted_rate(rate: Sequence[float], lam: Sequence[float]) -> float:
    return float(np.dot(rate, lam))


def maximize_weighted_rate(scheme0, channel: Channel, lam: Sequence[float],
                           cfg: SearchConfig) -> MaximizeResult:
    """Penalty ascent on the weighted rate, keeping only feasible non-decreasing stages."""
    model = _model_for(scheme0, channel)
    theta = model.theta_from_scheme(scheme0)
    best_scheme = scheme0
    best_res = exact_residual_inf(scheme0, channel)
    best_rate = _rate_of(scheme0, channel)
    best_obj = weighted_rate(best_rate, lam)
    feasible = best_res <= cfg.constraint_tol
    trace = [best_obj]
    if theta.size == 0 or not np.any(lam):
        return MaximizeResult(best_scheme, best_rate, best_obj, best_res, feasible, trace)
    for mu in cfg.penalty_weights:
        try:
            sol = minimize(model.penalty, theta, args=(lam, mu), jac=True, method="L-BFGS-B",
                           options={"maxiter": cfg.max_iters, "ftol": 1e-15, "gtol": 1e-10})
            cand = _project(model, sol.x, cfg.max_iters)
        except FloatingPointError:
            break
        if not np.all(np.isfinite(cand)):
            break
        theta = cand
        sch = model.scheme(cand)
        res = exact_residual_inf(sch, channel)
        if res > cfg.constraint_tol:
            continue
        rate = _rate_of(sch, channel)
        obj = weighted_rate(rate, lam)
        if not feasible or obj >= best_obj:
            best_scheme, best_res, best_rate, best_obj, feasible = sch, res, rate, obj, True
            trace.append(obj)
    return MaximizeResult(best_scheme, best_rate, best_obj, best_res, feasible, trace)


HOP_LOGIT_CLIP = 8.0


def hop_maximize(result: MaximizeResult, channel: Channel, lam: Sequence[float], cfg: SearchConfig,
                 rng: np.random.Generator) -> MaximizeResult:
    """Escape local maxima: clip saturated logits, add noise, re-project and re-ascend.

    Only strictly better feasible results replace the incumbent.
    """
    best = result
    for _ in range(cfg.hops):
        model = _model_for(best.scheme, channel)
        theta = model.theta_from_scheme(best.scheme)
        if theta.size == 0:
            break
        theta = np.clip(theta, -HOP_LOGIT_CLIP, HOP_LOGIT_CLIP) + rng.normal(scale=cfg.hop_scale, size=theta.shape)
        try:
            theta = _project(model, theta, cfg.max_iters)
            if not np.all(np.isfinite(theta)):
                continue
            start = model.scheme(theta)
            if exact_residual_inf(start, channel) > cfg.constraint_tol:
                continue
            out = maximize_weighted_rate(start, channel, lam, cfg)
        except FloatingPointError:
            continue
        if out.feasible and out.objective > best.objective + 1e-12:
            best = MaximizeResult(out.scheme, out.rate, out.objective, out.residual_inf, True,
                                  best.trace + [out.objective])
    return best


# ---------------------------------------------------------------------------
# region scan


@dataclass(frozen=True)
class SamplePoint:
    lam: tuple[float, ...]
    rate: tuple[float, ...]
    residual_inf: float
    seed: int
    scheme: PrivateScheme | CommonScheme = field(compare=False, repr=False)

    @property
    def objective(self) -> float:
        return weighted_rate(self.rate, self.lam)


@dataclass
class RegionSample:
    points: list[SamplePoint] = field(default_factory=list)
    attempts: int = 0
    failures: int = 0

    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    def best_per_lambda(self) -> dict[tuple[float, ...], SamplePoint]:
        """Highest objective per weight vector; ties go to the smaller rate tuple, then seed."""
        best: dict[tuple[float, ...], SamplePoint] = {}
        for p in self.points:
            cur = best.get(p.lam)
            if cur is None:
                best[p.lam] = p
                continue
            if p.objective > cur.objective + 1e-12:
                best[p.lam] = p
            elif abs(p.objective - cur.objective) <= 1e-12 and (p.rate, p.seed) < (cur.rate, cur.seed):
                best[p.lam] = p
        return best


def restart_seed(seed: int, lam_index: int, restart: int) -> int:
    return int(np.random.SeedSequence([seed, lam_index, restart]).generate_state(1, np.uint32)[0])


def _run_restart(channel: Channel, cfg: SearchConfig, lam: tuple[float, ...], lam_index: int,
                 restart: int) -> tuple[int, int, SamplePoint | None]:
    seed = restart_seed(cfg.seed, lam_index, restart)
    cards = cfg.resolved_cards(channel)
    scheme = sample_scheme(cards, channel.x_card, seed, deterministic=cfg.common and cfg.deterministic_x)
    try:
        ref = refine_to_constraints(scheme, channel, cfg)
        if not ref.success:
            return lam_index, restart, None
        out = maximize_weighted_rate(ref.scheme, channel, lam, cfg)
        if out.feasible and cfg.hops and np.any(lam):
            out = hop_maximize(out, channel, lam, cfg, np.random.default_rng([seed, 1]))
    except FloatingPointError as exc:
        log.debug("restart %d/%d failed: %s", lam_index, restart, exc)
        return lam_index, restart, None
    if not out.feasible:
        return lam_index, restart, None
    return lam_index, restart, SamplePoint(tuple(lam), tuple(out.rate), out.residual_inf, seed, out.scheme)


def _run_restart_star(args):
    return _run_restart(*args)


def scan_region(channel: Channel, cfg: SearchConfig,
                sweep: Sequence[Sequence[float]] | None = None) -> RegionSample:
    """Multistart search for every rate-weight vector; deterministic given ``cfg.seed``."""
    sweep = [tuple(float(x) for x in lam) for lam in (cfg.sweep if sweep is None else sweep)]
    if not sweep:
        raise ValueError("empty rate weight sweep")
    if sweep != list(cfg.sweep):
        cfg = replace(cfg, sweep=tuple(sweep))
    tasks = [(channel, cfg, lam, li, r) for li, lam in enumerate(sweep) for r in range(cfg.restarts)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_run_restart_star, tasks))
    else:
        results = [_run_restart_star(t) for t in tasks]
    results.sort(key=lambda t: (t[0], t[1]))
    sample = RegionSample(attempts=len(results))
    for _, _, pt in results:
        if pt is None:
            sample.failures += 1
        else:
            sample.points.append(pt)
    return sample
