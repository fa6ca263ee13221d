"""JSON file formats for channels, schemes, codes and search configs; CSV writers.

Every reader raises :class:`FormatError` with the offending field named.
Reals are written with 17 significant digits so that files round-trip.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .multiletter import BlockCode, identity_code, random_code, repetition_code
from .probcore import Channel
from .schemes import CommonScheme, PrivateScheme
from .search import RegionSample, SearchConfig


class FormatError(ValueError):
    pass


def fmt_real(x: float) -> str:
    return format(float(x), ".17g")


def _load(path: str | Path) -> Any:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {p}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{p.name}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _field(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"{where}: missing field {key!r}")
    return obj[key]


def _array(obj: dict, key: str, where: str, shape: tuple[int, ...] | None = None) -> np.ndarray:
    raw = _field(obj, key, where)
    try:
        a = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise FormatError(f"{where}: field {key!r} is not a rectangular numeric array") from None
    if shape is not None and a.shape != shape:
        raise FormatError(f"{where}: field {key!r} has shape {a.shape}, expected {shape}")
    return a


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _tolist(a: np.ndarray) -> Any:
    return np.asarray(a).tolist()


# channel

def read_channel(path: str | Path, tol: float = 1e-9) -> Channel:
    d = _load(path)
    where = "channel"
    x, y1, y2 = (int(_field(d, k, where)) for k in ("x", "y1", "y2"))
    law = _array(d, "law", where, (x, y1, y2))
    if law.min() < 0:
        bad = int(np.argwhere(law < 0)[0][0])
        raise FormatError(f"{where}: law[{bad}] has a negative entry")
    for i, s in enumerate(law.sum(axis=(1, 2))):
        if abs(s - 1.0) > tol:
            raise FormatError(f"{where}: law[{i}] (x={i}) sums to {fmt_real(s)}, not 1")
    return Channel(law, tol=tol)


def channel_to_json(ch: Channel) -> str:
    return _dump({"x": ch.x_card, "y1": ch.y1_card, "y2": ch.y2_card, "law": _tolist(ch.law)})


# schemes

def read_scheme(path: str | Path) -> PrivateScheme | CommonScheme:
    d = _load(path)
    kind = _field(d, "kind", "scheme")
    try:
        if kind == "private":
            return PrivateScheme(*(_array(d, k, "scheme") for k in
                                   ("p_u", "p_v", "p_w12_given_uv", "p_x_given_uvw")))
        if kind == "common":
            base = [_array(d, k, "scheme") for k in ("p_t", "p_u", "p_v", "p_w12_given_tuv")]
            if "x_map" in d:
                return CommonScheme.from_map(*base, np.array(d["x_map"], dtype=int), int(_field(d, "x", "scheme")))
            return CommonScheme(*base, _array(d, "p_x_given_tuvw", "scheme"),
                                deterministic=bool(d.get("deterministic", False)))
    except ValueError as exc:
        raise FormatError(f"scheme: {exc}") from None
    raise FormatError(f"scheme: unknown kind {kind!r} (expected 'private' or 'common')")


def scheme_to_dict(s: PrivateScheme | CommonScheme) -> dict:
    if isinstance(s, PrivateScheme):
        return {"kind": "private", "p_u": _tolist(s.p_u), "p_v": _tolist(s.p_v),
                "p_w12_given_uv": _tolist(s.p_w12_given_uv), "p_x_given_uvw": _tolist(s.p_x_given_uvw)}
    d = {"kind": "common", "p_t": _tolist(s.p_t), "p_u": _tolist(s.p_u), "p_v": _tolist(s.p_v),
         "p_w12_given_tuv": _tolist(s.p_w12_given_tuv)}
    if s.deterministic:
        d.update(x=s.x_card, x_map=_tolist(s.x_map))
    else:
        d["p_x_given_tuvw"] = _tolist(s.p_x_given_tuvw)
    return d


def scheme_to_json(s: PrivateScheme | CommonScheme) -> str:
    return _dump(scheme_to_dict(s))


# codes

def read_code(path: str | Path, x_card: int, n: int | None = None) -> BlockCode:
    """Either an explicit ``encoder`` table or a generator: identity / random / repetition."""
    d = _load(path)
    where = "code"
    kind = d.get("kind", "table") if isinstance(d, dict) else None
    if kind == "table":
        enc = np.array(_field(d, "encoder", where))
        if enc.dtype.kind not in "iu":
            raise FormatError(f"{where}: encoder entries must be integers")
        m0 = d.get("m0")
        code_n = enc.shape[-1]
        if n is not None and n != code_n:
            raise FormatError(f"{where}: encoder has blocklength {code_n} but n={n} was requested")
        try:
            return BlockCode(code_n, int(_field(d, "m1", where)), int(_field(d, "m2", where)), enc,
                             int(m0) if m0 else None)
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
    n = int(d.get("n", n or 0)) if n is None else n
    if n < 1:
        raise FormatError(f"{where}: blocklength n is required for generated codes")
    if kind == "identity":
        return identity_code(n, int(d.get("a", 2)), int(d.get("b", 2)))
    if kind == "repetition":
        return repetition_code(n)
    if kind == "random":
        m0 = d.get("m0")
        return random_code(n, int(d.get("m1", 2)), int(d.get("m2", 2)), x_card, int(d.get("seed", 0)),
                           int(m0) if m0 else None)
    raise FormatError(f"{where}: unknown kind {kind!r}")


def code_to_json(code: BlockCode) -> str:
    d = {"kind": "table", "m1": code.m1_card, "m2": code.m2_card, "encoder": _tolist(code.encoder)}
    if code.m0_card:
        d["m0"] = code.m0_card
    return _dump(d)


# search config

_TUPLE_FIELDS = {"cards", "penalty_weights"}


def config_from_dict(d: dict) -> SearchConfig:
    known = {f.name for f in fields(SearchConfig)}
    unknown = set(d) - known
    if unknown:
        raise FormatError(f"config: unknown fields {sorted(unknown)}")
    kw = dict(d)
    for k in _TUPLE_FIELDS & set(kw):
        if kw[k] is not None:
            kw[k] = tuple(kw[k])
    if "sweep" in kw:
        kw["sweep"] = tuple(tuple(float(x) for x in lam) for lam in kw["sweep"])
    try:
        return SearchConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"config: {exc}") from None


def read_config_dict(path: str | Path) -> dict:
    d = _load(path)
    if not isinstance(d, dict):
        raise FormatError("config: expected a JSON object")
    return d


def read_config(path: str | Path) -> SearchConfig:
    return config_from_dict(read_config_dict(path))


def config_to_dict(cfg: SearchConfig) -> dict:
    d = asdict(cfg)
    d["sweep"] = [list(x) for x in cfg.sweep]
    d["penalty_weights"] = list(cfg.penalty_weights)
    d["cards"] = list(cfg.cards) if cfg.cards is not None else None
    return d


# CSV output

def sample_header(common: bool) -> list[str]:
    if common:
        return ["lambda0", "lambda1", "lambda2", "R0", "R1", "R2", "residual_inf", "seed"]
    return ["lambda1", "lambda2", "R1", "R2", "residual_inf", "seed"]


def sample_to_csv(sample: RegionSample, common: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(sample_header(common))
    for p in sample.points:
        w.writerow([fmt_real(x) for x in p.lam] + [fmt_real(x) for x in p.rate]
                   + [fmt_real(p.residual_inf), p.seed])
    return buf.getvalue()


def read_sample_csv(text: str) -> list[dict[str, float]]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [{k: (int(v) if k == "seed" else float(v)) for k, v in r.items()} for r in rows]


def rows_to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_real(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()
