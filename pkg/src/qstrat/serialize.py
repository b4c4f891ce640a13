"""JSON schemas for every object the CLI reads or writes.

Matrices are encoded as {"rows": r, "cols": c, "entries": [[re, im], ...]}
row-major; space lists as [{"label": ..., "dim": ...}, ...].  Emission is
canonical: keys sorted, floats printed at 12 significant digits, so equal
inputs give byte-identical payloads.
"""

from __future__ import annotations

import json
import math
from typing import Any, Mapping

import numpy as np

from .errors import ParseError
from .games import Referee
from .strategy import (
    KIND_COSTRATEGY,
    KIND_STRATEGY,
    CoStrategyDescription,
    MeasuringRep,
    SpaceProfile,
    StrategyDescription,
    StrategyRep,
)
from .tensor import HermOp, Space, SpaceList

# ---------------------------------------------------------------------------
# canonical emission


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("cannot serialize NaN or infinity")
    if x == 0.0:
        x = 0.0  # normalize -0
    return f"{x:.12g}"


def dumps_canonical(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, floats at 12 significant digits."""
    parts: list[str] = []
    _emit(obj, parts)
    return "".join(parts)


def _emit(obj: Any, parts: list[str]):
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(",")
            _emit(item, parts)
        parts.append("]")
    elif isinstance(obj, Mapping):
        parts.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise ValueError(f"JSON object keys must be strings, got {key!r}")
            if i:
                parts.append(",")
            parts.append(json.dumps(key))
            parts.append(":")
            _emit(obj[key], parts)
        parts.append("}")
    else:
        raise ValueError(f"cannot serialize {type(obj).__name__}")


def _need(doc: Mapping, key: str, where: str):
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    return doc[key]


# ---------------------------------------------------------------------------
# matrices and spaces


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(v.real), float(v.imag)] for v in m.ravel()],
    }


def matrix_from_json(doc: Mapping, where: str = "matrix") -> np.ndarray:
    rows = int(_need(doc, "rows", where))
    cols = int(_need(doc, "cols", where))
    entries = _need(doc, "entries", where)
    if rows < 1 or cols < 1:
        raise ParseError(f"{where}: rows and cols must be positive")
    if len(entries) != rows * cols:
        raise ParseError(f"{where}: expected {rows * cols} entries, got {len(entries)}")
    try:
        flat = np.array([complex(re, im) for re, im in entries])
    except (TypeError, ValueError):
        raise ParseError(f"{where}: entries must be [re, im] pairs") from None
    return flat.reshape(rows, cols)


def spaces_to_json(spaces: SpaceList) -> list:
    return [{"label": s.label, "dim": s.dim} for s in spaces]


def spaces_from_json(doc, where: str = "spaces") -> SpaceList:
    if not isinstance(doc, list):
        raise ParseError(f"{where}: expected a list of spaces")
    factors = []
    for item in doc:
        label = str(_need(item, "label", where))
        dim = int(_need(item, "dim", where))
        factors.append(Space(label, dim))
    return SpaceList(tuple(factors))


def profile_to_json(profile: SpaceProfile) -> dict:
    return {
        "turns": profile.turns,
        "inputs": spaces_to_json(profile.inputs),
        "outputs": spaces_to_json(profile.outputs),
    }


def profile_from_json(doc: Mapping, where: str = "profile") -> SpaceProfile:
    inputs = spaces_from_json(_need(doc, "inputs", where), f"{where}.inputs")
    outputs = spaces_from_json(_need(doc, "outputs", where), f"{where}.outputs")
    return SpaceProfile(inputs, outputs)


# ---------------------------------------------------------------------------
# descriptions


def strategy_description_to_json(desc: StrategyDescription) -> dict:
    return {
        "profile": profile_to_json(desc.profile),
        "memory_dims": list(desc.memory_dims),
        "isometries": [matrix_to_json(a) for a in desc.isometries],
        "measurement": None if desc.measurement is None else {
            k: matrix_to_json(v) for k, v in desc.measurement.items()
        },
    }


def strategy_description_from_json(doc: Mapping) -> StrategyDescription:
    where = "strategy description"
    profile = profile_from_json(_need(doc, "profile", where))
    memory = [int(d) for d in _need(doc, "memory_dims", where)]
    isos = [matrix_from_json(m, f"{where}.isometries") for m in _need(doc, "isometries", where)]
    meas_doc = doc.get("measurement")
    meas = None if meas_doc is None else {
        str(k): matrix_from_json(v, f"{where}.measurement") for k, v in meas_doc.items()
    }
    return StrategyDescription(profile, tuple(memory), tuple(isos), meas)


def costrategy_description_to_json(desc: CoStrategyDescription) -> dict:
    return {
        "profile": profile_to_json(desc.profile),
        "memory_dims": list(desc.memory_dims),
        "initial_state": matrix_to_json(desc.initial_state),
        "isometries": [matrix_to_json(a) for a in desc.isometries],
        "measurement": None if desc.measurement is None else {
            k: matrix_to_json(v) for k, v in desc.measurement.items()
        },
    }


def costrategy_description_from_json(doc: Mapping) -> CoStrategyDescription:
    where = "co-strategy description"
    profile = profile_from_json(_need(doc, "profile", where))
    memory = [int(d) for d in _need(doc, "memory_dims", where)]
    state = matrix_from_json(_need(doc, "initial_state", where), f"{where}.initial_state")
    isos = [matrix_from_json(m, f"{where}.isometries") for m in _need(doc, "isometries", where)]
    meas_doc = doc.get("measurement")
    meas = None if meas_doc is None else {
        str(k): matrix_from_json(v, f"{where}.measurement") for k, v in meas_doc.items()
    }
    return CoStrategyDescription(profile, tuple(memory), state, tuple(isos), meas)


# ---------------------------------------------------------------------------
# representations


def rep_to_json(rep: StrategyRep | MeasuringRep) -> dict:
    doc = {"kind": rep.kind, "profile": profile_to_json(rep.profile)}
    if isinstance(rep, MeasuringRep):
        doc["outcomes"] = {k: matrix_to_json(rep.outcomes[k].matrix) for k in rep.labels}
    else:
        doc["matrix"] = matrix_to_json(rep.op.matrix)
    return doc


def rep_from_json(doc: Mapping) -> StrategyRep | MeasuringRep:
    where = "representation"
    kind = str(_need(doc, "kind", where))
    if kind not in (KIND_STRATEGY, KIND_COSTRATEGY):
        raise ParseError(f"{where}: kind must be strategy or costrategy, got {kind!r}")
    profile = profile_from_json(_need(doc, "profile", where))
    space = profile.rep_space()
    if "outcomes" in doc:
        outcomes = {}
        for label, m in doc["outcomes"].items():
            outcomes[str(label)] = _as_hermop(m, space, f"{where}.outcomes[{label}]")
        return MeasuringRep(profile, kind, outcomes)
    if "matrix" in doc:
        return StrategyRep(profile, kind, _as_hermop(doc["matrix"], space, where))
    raise ParseError(f"{where}: need either 'matrix' or 'outcomes'")


def _as_hermop(doc: Mapping, space: SpaceList, where: str) -> HermOp:
    m = matrix_from_json(doc, where)
    if m.shape != (space.dim, space.dim):
        raise ParseError(f"{where}: shape {m.shape} does not match space dim {space.dim}")
    try:
        return HermOp(space, m)
    except Exception as exc:
        raise ParseError(f"{where}: {exc}") from None


# ---------------------------------------------------------------------------
# referees


def referee_to_json(ref: Referee) -> dict:
    return {
        "turns": ref.turns,
        "alice_inputs": spaces_to_json(ref.alice_inputs),
        "alice_outputs": spaces_to_json(ref.alice_outputs),
        "bob_inputs": spaces_to_json(ref.bob_inputs),
        "bob_outputs": spaces_to_json(ref.bob_outputs),
        "outcomes": {k: matrix_to_json(ref.outcomes[k].matrix) for k in sorted(ref.outcomes)},
        "payoff": {k: float(v) for k, v in ref.payoff.items()},
    }


def referee_from_json(doc: Mapping) -> Referee:
    where = "referee"
    ai = spaces_from_json(_need(doc, "alice_inputs", where), f"{where}.alice_inputs")
    ao = spaces_from_json(_need(doc, "alice_outputs", where), f"{where}.alice_outputs")
    bi = spaces_from_json(_need(doc, "bob_inputs", where), f"{where}.bob_inputs")
    bo = spaces_from_json(_need(doc, "bob_outputs", where), f"{where}.bob_outputs")
    outs = []
    for c, d in zip(ao, bo):
        outs += [c, d]
    ins = []
    for a, b in zip(ai, bi):
        ins += [a, b]
    space = SpaceList(tuple(outs + ins))
    outcomes = {
        str(k): _as_hermop(v, space, f"{where}.outcomes[{k}]")
        for k, v in _need(doc, "outcomes", where).items()
    }
    payoff = {str(k): float(v) for k, v in _need(doc, "payoff", where).items()}
    return Referee(ai, ao, bi, bo, outcomes, payoff)


def load_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
