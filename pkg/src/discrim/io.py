"""File formats: ensemble JSON, strategy dumps, curve CSV and epsilon-grid strings.

Complex numbers are ``[re, im]`` pairs; a bare number is read as real.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import Ensemble, InvalidInputError, PovmStrategy, PvmStrategy, Strategy, TradeoffCurve

CSV_HEADER = ("epsilon", "p_in", "p_c", "p_e", "certified")


def fmt(x: float) -> str:
    """Nine significant digits, the CSV precision."""
    return f"{float(x):.9g}"


def _decode_complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise InvalidInputError(f"{where}: expected a number or [re, im] pair, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise InvalidInputError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _encode_complex(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def decode_vector(values, where: str) -> np.ndarray:
    if not isinstance(values, list):
        raise InvalidInputError(f"{where}: expected a list of amplitudes")
    return np.array([_decode_complex(v, f"{where}[{k}]") for k, v in enumerate(values)])


def decode_matrix(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list):
        raise InvalidInputError(f"{where}: expected a list of rows")
    return np.array([decode_vector(r, f"{where}[{k}]") for k, r in enumerate(rows)])


def encode_vector(v) -> list:
    return [_encode_complex(z) for z in np.asarray(v).ravel()]


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.asarray(m)]


# ensembles

def ensemble_from_dict(doc: dict, source: str = "ensemble") -> Ensemble:
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{source}: top level must be an object")
    unknown = set(doc) - {"dimension", "states", "priors", "label"}
    if unknown:
        raise InvalidInputError(f"{source}: unknown field(s) {sorted(unknown)}")
    if "states" not in doc:
        raise InvalidInputError(f"{source}: missing field 'states'")
    states = doc["states"]
    if not isinstance(states, list) or not states:
        raise InvalidInputError(f"{source}: field 'states' must be a non-empty list")
    vectors = [decode_vector(s, f"{source}: states[{k}]") for k, s in enumerate(states)]
    dim = doc.get("dimension")
    if dim is not None:
        if not isinstance(dim, int) or isinstance(dim, bool):
            raise InvalidInputError(f"{source}: field 'dimension' must be an integer")
        for k, v in enumerate(vectors):
            if v.size != dim:
                raise InvalidInputError(f"{source}: states[{k}] has {v.size} amplitudes, 'dimension' is {dim}")
    priors = doc.get("priors")
    if priors is not None:
        if not isinstance(priors, list) or not all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in priors
        ):
            raise InvalidInputError(f"{source}: field 'priors' must be a list of numbers")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise InvalidInputError(f"{source}: field 'label' must be text")
    try:
        return Ensemble.from_vectors(vectors, priors, label)
    except InvalidInputError as exc:
        raise InvalidInputError(f"{source}: {exc}") from None


def ensemble_to_dict(e: Ensemble) -> dict:
    return {
        "dimension": e.dimension,
        "states": [encode_vector(s.amplitudes) for s in e.states],
        "priors": [float(p) for p in e.priors],
        "label": e.label,
    }


def _read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInputError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_ensemble(path) -> Ensemble:
    return ensemble_from_dict(_read_json(path), str(path))


def save_ensemble(e: Ensemble, path) -> None:
    """Write with one state per line so files stay readable."""
    doc = ensemble_to_dict(e)
    states = ",\n".join("    " + json.dumps(v) for v in doc["states"])
    text = (
        "{\n"
        f'  "dimension": {doc["dimension"]},\n'
        f'  "states": [\n{states}\n  ],\n'
        f'  "priors": {json.dumps(doc["priors"])},\n'
        f'  "label": {json.dumps(doc["label"])}\n'
        "}\n"
    )
    Path(path).write_text(text)


# strategies

def strategy_to_dict(s: Strategy, epsilon=None) -> dict:
    if isinstance(s, PvmStrategy):
        doc = {"type": "pvm", "basis": encode_matrix(s.basis), "weights": [float(w) for w in s.weights]}
    elif isinstance(s, PovmStrategy):
        doc = {
            "type": "povm",
            "elements": [encode_matrix(op) for op in s.elements],
            "inconclusive_element": encode_matrix(s.inconclusive_element),
        }
    else:
        raise InvalidInputError(f"cannot serialize {type(s).__name__}")
    if epsilon is not None:
        doc["epsilon"] = float(epsilon)
    return doc


def strategy_from_dict(doc: dict, where: str = "strategy") -> Strategy:
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{where}: expected an object")
    kind = doc.get("type")
    try:
        if kind == "pvm":
            for key in ("basis", "weights"):
                if key not in doc:
                    raise InvalidInputError(f"missing field '{key}'")
            return PvmStrategy(decode_matrix(doc["basis"], "basis"), doc["weights"])
        if kind == "povm":
            for key in ("elements", "inconclusive_element"):
                if key not in doc:
                    raise InvalidInputError(f"missing field '{key}'")
            elements = [decode_matrix(m, f"elements[{k}]") for k, m in enumerate(doc["elements"])]
            return PovmStrategy(elements, decode_matrix(doc["inconclusive_element"], "inconclusive_element"))
    except InvalidInputError as exc:
        raise InvalidInputError(f"{where}: {exc}") from None
    raise InvalidInputError(f"{where}: field 'type' must be 'pvm' or 'povm', got {kind!r}")


def dump_strategies(ensemble: Ensemble, strategies, path, epsilons=None) -> None:
    """Self-contained dump: the ensemble plus one entry per strategy."""
    epsilons = list(epsilons) if epsilons is not None else [None] * len(strategies)
    entries = ",\n".join("    " + json.dumps(strategy_to_dict(s, eps)) for s, eps in zip(strategies, epsilons))
    text = (
        "{\n"
        f'  "ensemble": {json.dumps(ensemble_to_dict(ensemble))},\n'
        f'  "strategies": [\n{entries}\n  ]\n'
        "}\n"
    )
    Path(path).write_text(text)


def load_strategies(path):
    """``(ensemble, [(epsilon or None, strategy), ...])``."""
    doc = _read_json(path)
    if not isinstance(doc, dict) or "ensemble" not in doc or "strategies" not in doc:
        raise InvalidInputError(f"{path}: needs fields 'ensemble' and 'strategies'")
    ensemble = ensemble_from_dict(doc["ensemble"], f"{path}: ensemble")
    if not isinstance(doc["strategies"], list) or not doc["strategies"]:
        raise InvalidInputError(f"{path}: field 'strategies' must be a non-empty list")
    out = []
    for k, entry in enumerate(doc["strategies"]):
        s = strategy_from_dict(entry, f"{path}: strategies[{k}]")
        if s.n != ensemble.n:
            raise InvalidInputError(f"{path}: strategies[{k}] has {s.n} outcomes for {ensemble.n} states")
        out.append((entry.get("epsilon"), s))
    return ensemble, out


def strategies_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".strategies.json")


# curves

def curve_rows(curve: TradeoffCurve) -> list:
    return [
        [fmt(p.epsilon), fmt(p.rates.inconclusive), fmt(p.rates.correct), fmt(p.rates.error), str(int(p.certified))]
        for p in curve
    ]


def write_curve_csv(curve: TradeoffCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(curve_rows(curve))


def read_curve_csv(path) -> list:
    """Rows as dicts of floats (``certified`` as bool)."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InvalidInputError(f"{path}: cannot read ({exc.strerror})") from None
    with fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("epsilon", "p_in") if c not in (reader.fieldnames or [])]
        if missing:
            raise InvalidInputError(f"{path}: missing column(s) {missing}")
        rows = []
        for line, row in enumerate(reader, start=2):
            try:
                rec = {k: float(row[k]) for k in ("epsilon", "p_in", "p_c", "p_e") if row.get(k) not in (None, "")}
            except ValueError:
                raise InvalidInputError(f"{path}: line {line}: non-numeric value") from None
            rec["certified"] = row.get("certified", "1") == "1"
            rows.append(rec)
    return rows


# epsilon grids

DEFAULT_GRID = "log:1e-6:P_ME:40"


def _grid_number(token: str, p_me) -> float:
    token = token.strip()
    if token.upper() == "P_ME":
        if p_me is None:
            raise InvalidInputError("grid refers to P_ME but no value was supplied")
        return float(p_me)
    try:
        return float(token)
    except ValueError:
        raise InvalidInputError(f"eps-grid: cannot read number {token!r}") from None


def parse_eps_grid(grid_spec: str, p_me=None) -> list:
    """``lin:a:b:n``, ``log:a:b:n`` or a comma list; ``P_ME`` is accepted as a bound."""
    grid_spec = grid_spec.strip()
    if grid_spec.startswith(("lin:", "log:")):
        parts = grid_spec.split(":")
        if len(parts) != 4:
            raise InvalidInputError(f"eps-grid: expected {parts[0]}:<start>:<stop>:<count>")
        start, stop = _grid_number(parts[1], p_me), _grid_number(parts[2], p_me)
        try:
            count = int(parts[3])
        except ValueError:
            raise InvalidInputError(f"eps-grid: count {parts[3]!r} is not an integer") from None
        if count < 1:
            raise InvalidInputError("eps-grid: count must be at least 1")
        if parts[0] == "log":
            if start <= 0 or stop <= 0:
                raise InvalidInputError("eps-grid: log spacing needs positive bounds")
            grid = np.geomspace(start, stop, count)
        else:
            grid = np.linspace(start, stop, count)
        values = [float(x) for x in grid]
    else:
        values = [_grid_number(t, p_me) for t in grid_spec.split(",") if t.strip()]
    if not values:
        raise InvalidInputError("eps-grid: empty grid")
    if any(v < 0 for v in values):
        raise InvalidInputError("eps-grid: budgets must be non-negative")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidInputError("eps-grid: budgets must be strictly increasing")
    return values
