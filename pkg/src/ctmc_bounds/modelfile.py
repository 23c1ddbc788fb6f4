"""Declarative JSON model files.

A model file carries one chain and the analysis settings:

    {
      "schema": 1,
      "chain": {
        "kind": "birth_death",
        "states": 3,
        "define": {"lam": {"sinusoid": {"offset": 1.0, "amplitude": 1.0,
                                        "frequency": 1.0}}},
        "birth": ["lam", "lam", "lam"],
        "death": [1.0, 1.0, 1.0]
      },
      "analysis": {"horizon": 3.0, "grid": 1001, "steps": 10000,
                   "weights": "ones", "trials": 100, "pairs": 50,
                   "seed": 0, "tolerance": 1e-8}
    }

Rate positions accept a plain number (constant rate), the name of an entry
in the optional ``define`` block, or an inline object with exactly one of
the keys ``constant``, ``sinusoid`` or ``table``. The rate lists required
per kind: ``birth``+``death`` (birth_death), ``batch_birth``+``death``
(batch_birth), ``batch_death``+``birth`` (batch_death),
``batch_birth``+``batch_death`` (batch_both), or ``transitions`` - a list
of {"from": i, "to": j, "rate": ...} objects - for the general kind.

``weights`` is one of "ones", "perron", "frozen-perron" or an explicit
list of S positive numbers. All other analysis fields are optional and
default to the values shown above (horizon 1.0 if absent).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .chain import (KINDS, ChainSpec, batch_birth_chain, batch_both_chain,
                    batch_death_chain, birth_death_chain, general_chain)
from .rates import RateFunction

SCHEMA_VERSION = 1
WEIGHT_MODES = ("ones", "perron", "frozen-perron", "list")

_KIND_LISTS = {
    "birth_death": ("birth", "death"),
    "batch_birth": ("batch_birth", "death"),
    "batch_death": ("batch_death", "birth"),
    "batch_both": ("batch_birth", "batch_death"),
}

_CONSTRUCTORS = {
    "birth_death": birth_death_chain,
    "batch_birth": batch_birth_chain,
    "batch_death": batch_death_chain,
    "batch_both": batch_both_chain,
}


class ModelFileError(ValueError):
    """The model file cannot be parsed into a valid chain and settings."""


@dataclass(frozen=True)
class AnalysisSettings:
    """Horizon, resolutions, weighting mode and randomness of an analysis."""

    horizon: float = 1.0
    grid: int = 1001
    steps: int = 10_000
    weights_mode: str = "ones"
    weights: tuple | None = None
    trials: int = 100
    pairs: int = 50
    seed: int = 0
    tolerance: float = 1e-8


@dataclass(frozen=True)
class ModelFile:
    """A parsed model: the chain plus analysis settings."""

    chain: ChainSpec
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)


def _parse_rate(node, defs, where):
    if isinstance(node, str):
        if node not in defs:
            raise ModelFileError(f"{where}: rate name {node!r} is not defined")
        return defs[node]
    if isinstance(node, bool):
        raise ModelFileError(f"{where}: expected a rate, got a boolean")
    if isinstance(node, (int, float)):
        try:
            return RateFunction.constant(node)
        except ValueError as exc:
            raise ModelFileError(f"{where}: {exc}") from None
    if isinstance(node, dict) and len(node) == 1:
        (variant, params), = node.items()
        try:
            if variant == "constant":
                return RateFunction.constant(params)
            if variant == "sinusoid":
                extra = set(params) - {"offset", "amplitude", "frequency", "phase"}
                if extra:
                    raise ModelFileError(f"{where}: unknown sinusoid fields {sorted(extra)}")
                return RateFunction.sinusoid(
                    params["offset"], params["amplitude"], params["frequency"],
                    params.get("phase", 0.0))
            if variant == "table":
                return RateFunction.table(params["times"], params["values"])
        except ModelFileError:
            raise
        except (ValueError, KeyError, TypeError) as exc:
            raise ModelFileError(f"{where}: invalid {variant} rate: {exc}") from None
    raise ModelFileError(f"{where}: expected a number, a defined name or an "
                         f"object with one of 'constant'/'sinusoid'/'table'")


def _parse_chain(node) -> ChainSpec:
    if not isinstance(node, dict):
        raise ModelFileError("'chain' must be an object")
    kind = node.get("kind")
    if kind not in KINDS:
        raise ModelFileError(f"chain kind must be one of {KINDS}, got {kind!r}")
    try:
        S = int(node["states"])
    except (KeyError, TypeError, ValueError):
        raise ModelFileError("'chain.states' must be a positive integer") from None

    defs = {}
    for name, sub in (node.get("define") or {}).items():
        defs[name] = _parse_rate(sub, {}, f"define.{name}")

    try:
        if kind == "general":
            transitions = {}
            for idx, entry in enumerate(node.get("transitions") or ()):
                try:
                    i, j = int(entry["from"]), int(entry["to"])
                    rate = _parse_rate(entry["rate"], defs, f"transitions[{idx}]")
                except (KeyError, TypeError) as exc:
                    raise ModelFileError(f"transitions[{idx}]: missing field {exc}") from None
                if (i, j) in transitions:
                    raise ModelFileError(f"transitions[{idx}]: duplicate pair ({i}, {j})")
                transitions[(i, j)] = rate
            return general_chain(S, transitions)
        first, second = _KIND_LISTS[kind]
        lists = {}
        for key in (first, second):
            raw = node.get(key)
            if not isinstance(raw, list):
                raise ModelFileError(f"chain kind {kind!r} needs the list 'chain.{key}'")
            lists[key] = [_parse_rate(v, defs, f"{key}[{i}]") for i, v in enumerate(raw)]
        return _CONSTRUCTORS[kind](S, lists[first], lists[second])
    except ModelFileError:
        raise
    except ValueError as exc:
        raise ModelFileError(str(exc)) from None


def _parse_analysis(node) -> AnalysisSettings:
    if node is None:
        return AnalysisSettings()
    if not isinstance(node, dict):
        raise ModelFileError("'analysis' must be an object")
    known = {"horizon", "grid", "steps", "weights", "trials", "pairs", "seed",
             "tolerance"}
    extra = set(node) - known
    if extra:
        raise ModelFileError(f"unknown analysis fields {sorted(extra)}")
    weights_mode, weights = "ones", None
    if "weights" in node:
        w = node["weights"]
        if isinstance(w, str):
            if w not in ("ones", "perron", "frozen-perron"):
                raise ModelFileError(f"unknown weights mode {w!r}")
            weights_mode = w
        elif isinstance(w, list):
            weights_mode = "list"
            try:
                weights = tuple(float(v) for v in w)
            except (TypeError, ValueError):
                raise ModelFileError("weights list must contain numbers") from None
        else:
            raise ModelFileError("'analysis.weights' must be a mode name or a list")
    try:
        return AnalysisSettings(
            horizon=float(node.get("horizon", 1.0)),
            grid=int(node.get("grid", 1001)),
            steps=int(node.get("steps", 10_000)),
            weights_mode=weights_mode, weights=weights,
            trials=int(node.get("trials", 100)),
            pairs=int(node.get("pairs", 50)),
            seed=int(node.get("seed", 0)),
            tolerance=float(node.get("tolerance", 1e-8)))
    except (TypeError, ValueError) as exc:
        raise ModelFileError(f"invalid analysis value: {exc}") from None


def parse_model(text: str) -> ModelFile:
    """Parse model-file text; raises :class:`ModelFileError` on any defect."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelFileError("top level must be an object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ModelFileError(f"unsupported schema version {doc.get('schema')!r}; "
                             f"this build reads version {SCHEMA_VERSION}")
    if "chain" not in doc:
        raise ModelFileError("missing 'chain' block")
    return ModelFile(chain=_parse_chain(doc["chain"]),
                     analysis=_parse_analysis(doc.get("analysis")))


def load_model(path) -> ModelFile:
    """Read and parse a model file from disk."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from None
    return parse_model(text)


def _rate_to_json(fn: RateFunction):
    if fn.kind == "constant":
        return fn.params[0]
    if fn.kind == "sinusoid":
        offset, amplitude, frequency, phase = fn.params
        return {"sinusoid": {"offset": offset, "amplitude": amplitude,
                             "frequency": frequency, "phase": phase}}
    times, values = fn.params
    return {"table": {"times": list(times), "values": list(values)}}


def serialize_model(model: ModelFile) -> str:
    """Render a model back to JSON text; parsing it reproduces the same chain."""
    spec = model.chain
    chain = {"kind": spec.kind, "states": spec.S}
    if spec.kind == "general":
        chain["transitions"] = [
            {"from": i, "to": j, "rate": _rate_to_json(fn)}
            for i, j, fn in spec.transitions]
    else:
        for key in _KIND_LISTS[spec.kind]:
            chain[key] = [_rate_to_json(fn) for fn in getattr(spec, key)]
    a = model.analysis
    analysis = {"horizon": a.horizon, "grid": a.grid, "steps": a.steps,
                "weights": list(a.weights) if a.weights_mode == "list" else a.weights_mode,
                "trials": a.trials, "pairs": a.pairs, "seed": a.seed,
                "tolerance": a.tolerance}
    return json.dumps({"schema": SCHEMA_VERSION, "chain": chain,
                       "analysis": analysis}, indent=2) + "\n"
