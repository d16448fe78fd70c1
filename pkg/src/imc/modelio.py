"""JSON model files and report assembly.

Model schema (``imc-model/1``)::

    {
      "schema": "imc-model/1",
      "states": ["a", "b"],
      "rows": {
        "a": {"vertices": [[1.0, 0.0]]},
        "b": {"interval": {"lower": [0.2, 0.4], "upper": [0.6, 0.8]}}
      },
      "initial": {"precise": [0.5, 0.5]},      # optional; also "vertices",
                                               # "interval", "vacuous_on"
      "config": {"eps_conv": 1e-10}            # optional overrides
    }

Validation echoes the coherence-tightened model with full float precision so
the output re-parses to an identical normalized model.  Reports render floats
at 12 significant digits and sort every subset by state input order, so
repeated runs are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from .credal import (
    Ief,
    IntervalRow,
    IntervalSetIef,
    PreciseIef,
    VacuousIef,
    VertexRow,
    VertexSetIef,
    coherence_normalize,
)
from .errors import EmptyCredalSet, ImcError
from .model import Config, Gamble, StateSpace
from .transition import Ito

__all__ = ["ModelFormatError", "Model", "load_model", "parse_model",
           "normalized_model_dict", "parse_gamble_spec", "parse_initial_spec",
           "round12"]

SCHEMA = "imc-model/1"
REPORT_SCHEMA = "imc-report/1"


class ModelFormatError(ImcError):
    """The model file or an inline spec does not match the schema."""


def round12(x: float) -> float:
    """Round through 12 significant digits (report float policy)."""
    return float(f"{float(x):.12g}")


@dataclass
class Model:
    ito: Ito
    initial: Ief | None
    config: Config
    had_config: bool
    initial_spec: dict | None


def _require(condition: bool, message: str):
    if not condition:
        raise ModelFormatError(message)


def _parse_row(space: StateSpace, label: str, spec) -> VertexRow | IntervalRow:
    _require(isinstance(spec, dict), f"row {label!r} must be an object")
    if "vertices" in spec:
        _require("interval" not in spec, f"row {label!r} mixes vertex and interval form")
        try:
            return VertexRow(spec["vertices"])
        except (ValueError, TypeError) as exc:
            raise ModelFormatError(f"row {label!r}: {exc}") from exc
    if "interval" in spec:
        body = spec["interval"]
        _require(isinstance(body, dict) and "lower" in body and "upper" in body,
                 f"row {label!r} interval needs lower and upper")
        try:
            return coherence_normalize(IntervalRow(body["lower"], body["upper"]))
        except EmptyCredalSet as exc:
            raise EmptyCredalSet(f"row {label!r}: {exc}") from exc
        except (ValueError, TypeError) as exc:
            raise ModelFormatError(f"row {label!r}: {exc}") from exc
    raise ModelFormatError(f"row {label!r} needs 'vertices' or 'interval'")


def parse_initial_spec(spec, space: StateSpace) -> Ief:
    """Initial-functional spec: precise / vertices / interval / vacuous_on."""
    _require(isinstance(spec, dict) and len(spec) == 1,
             "initial spec must be an object with exactly one key")
    kind, body = next(iter(spec.items()))
    try:
        if kind == "precise":
            return PreciseIef(space, body)
        if kind == "vertices":
            return VertexSetIef(space, body)
        if kind == "interval":
            _require(isinstance(body, dict) and "lower" in body and "upper" in body,
                     "initial interval needs lower and upper")
            return IntervalSetIef(space, body["lower"], body["upper"])
        if kind == "vacuous_on":
            return VacuousIef(space, body)
    except EmptyCredalSet:
        raise
    except ImcError:
        raise
    except (ValueError, TypeError) as exc:
        raise ModelFormatError(f"initial spec: {exc}") from exc
    raise ModelFormatError(f"unknown initial spec kind {kind!r}")


def parse_model(document, config_overrides: dict | None = None,
                config_base: dict | None = None) -> Model:
    _require(isinstance(document, dict), "model must be a JSON object")
    schema = document.get("schema", SCHEMA)
    _require(schema == SCHEMA, f"unsupported schema {schema!r}")
    _require("states" in document, "model needs a 'states' list")
    _require(isinstance(document["states"], list) and document["states"],
             "'states' must be a non-empty list")
    try:
        space = StateSpace(document["states"])
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from exc

    _require(isinstance(document.get("rows"), dict), "model needs a 'rows' object")
    rows_spec = document["rows"]
    missing = [s for s in space.labels if s not in rows_spec]
    _require(not missing, f"rows missing for states {missing}")
    extra = [s for s in rows_spec if s not in space]
    _require(not extra, f"rows given for unknown states {extra}")

    config_fields = {f.name for f in fields(Config)}
    merged: dict = {}
    if config_base:
        unknown = set(config_base) - config_fields
        _require(not unknown, f"unknown config fields {sorted(unknown)}")
        merged.update(config_base)
    had_config = "config" in document
    if had_config:
        _require(isinstance(document["config"], dict), "'config' must be an object")
        unknown = set(document["config"]) - config_fields
        _require(not unknown, f"unknown config fields {sorted(unknown)}")
        merged.update(document["config"])
    if config_overrides:
        merged.update({k: v for k, v in config_overrides.items() if v is not None})
    try:
        config = Config(**merged)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"config: {exc}") from exc

    rows = [_parse_row(space, label, rows_spec[label]) for label in space.labels]
    ito = Ito(space, rows, config)

    initial = None
    initial_spec = None
    if "initial" in document and document["initial"] is not None:
        initial_spec = document["initial"]
        initial = parse_initial_spec(initial_spec, space)
    return Model(ito=ito, initial=initial, config=config,
                 had_config=had_config, initial_spec=initial_spec)


def load_model(path, config_overrides: dict | None = None,
               config_base: dict | None = None) -> Model:
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    return parse_model(document, config_overrides, config_base)


def _row_dict(row: VertexRow | IntervalRow) -> dict:
    if isinstance(row, VertexRow):
        return {"vertices": [[float(v) for v in vertex] for vertex in row.vertices]}
    return {"interval": {"lower": [float(v) for v in row.lower_bounds],
                         "upper": [float(v) for v in row.upper_bounds]}}


def normalized_model_dict(model: Model) -> dict:
    """Coherence-tightened model echo; re-parses to an identical model."""
    ito = model.ito
    document: dict = {
        "schema": SCHEMA,
        "states": list(ito.space.labels),
        "rows": {label: _row_dict(row)
                 for label, row in zip(ito.space.labels, ito.rows)},
    }
    if model.initial_spec is not None:
        document["initial"] = model.initial_spec
    if model.had_config:
        document["config"] = {f.name: getattr(model.config, f.name)
                              for f in fields(Config)}
    return document


def parse_gamble_spec(spec: str, space: StateSpace) -> Gamble:
    """A gamble from the command line: 'indicator:<labels>' or a value list."""
    spec = spec.strip()
    if spec.startswith("indicator:"):
        labels = [s for s in spec[len("indicator:"):].split(",") if s]
        return Gamble(space, space.subset_mask(labels).astype(float))
    if spec.startswith("["):
        try:
            values = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"gamble spec is not valid JSON: {exc}") from exc
    else:
        try:
            values = [float(part) for part in spec.split(",") if part.strip()]
        except ValueError as exc:
            raise ModelFormatError(f"gamble spec: {exc}") from exc
    if len(values) != space.size:
        raise ModelFormatError(
            f"gamble has {len(values)} values for {space.size} states")
    return Gamble(space, values)


def parse_initial_flag(spec: str, space: StateSpace) -> Ief:
    """--initial flag: inline JSON object or 'kind:...' shorthand."""
    spec = spec.strip()
    if spec.startswith("{"):
        try:
            return parse_initial_spec(json.loads(spec), space)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"initial spec is not valid JSON: {exc}") from exc
    if ":" in spec:
        kind, _, body = spec.partition(":")
        if kind == "vacuous_on":
            return parse_initial_spec({"vacuous_on": [s for s in body.split(",") if s]},
                                      space)
        if kind == "precise":
            return parse_initial_spec(
                {"precise": [float(p) for p in body.split(",") if p.strip()]}, space)
    raise ModelFormatError(
        "initial flag needs inline JSON or 'precise:<weights>' / "
        "'vacuous_on:<labels>'")
