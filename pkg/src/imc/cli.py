"""Command-line interface.

    imc <validate|classify|permanent|evolve|invariant|convergence|report>
        --model <path> [--gamble <spec>] [--steps <n>] [--initial <spec>]
        [--tol <eps>] [--max-iter <n>] [--max-strong-states <n>]

All commands read a JSON model file and write JSON to standard output.  The
environment variable ``IMC_CONFIG`` may point to a JSON config file; the
model file's "config" block overrides it and command-line flags override
both.  Exit codes: 0 success, 2 parse/data error, 3 empty credal set,
4 report emitted with warnings (indeterminate verdicts or a cap was hit),
5 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields

from .credal import VacuousIef
from .errors import (
    EmptyCredalSet,
    ImcError,
    NonConvergent,
    PowerCapExceeded,
    RegularityCapExceeded,
    StateBudgetExceeded,
    UnknownState,
    VertexBudgetExceeded,
)
from .invariant import (
    classify_convergence,
    extremal_invariants,
    indicator_family,
)
from .model import Config
from .modelio import (
    REPORT_SCHEMA,
    Model,
    ModelFormatError,
    load_model,
    normalized_model_dict,
    parse_gamble_spec,
    parse_initial_flag,
    round12,
)
from .strong import minimal_permanent_classes, regularity_step
from .transition import evolve
from .weak import classify

_CAP_ERRORS = (StateBudgetExceeded, VertexBudgetExceeded, PowerCapExceeded,
               RegularityCapExceeded)


def _env_config() -> dict:
    path = os.environ.get("IMC_CONFIG")
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"IMC_CONFIG file: {exc}") from exc
    if not isinstance(document, dict):
        raise ModelFormatError("IMC_CONFIG file must hold a JSON object")
    return document


def _flag_overrides(args) -> dict:
    overrides = {}
    if args.tol is not None:
        overrides["eps_conv"] = args.tol
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    if args.max_strong_states is not None:
        overrides["max_strong_states"] = args.max_strong_states
    return overrides


def _load(args) -> Model:
    return load_model(args.model, _flag_overrides(args), _env_config())


def _initial(args, model: Model):
    if getattr(args, "initial", None):
        return parse_initial_flag(args.initial, model.ito.space)
    if model.initial is not None:
        return model.initial
    return VacuousIef(model.ito.space, model.ito.space.labels)


def _config_dict(config: Config) -> dict:
    return {f.name: getattr(config, f.name) for f in fields(Config)}


def _classification_dict(ito) -> dict:
    cls = classify(ito)
    return {
        "classes": [
            {
                "members": sorted(info.members, key=ito.space.index),
                "regular": info.regular,
                "period": info.period,
                "regularity_witness": info.regularity_witness,
                "absorbing": info.absorbing,
                "closure": sorted(info.closure, key=ito.space.index),
            }
            for info in cls.classes
        ],
        "leads_to": [list(edge) for edge in cls.edges],
        "maximal": list(cls.maximal),
        "top": cls.top,
        "regularly_absorbing": cls.regularly_absorbing,
        "absorption_witness": cls.absorption_witness,
        "thresholds": dict(cls.thresholds),
    }


def _permanent_dict(ito, warnings: list) -> dict:
    classes = []
    for members in minimal_permanent_classes(ito):
        entry = {"members": sorted(members, key=ito.space.index)}
        try:
            entry["regularity_step"] = regularity_step(ito, members)
        except RegularityCapExceeded as exc:
            entry["regularity_step"] = None
            warnings.append(str(exc))
        classes.append(entry)
    return {"classes": classes}


def _functional_values(functional, space, config) -> list:
    values = []
    for f in indicator_family(space, config):
        subset = [space.labels[i] for i in range(space.size) if f.values[i] > 0.5]
        values.append({
            "subset": subset,
            "upper": round12(functional.upper(f)),
            "lower": round12(functional.lower(f)),
        })
    return values


def _convergence_dict(initial, ito, warnings: list) -> dict:
    report = classify_convergence(initial, ito)
    warnings.extend(report.warnings)
    block = {
        "classes": [
            {
                "members": sorted(v.members, key=ito.space.index),
                "verdict": v.verdict,
                "limit_upper": round12(v.limit_upper),
                "settled_at": v.settled_at,
            }
            for v in report.classes
        ],
        "closure": sorted(report.closure, key=ito.space.index),
        "extremal_over_window": report.extremal_over_window,
        "window": report.window,
        "invariance_residual": None if report.invariance_residual is None
        else round12(report.invariance_residual),
        "agreement_residual": None if report.agreement_residual is None
        else round12(report.agreement_residual),
        "thresholds": dict(report.thresholds),
    }
    if report.limit is not None:
        block["limit_values"] = _functional_values(report.limit, ito.space, ito.config)
    return block


def _extremal_dict(ito) -> list:
    blocks = []
    for inv in extremal_invariants(ito):
        blocks.append({
            "classes": [sorted(c, key=ito.space.index) for c in inv.classes],
            "closure": sorted(inv.closure, key=ito.space.index),
            "values": _functional_values(inv.functional, ito.space, ito.config),
        })
    return blocks


def _emit(payload: dict, warnings: list) -> int:
    if warnings:
        payload["warnings"] = list(dict.fromkeys(warnings))
    else:
        payload["warnings"] = []
    print(json.dumps(payload, indent=2))
    return 4 if warnings else 0


def _guarded(warnings: list, label: str, producer):
    try:
        return producer()
    except _CAP_ERRORS as exc:
        warnings.append(f"{label}: {exc}")
        return None


def cmd_validate(args) -> int:
    model = _load(args)
    print(json.dumps(normalized_model_dict(model), indent=2))
    return 0


def cmd_classify(args) -> int:
    model = _load(args)
    warnings: list = []
    payload = {
        "schema": REPORT_SCHEMA,
        "config": _config_dict(model.config),
        "classification": _classification_dict(model.ito),
    }
    return _emit(payload, warnings)


def cmd_permanent(args) -> int:
    model = _load(args)
    warnings: list = []
    block = _guarded(warnings, "minimal_permanent_classes",
                     lambda: _permanent_dict(model.ito, warnings))
    payload = {
        "schema": REPORT_SCHEMA,
        "config": _config_dict(model.config),
        "minimal_permanent_classes": block,
    }
    return _emit(payload, warnings)


def cmd_evolve(args) -> int:
    model = _load(args)
    space = model.ito.space
    gamble = parse_gamble_spec(args.gamble, space)
    initial = _initial(args, model)
    lo, hi = evolve(initial, model.ito, args.steps, gamble)
    payload = {
        "schema": REPORT_SCHEMA,
        "config": _config_dict(model.config),
        "steps": args.steps,
        "gamble": [round12(v) for v in gamble.values],
        "interval": [round12(lo), round12(hi)],
    }
    return _emit(payload, [])


def cmd_invariant(args) -> int:
    model = _load(args)
    warnings: list = []
    block = _guarded(warnings, "extremal_invariants",
                     lambda: _extremal_dict(model.ito))
    payload = {
        "schema": REPORT_SCHEMA,
        "config": _config_dict(model.config),
        "extremal_invariants": block,
    }
    return _emit(payload, warnings)


def cmd_convergence(args) -> int:
    model = _load(args)
    warnings: list = []
    block = _guarded(warnings, "convergence",
                     lambda: _convergence_dict(_initial(args, model), model.ito,
                                               warnings))
    payload = {
        "schema": REPORT_SCHEMA,
        "config": _config_dict(model.config),
        "convergence": block,
    }
    return _emit(payload, warnings)


def cmd_report(args) -> int:
    model = _load(args)
    ito = model.ito
    warnings: list = []
    payload = {
        "schema": REPORT_SCHEMA,
        "config": _config_dict(model.config),
        "classification": _classification_dict(ito),
        "minimal_permanent_classes": _guarded(
            warnings, "minimal_permanent_classes",
            lambda: _permanent_dict(ito, warnings)),
        "convergence": _guarded(
            warnings, "convergence",
            lambda: _convergence_dict(_initial(args, model), ito, warnings)),
        "extremal_invariants": _guarded(
            warnings, "extremal_invariants", lambda: _extremal_dict(ito)),
    }
    return _emit(payload, warnings)


_COMMANDS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "permanent": cmd_permanent,
    "evolve": cmd_evolve,
    "invariant": cmd_invariant,
    "convergence": cmd_convergence,
    "report": cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imc",
        description="Imprecise Markov chains: classification, permanent "
                    "classes and invariant expectation functionals.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--model", required=True, help="path to a JSON model file")
        p.add_argument("--tol", type=float, default=None,
                       help="convergence tolerance (eps_conv)")
        p.add_argument("--max-iter", type=int, default=None)
        p.add_argument("--max-strong-states", type=int, default=None)
        if name in ("evolve", "convergence", "report"):
            p.add_argument("--initial", default=None,
                           help="initial functional, inline JSON or "
                                "'precise:w1,w2' / 'vacuous_on:a,b'")
        if name == "evolve":
            p.add_argument("--gamble", required=True,
                           help="'indicator:<labels>' or a value list")
            p.add_argument("--steps", type=int, required=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except EmptyCredalSet as exc:
        print(f"imc: empty credal set: {exc}", file=sys.stderr)
        return 3
    except (ModelFormatError, UnknownState) as exc:
        print(f"imc: {exc}", file=sys.stderr)
        return 2
    except NonConvergent as exc:
        payload = {
            "schema": REPORT_SCHEMA,
            "error": {
                "type": "NonConvergent",
                "message": str(exc),
                "bracket": list(exc.bracket) if exc.bracket else None,
                "iterations": exc.iterations,
            },
        }
        print(json.dumps(payload, indent=2))
        return 5
    except ImcError as exc:
        print(f"imc: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
