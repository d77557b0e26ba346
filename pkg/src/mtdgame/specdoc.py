"""JSON game-spec documents: strict schema, parsing, canonical serialization."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import jsonschema

from .game import ATTACKER_RULES, COST_KINDS, DEFENDER_RULES, CostModel, GameError, GameSpec

_number = {"type": "number"}
_numbers = {"type": "array", "items": _number, "minItems": 1}


def _obj(props: dict, required: list[str] | None = None) -> dict:
    return {
        "type": "object",
        "properties": props,
        "required": list(props) if required is None else required,
        "additionalProperties": False,
    }


SCHEMA = _obj(
    {
        "techniques": {"type": "integer", "minimum": 1},
        "keys_per_technique": {"type": "integer", "minimum": 1},
        "beta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "rewards": _obj(
            {
                "defender_other_tech": _number,
                "defender_same_tech": _number,
                "attacker_match": _number,
                "attacker_miss": _number,
            }
        ),
        "power": _obj({"defender": _numbers, "attacker": _numbers}),
        "transition": _obj({"key": _number, "technique": _number, "stay": _number}),
        "cost": _obj(
            {"model": {"enum": list(COST_KINDS)}, "q": {"type": "number", "minimum": 0}}
        ),
        "timing": _obj(
            {
                "brute_force_seconds": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 1,
                },
                "margin": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
            required=["brute_force_seconds"],
        ),
        "conventions": _obj(
            {
                "defender_reward": {"enum": list(DEFENDER_RULES)},
                "attacker_reward": {"enum": list(ATTACKER_RULES)},
            },
            required=[],
        ),
    },
    required=[
        "techniques",
        "keys_per_technique",
        "beta",
        "rewards",
        "power",
        "transition",
        "cost",
    ],
)


class SpecError(GameError):
    """A spec document that does not parse or validate."""


def parse_spec(text: str, source: str = "<spec>") -> GameSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return spec_from_document(doc, source)


def load_spec(path) -> GameSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    return parse_spec(text, str(path))


def spec_from_document(doc: dict, source: str = "<spec>") -> GameSpec:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SpecError(f"{source}: at {where}: {err.message}")
    conv = doc.get("conventions", {})
    timing = doc.get("timing")
    try:
        return GameSpec(
            num_techniques=doc["techniques"],
            keys_per_technique=doc["keys_per_technique"],
            discount=float(doc["beta"]),
            defender_reward_other_tech=float(doc["rewards"]["defender_other_tech"]),
            defender_reward_same_tech=float(doc["rewards"]["defender_same_tech"]),
            attacker_reward_match=float(doc["rewards"]["attacker_match"]),
            attacker_reward_miss=float(doc["rewards"]["attacker_miss"]),
            defender_power=doc["power"]["defender"],
            attacker_power=doc["power"]["attacker"],
            transition_reward_key=float(doc["transition"]["key"]),
            transition_reward_technique=float(doc["transition"]["technique"]),
            transition_reward_stay=float(doc["transition"]["stay"]),
            cost_model=CostModel(doc["cost"]["model"], float(doc["cost"]["q"])),
            brute_force_times=None if timing is None else timing["brute_force_seconds"],
            slot_margin=0.9 if timing is None else float(timing.get("margin", 0.9)),
            defender_rule=conv.get("defender_reward", "current"),
            attacker_rule=conv.get("attacker_reward", "current"),
        )
    except GameError as exc:
        raise SpecError(f"{source}: {exc}") from exc


def _num(v: float):
    return int(v) if float(v).is_integer() else float(v)


def spec_to_document(spec: GameSpec) -> dict:
    """Canonical document; optional sections appear only when they carry information."""
    doc = {
        "techniques": spec.num_techniques,
        "keys_per_technique": spec.keys_per_technique,
        "beta": spec.discount,
        "rewards": {
            "defender_other_tech": _num(spec.defender_reward_other_tech),
            "defender_same_tech": _num(spec.defender_reward_same_tech),
            "attacker_match": _num(spec.attacker_reward_match),
            "attacker_miss": _num(spec.attacker_reward_miss),
        },
        "power": {
            "defender": [_num(p) for p in spec.defender_power],
            "attacker": [_num(p) for p in spec.attacker_power],
        },
        "transition": {
            "key": _num(spec.transition_reward_key),
            "technique": _num(spec.transition_reward_technique),
            "stay": _num(spec.transition_reward_stay),
        },
        "cost": {"model": spec.cost_model.kind, "q": _num(spec.cost_model.q)},
    }
    if spec.brute_force_times is not None:
        doc["timing"] = {
            "brute_force_seconds": [_num(t) for t in spec.brute_force_times],
            "margin": spec.slot_margin,
        }
    conv = {}
    if spec.defender_rule != "current":
        conv["defender_reward"] = spec.defender_rule
    if spec.attacker_rule != "current":
        conv["attacker_reward"] = spec.attacker_rule
    if conv:
        doc["conventions"] = conv
    return doc


def dumps_spec(spec: GameSpec) -> str:
    return json.dumps(spec_to_document(spec), indent=2) + "\n"


def spec_hash(spec: GameSpec) -> str:
    canonical = json.dumps(spec_to_document(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


DEFAULT_DOCUMENT = spec_to_document(GameSpec())
