"""JSON report documents written by the command-line tool.

Floats are written with 17 significant digits so every value round-trips
exactly; a parallel ``display`` block carries the same payload rounded for
reading.  Key order is insertion order, which the builders keep fixed.
"""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from . import __version__
from .errors import DataError

TOOL = "ccapm"
KINDS = ("moments", "calibration", "pricing", "classification", "simulation", "check")

_ENVELOPE = {
    "type": "object",
    "required": ["tool", "version", "kind", "command", "inputs", "input_digest",
                 "payload", "display", "generated_at"],
    "properties": {
        "tool": {"const": TOOL},
        "version": {"type": "string"},
        "kind": {"enum": list(KINDS)},
        "command": {"type": "array", "items": {"type": "string"}},
        "inputs": {"type": "object"},
        "input_digest": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "payload": {"type": "object"},
        "display": {"type": "object"},
        "generated_at": {"type": ["string", "null"]},
    },
}

_num = {"type": "number"}
_est = {"type": "object", "required": ["value", "se"],
        "properties": {"value": _num, "se": {"type": "number", "minimum": 0}}}

PAYLOAD_SCHEMAS = {
    "moments": {"type": "object", "required": ["growth_moments", "summary"]},
    "calibration": {
        "type": "object",
        "required": ["targets", "result"],
        "properties": {"result": {
            "type": "object",
            "required": ["method", "point", "residuals", "sse", "jacobian_rank",
                         "certificate", "iterations", "converged"],
            "properties": {"jacobian_rank": {"enum": [2, 3]},
                           "residuals": {"type": "array", "items": _num,
                                         "minItems": 3, "maxItems": 3}},
        }},
    },
    "pricing": {"type": "object",
                "required": ["price_dividend_ratio", "expected_equity_return",
                             "risk_free_rate", "equity_premium", "log_equity_premium"]},
    "classification": {"type": "object",
                       "required": ["allocation", "comparison", "classification"]},
    "simulation": {"type": "object",
                   "required": ["equity_return", "risk_free_rate", "euler_residual", "cpr_gap"],
                   "properties": {"equity_return": _est, "risk_free_rate": _est,
                                  "euler_residual": _est}},
    "check": {"type": "object", "required": ["checks", "passed"]},
}


def _float_text(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be written to a report")
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0, short: bool = False) -> str:
    """Serialize like :func:`json.dumps` but with 17-significant-digit floats.

    ``short=True`` writes floats with their shortest round-trip repr instead.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return json.dumps(obj, allow_nan=False) if short else _float_text(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent, _level + 1, short or k == 'display')}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1, short) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return dumps(obj.item(), indent, _level, short)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def rounded(obj, places: int):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return round(obj, places)
    if isinstance(obj, dict):
        return {k: rounded(v, places) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v, places) for v in obj]
    return obj


def digest(inputs: dict) -> str:
    canonical = json.dumps(inputs, sort_keys=True, separators=(",", ":"),
                           ensure_ascii=False, allow_nan=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class ReportDocument:
    kind: str
    command: list
    inputs: dict
    payload: dict
    display: dict = field(default_factory=dict)
    generated_at: str | None = None
    input_digest: str = ""
    tool: str = TOOL
    version: str = __version__

    def __post_init__(self):
        if not self.input_digest:
            self.input_digest = digest(self.inputs)

    @classmethod
    def build(cls, kind, command, inputs, payload, places=6, timestamp=True):
        stamp = (_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
                 if timestamp else None)
        return cls(kind=kind, command=list(command), inputs=inputs, payload=payload,
                   display=rounded(payload, places), generated_at=stamp)

    def to_dict(self) -> dict:
        d = asdict(self)
        order = ("tool", "version", "kind", "command", "inputs", "input_digest",
                 "payload", "display", "generated_at")
        return {k: d[k] for k in order}

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        validate(data)
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"report is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def validate(data: dict) -> None:
    try:
        jsonschema.validate(data, _ENVELOPE)
        jsonschema.validate(data["payload"], PAYLOAD_SCHEMAS[data["kind"]])
    except jsonschema.ValidationError as exc:
        raise DataError(f"report fails schema: {exc.message}") from exc
    if digest(data["inputs"]) != data["input_digest"]:
        raise DataError("report input_digest does not match its inputs")


def load_report(path) -> ReportDocument:
    return ReportDocument.from_json(Path(path).read_text(encoding="utf-8"))
