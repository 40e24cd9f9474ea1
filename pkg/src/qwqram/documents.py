"""JSON documents exchanged by the command line: queries, outputs and traces.

Amplitudes are written as decimal strings with 17 significant digits so a
document reproduces the exact double on reload.  All documents are emitted
with sorted keys and a trailing newline, so identical requests give
byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import encodings as enc
from .errors import ValidationError
from .gates import GateDescriptor
from .memory import MemoryBank, parse_bank, store_bank
from .protocol import ProtocolConfig, Trace, TraceStep
from .walker import DecodedTerm, InternalState, Phase, QState, QueryTerm

TRACE_FORMAT = "qwqram-trace/1"


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _parse_float(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ValidationError(f"{what} must be a number, got {v!r}")
    try:
        return float(v)
    except ValueError:
        raise ValidationError(f"{what} must be a number, got {v!r}") from None


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# queries

def query_to_doc(terms) -> dict:
    return {"terms": [{"address": t.address, "re": fmt_float(complex(t.amplitude).real),
                       "im": fmt_float(complex(t.amplitude).imag)} for t in terms]}


def parse_query(text: str) -> list[QueryTerm]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"query document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or set(doc) != {"terms"} or not isinstance(doc["terms"], list):
        raise ValidationError('query document must be {"terms": [...]}')
    out = []
    for i, t in enumerate(doc["terms"]):
        if not isinstance(t, dict) or not {"address", "re"} <= set(t) or set(t) - {"address", "re", "im"}:
            raise ValidationError(f"query term {i} must have address, re and optional im")
        if not isinstance(t["address"], str):
            raise ValidationError(f"query term {i}: address must be a bit string")
        re_ = _parse_float(t["re"], f"query term {i} re")
        im = _parse_float(t.get("im", 0.0), f"query term {i} im")
        out.append(QueryTerm(t["address"], complex(re_, im)))
    return out


def load_query(path: str | os.PathLike) -> list[QueryTerm]:
    try:
        return parse_query(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read query {path}: {exc.strerror}") from None


# --------------------------------------------------------------------------
# outputs

def output_doc(config: ProtocolConfig, decoded: list[DecodedTerm]) -> dict:
    return {
        "config": config.to_dict(),
        "output": [{"address": d.address, "message": d.message,
                    "re": fmt_float(d.amplitude.real), "im": fmt_float(d.amplitude.imag)} for d in decoded],
    }


# --------------------------------------------------------------------------
# traces

_PHASE_NAMES = {Phase.FORWARD: "forward", Phase.AT_CELL: "at_cell", Phase.BACKWARD: "backward"}


def _walker_fields(state: QState, k: int) -> list[dict]:
    qudit = isinstance(state, enc.QuditQState)
    rows = []
    for sid, (c, d, b, p) in zip(state.layout.subsystems, state.walkers[k].tolist()):
        if qudit:
            q = enc.QuditState.from_code(c)
            st = f"{q.rail}{q.color.symbol}"
        else:
            st = InternalState(c).symbol
        rows.append({"subsystem": sid.label, "state": st, "depth": d,
                     "branch": b if b else None, "phase": _PHASE_NAMES[Phase(p)]})
    return rows


def components_doc(state: QState) -> list[dict]:
    kets = list(state.terms)
    return [
        {
            "ket": kets[k].render(),
            "re": fmt_float(state.amps[k].real),
            "im": fmt_float(state.amps[k].imag),
            "walkers": _walker_fields(state, k),
            "switches_on": [int(c) for c in np.flatnonzero(state.switches[k])],
        }
        for k in range(len(state))
    ]


def _step_doc(i: int, step: TraceStep) -> dict:
    return {
        "index": i,
        "stage": step.stage.value,
        "level": step.level,
        "gate": None if step.gate is None else step.gate.to_dict(),
        "gate_name": None if step.gate is None else str(step.gate),
        "node_ops": step.node_ops,
        "components": None if step.state is None else components_doc(step.state),
    }


def trace_doc(trace: Trace) -> dict:
    return {
        "format": TRACE_FORMAT,
        "config": trace.config.to_dict(),
        "bank": None if trace.bank is None else json.loads(store_bank(trace.bank)),
        "query": query_to_doc(trace.terms),
        "snapshots": trace.snapshots,
        "steps": [_step_doc(i, s) for i, s in enumerate(trace.steps)],
    }


def parse_trace_doc(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"trace document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != TRACE_FORMAT:
        raise ValidationError(f"not a {TRACE_FORMAT} document")
    for key in ("config", "bank", "query", "snapshots", "steps"):
        if key not in doc:
            raise ValidationError(f"trace document lacks {key!r}")
    return doc


def trace_inputs(doc: dict) -> tuple[ProtocolConfig, MemoryBank | None, list[QueryTerm], list[GateDescriptor]]:
    config = ProtocolConfig.from_dict(doc["config"])
    bank = None if doc["bank"] is None else parse_bank(json.dumps(doc["bank"]))
    terms = parse_query(json.dumps(doc["query"]))
    gates = [GateDescriptor.from_dict(s["gate"]) for s in doc["steps"] if s["gate"] is not None]
    return config, bank, terms, gates


def replay(doc: dict) -> list[str]:
    """Re-apply the recorded gates and diff every stored snapshot; returns mismatch messages."""
    from .protocol import apply_step, initial_state

    config, bank, terms, _ = trace_inputs(doc)
    state = initial_state(config, terms)
    problems = []
    for step in doc["steps"]:
        if step["gate"] is not None:
            state = apply_step(config, state, GateDescriptor.from_dict(step["gate"]), bank, False)
        if step["components"] is not None and components_doc(state) != step["components"]:
            problems.append(f"step {step['index']} ({step['gate_name'] or 'input'}) differs from the recording")
    return problems
