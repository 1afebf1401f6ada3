"""Trace serialization and byte-exact replay.

A run is written as one JSON record per step (line-delimited) plus a meta
document carrying everything needed to reproduce it: algorithm registry
name and options, inputs, crash times, and the full detector history table.
Each record ends with a stable 64-bit digest of the configuration the step
produced, so a replay can be compared position by position.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Mapping, Optional

from .kernel import (
    AlgorithmSpec,
    Configuration,
    ExecutionPrefix,
    ProcessId,
    StepDirective,
    run,
)
from .models import FailureContext, FailurePattern, FDHistory

TRACE_FORMAT = "sddlab-trace-v1"
TRACE_SUFFIX = ".trace.jsonl"
META_SUFFIX = ".meta.json"


class TraceError(Exception):
    pass


class ReplayMismatch(TraceError):
    def __init__(self, index: int):
        super().__init__(f"replayed configuration digest differs at index {index}")
        self.index = index


# ---------------------------------------------------------------------------
# Canonical encoding and digests
# ---------------------------------------------------------------------------


def canonical_bytes(value: Any) -> bytes:
    """Total, stable byte encoding for the value shapes the toolkit uses
    (None, bools, ints, strings, bytes, process ids, tuples/lists, sets,
    dicts).  Unordered containers are sorted by their encoded form."""
    if value is None:
        return b"N;"
    if isinstance(value, bool):
        return b"T;" if value else b"F;"
    if isinstance(value, int):
        return b"i" + str(value).encode() + b";"
    if isinstance(value, str):
        encoded = value.encode()
        return b"s" + str(len(encoded)).encode() + b":" + encoded
    if isinstance(value, bytes):
        return b"b" + str(len(value)).encode() + b":" + value
    if isinstance(value, ProcessId):
        return b"p" + value.value.encode() + b";"
    if isinstance(value, (tuple, list)):
        return b"t(" + b"".join(canonical_bytes(v) for v in value) + b")"
    if isinstance(value, (set, frozenset)):
        return b"z(" + b"".join(sorted(canonical_bytes(v) for v in value)) + b")"
    if isinstance(value, Mapping):
        items = sorted(
            (canonical_bytes(k) + canonical_bytes(v)) for k, v in value.items()
        )
        return b"d(" + b"".join(items) + b")"
    raise TypeError(f"no canonical encoding for {type(value).__name__}")


def _digest(payload: bytes) -> str:
    return hashlib.blake2b(payload, digest_size=8).hexdigest()


def config_digest(config: Configuration) -> str:
    """Stable 64-bit digest of a configuration (states and buffers; the
    positional index is excluded, matching configuration equality)."""
    states = tuple(
        (s.process, s.algorithm_memory, s.input_value, s.decision, s.decided_count)
        for s in config.states
    )
    buffers = tuple(
        tuple((m.sender, m.receiver, m.payload, m.sent_at, m.unique_tag) for m in buf)
        for buf in config.buffers
    )
    return _digest(canonical_bytes((states, buffers)))


def provenance_digest(prefix: ExecutionPrefix) -> Optional[str]:
    if prefix.provenance is None:
        return None
    p = prefix.provenance
    schedule = tuple(
        (d.actor, tuple(sorted(d.deliver)), d.fd_value) for d in p.schedule
    )
    pattern = p.context.pattern.crash_times
    history = (
        None
        if p.context.history is None
        else (p.context.history.domain_name, p.context.history.entries)
    )
    return _digest(canonical_bytes((p.algorithm, p.inputs, schedule, pattern, history)))


# ---------------------------------------------------------------------------
# Opaque-value JSON round trip (detector values and the like)
# ---------------------------------------------------------------------------


def to_jsonable(value: Any) -> Any:
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, bytes):
        return {"__bytes__": value.hex()}
    if isinstance(value, ProcessId):
        return {"__process__": value.value}
    if isinstance(value, tuple):
        return {"__tuple__": [to_jsonable(v) for v in value]}
    if isinstance(value, (set, frozenset)):
        return {"__set__": sorted((to_jsonable(v) for v in value), key=json.dumps)}
    raise TypeError(f"value {value!r} is not trace-serializable")


def from_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        if "__bytes__" in value:
            return bytes.fromhex(value["__bytes__"])
        if "__process__" in value:
            return ProcessId(value["__process__"])
        if "__tuple__" in value:
            return tuple(from_jsonable(v) for v in value["__tuple__"])
        if "__set__" in value:
            return frozenset(from_jsonable(v) for v in value["__set__"])
        raise TraceError(f"unknown tagged value {sorted(value)}")
    return value


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def step_records(prefix: ExecutionPrefix) -> list[dict]:
    records = []
    for i, (directive, outcome) in enumerate(zip(prefix.schedule, prefix.outcomes)):
        records.append(
            {
                "index": i,
                "actor": directive.actor.value,
                "kind": outcome.kind.value,
                "trivial": outcome.trivial,
                "delivered_tags": sorted(directive.deliver),
                "sent_tags": [m.unique_tag for m in outcome.messages_sent],
                "fd_value": to_jsonable(
                    directive.fd_value
                    if directive.fd_value is not None
                    else prefix.failure_context.fd_value(directive.actor, i)
                ),
                "state_digest": config_digest(prefix.configurations[i + 1]),
            }
        )
    return records


def trace_meta(
    prefix: ExecutionPrefix,
    algorithm_name: Optional[str] = None,
    algorithm_options: Optional[Mapping[str, Any]] = None,
) -> dict:
    context = prefix.failure_context
    history = context.history
    return {
        "format": TRACE_FORMAT,
        "algorithm": algorithm_name
        or (prefix.provenance.algorithm if prefix.provenance else None),
        "algorithm_options": dict(algorithm_options or {}),
        "inputs": {
            p.value: prefix.input_of(p) for p in (ProcessId.SOURCE, ProcessId.DEST)
        },
        "failure": {
            "source": context.pattern.crash_time_of(ProcessId.SOURCE),
            "dest": context.pattern.crash_time_of(ProcessId.DEST),
        },
        "fd_history": None
        if history is None
        else {
            "domain": history.domain_name,
            "values": [
                [p.value, t, to_jsonable(v)] for p, t, v in history.entries
            ],
        },
        "horizon": prefix.horizon,
        "initial_digest": config_digest(prefix.configurations[0]),
        "provenance_digest": provenance_digest(prefix),
    }


def write_trace(
    prefix: ExecutionPrefix,
    out_dir: Path | str,
    name: str,
    algorithm_name: Optional[str] = None,
    algorithm_options: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Write ``<name>.trace.jsonl`` and ``<name>.meta.json``; returns the
    trace path.  Output is byte-stable for equal runs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / f"{name}{TRACE_SUFFIX}"
    lines = [
        json.dumps(record, sort_keys=True, separators=(",", ":"))
        for record in step_records(prefix)
    ]
    trace_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    meta_path = out_dir / f"{name}{META_SUFFIX}"
    meta = trace_meta(prefix, algorithm_name, algorithm_options)
    meta_path.write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return trace_path


# ---------------------------------------------------------------------------
# Loading and replay
# ---------------------------------------------------------------------------


def load_trace(trace_path: Path | str) -> tuple[dict, list[dict]]:
    trace_path = Path(trace_path)
    meta_path = trace_path.with_name(
        trace_path.name.replace(TRACE_SUFFIX, META_SUFFIX)
    )
    if not meta_path.exists():
        raise TraceError(f"missing meta document {meta_path}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    if meta.get("format") != TRACE_FORMAT:
        raise TraceError(f"unsupported trace format {meta.get('format')!r}")
    records = [
        json.loads(line)
        for line in trace_path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    return meta, records


def context_from_meta(meta: Mapping[str, Any]) -> FailureContext:
    pattern = FailurePattern.of(
        source=meta["failure"]["source"], dest=meta["failure"]["dest"]
    )
    raw = meta.get("fd_history")
    history = None
    if raw is not None:
        history = FDHistory(
            domain_name=raw["domain"],
            entries=tuple(
                (ProcessId(p), t, from_jsonable(v)) for p, t, v in raw["values"]
            ),
        )
    return FailureContext(pattern=pattern, history=history)


def directives_from_records(records: list[dict]) -> tuple[StepDirective, ...]:
    return tuple(
        StepDirective(
            actor=ProcessId(record["actor"]),
            deliver=frozenset(record["delivered_tags"]),
            fd_value=from_jsonable(record["fd_value"]),
        )
        for record in records
    )


def replay_trace(
    trace_path: Path | str, algorithm: AlgorithmSpec
) -> ExecutionPrefix:
    """Re-run a serialized trace and verify every configuration digest.

    Raises :class:`ReplayMismatch` at the first diverging index; a clean
    return certifies byte-exact reproduction of the original run.
    """
    meta, records = load_trace(trace_path)
    context = context_from_meta(meta)
    inputs = {
        ProcessId.SOURCE: meta["inputs"]["source"],
        ProcessId.DEST: meta["inputs"]["dest"],
    }
    prefix = run(algorithm, inputs, directives_from_records(records), context)
    if config_digest(prefix.configurations[0]) != meta["initial_digest"]:
        raise ReplayMismatch(0)
    for record, config in zip(records, prefix.configurations[1:]):
        if config_digest(config) != record["state_digest"]:
            raise ReplayMismatch(record["index"])
    return prefix
