"""Admissibility predicates for the asynchronous, synchronous, and
eventually-synchronous (GST) models, plus failure patterns and
failure-detector histories.

Liveness clauses can never be refuted on a finite prefix, so the checker
separates hard ``violations`` from ``open_obligations`` that merely record
what a fair continuation still owes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Optional

from .kernel import ExecutionPrefix, PROCESSES, ProcessId


class ParamMismatch(Exception):
    pass


class DomainMismatch(Exception):
    pass


@dataclass(frozen=True, slots=True)
class FailurePattern:
    """Crash times per process; ``None`` means the process is correct.

    A process with crash time c takes no step at any index >= c, so the
    crashed set F(t) = {p : crash_time(p) <= t} is monotone in t.
    """

    crash_times: tuple[Optional[int], Optional[int]]

    @classmethod
    def of(cls, source: Optional[int] = None, dest: Optional[int] = None) -> "FailurePattern":
        return cls(crash_times=(source, dest))

    def crash_time_of(self, process: ProcessId) -> Optional[int]:
        return self.crash_times[process.idx]

    def faulty(self, process: ProcessId) -> bool:
        return self.crash_times[process.idx] is not None

    def crashed_at(self, process: ProcessId, t: int) -> bool:
        ct = self.crash_times[process.idx]
        return ct is not None and t >= ct

    def crashed_set(self, t: int) -> frozenset[ProcessId]:
        return frozenset(p for p in PROCESSES if self.crashed_at(p, t))


@dataclass(frozen=True)
class FDHistory:
    """A failure-detector history: one opaque value per (process, time).

    Histories may depend only on the failure pattern; they are attached to
    patterns via :class:`FailureContext`, never to executions.
    """

    domain_name: str
    entries: tuple[tuple[ProcessId, int, Any], ...]

    @cached_property
    def _table(self) -> dict[tuple[ProcessId, int], Any]:
        return {(p, t): v for p, t, v in self.entries}

    def value(self, process: ProcessId, t: int) -> Any:
        return self._table.get((process, t))

    @property
    def horizon(self) -> int:
        return max((t for _, t, _ in self.entries), default=-1)


@dataclass(frozen=True)
class FailureContext:
    """A failure pattern plus an optional FD history for FD-augmented models."""

    pattern: FailurePattern
    history: Optional[FDHistory] = None

    @classmethod
    def none(cls) -> "FailureContext":
        return cls(pattern=FailurePattern.of())

    def crashed_at(self, process: ProcessId, t: int) -> bool:
        return self.pattern.crashed_at(process, t)

    def fd_value(self, process: ProcessId, t: int) -> Any:
        return None if self.history is None else self.history.value(process, t)


class ModelKind(Enum):
    ASYNC = "async"
    SYNCHRONOUS = "synchronous"
    GST = "gst"


@dataclass(frozen=True, slots=True)
class ModelParams:
    """Model selector with the post-stabilization bounds.

    ``delta`` bounds message delay and ``phi`` bounds the gap between steps
    of a live process, both in ticks; for the GST model they apply from
    ``gst`` on, for the synchronous model from index 0.  The synchronous
    instance corresponds to the fully synchronous point of the classic
    partial-synchrony classification (unit communication and process
    synchrony), exposed as :attr:`c_p_note`.
    """

    kind: ModelKind
    gst: Optional[int] = None
    delta: Optional[int] = None
    phi: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind is ModelKind.SYNCHRONOUS:
            object.__setattr__(self, "gst", 0)
            if self.delta is None:
                object.__setattr__(self, "delta", 1)
            if self.phi is None:
                object.__setattr__(self, "phi", 2)
        elif self.kind is ModelKind.GST:
            if self.gst is None or self.delta is None or self.phi is None:
                raise ParamMismatch("GST model requires gst, delta, and phi")
        if self.delta is not None and self.delta <= 0:
            raise ParamMismatch("delta must be a positive number of ticks")
        if self.phi is not None and self.phi <= 0:
            raise ParamMismatch("phi must be a positive number of ticks")

    @classmethod
    def asynchronous(cls) -> "ModelParams":
        return cls(kind=ModelKind.ASYNC)

    @classmethod
    def synchronous(cls, delta: int = 1, phi: int = 2) -> "ModelParams":
        return cls(kind=ModelKind.SYNCHRONOUS, delta=delta, phi=phi)

    @classmethod
    def gst_model(cls, gst: int, delta: int = 1, phi: int = 2) -> "ModelParams":
        return cls(kind=ModelKind.GST, gst=gst, delta=delta, phi=phi)

    @property
    def c_p_note(self) -> Optional[dict[str, int]]:
        if self.kind is ModelKind.SYNCHRONOUS:
            return {"c": 1, "p": 1}
        return None


class AdmissibilityVerdict(Enum):
    VIOLATED = "violated"
    COMPLIANT_SO_FAR = "compliant-so-far"


@dataclass(frozen=True, slots=True)
class AdmissibilityReport:
    verdict: AdmissibilityVerdict
    violations: tuple[tuple[int, str], ...]
    open_obligations: tuple[str, ...]

    @property
    def violated(self) -> bool:
        return self.verdict is AdmissibilityVerdict.VIOLATED


RULE_CRASHED_ACTOR = "crashed-actor"
RULE_STEP_WINDOW = "step-window"
RULE_DELIVERY_DEADLINE = "delivery-deadline"


def _delivery_step(prefix: ExecutionPrefix, tag: int) -> Optional[int]:
    for i, directive in enumerate(prefix.schedule):
        if tag in directive.deliver:
            return i
    return None


def check_admissible(prefix: ExecutionPrefix, params: ModelParams) -> AdmissibilityReport:
    """Check a prefix against a model's safety clauses.

    Asynchronous: only steps by crashed actors are violations; eventual
    delivery and infinitely-many-steps are recorded as open obligations.
    Synchronous / GST: additionally, from the stabilization index on, every
    process not crashed before a window's end must step in every complete
    window of ``phi`` ticks, and every message must be delivered within
    ``delta`` ticks of sending (messages sent before stabilization by
    ``gst + delta``) whenever the receiver survives past that deadline.
    """
    pattern = prefix.failure_context.pattern
    horizon = prefix.horizon
    violations: set[tuple[int, str]] = set()

    for i, directive in enumerate(prefix.schedule):
        if pattern.crashed_at(directive.actor, i):
            violations.add((i, RULE_CRASHED_ACTOR))

    if params.kind in (ModelKind.SYNCHRONOUS, ModelKind.GST):
        start = params.gst
        delta = params.delta
        phi = params.phi
        if start is None or delta is None or phi is None:
            raise ParamMismatch(f"{params.kind.value} model requires gst/delta/phi")

        steps = {p: set(prefix.steps_of(p)) for p in PROCESSES}
        for w in range(max(start, 0), horizon - phi + 1):
            window = range(w, w + phi)
            for p in PROCESSES:
                ct = pattern.crash_time_of(p)
                obliged = ct is None or ct >= w + phi
                if obliged and not any(i in steps[p] for i in window):
                    violations.add((w + phi - 1, RULE_STEP_WINDOW))

        for outcome in prefix.outcomes:
            for message in outcome.messages_sent:
                deadline = max(message.sent_at, start) + delta
                receiver_ct = pattern.crash_time_of(message.receiver)
                if receiver_ct is not None and receiver_ct <= deadline:
                    continue
                delivered = _delivery_step(prefix, message.unique_tag)
                late = delivered is None or delivered > deadline
                if late and deadline + 1 <= horizon:
                    violations.add((deadline + 1, RULE_DELIVERY_DEADLINE))

    obligations: list[str] = []
    for p in PROCESSES:
        for message in prefix.final.buffer_of(p):
            if not pattern.faulty(p):
                obligations.append(f"pending-delivery:tag={message.unique_tag}->{p.value}")
    for p in PROCESSES:
        if not pattern.faulty(p):
            obligations.append(f"further-steps:{p.value}")

    ordered = tuple(sorted(violations))
    verdict = AdmissibilityVerdict.VIOLATED if ordered else AdmissibilityVerdict.COMPLIANT_SO_FAR
    return AdmissibilityReport(
        verdict=verdict, violations=ordered, open_obligations=tuple(obligations)
    )


PERFECT_FD_DOMAIN = "perfect-fd"


def perfect_fd_history(pattern: FailurePattern, horizon: int) -> FDHistory:
    """The perfect failure detector: suspects exactly the crashed set F(t).

    No process is suspected before its crash time and every crashed process
    is suspected from its crash time on, for every querier.
    """
    entries = tuple(
        (p, t, pattern.crashed_set(t)) for p in PROCESSES for t in range(horizon + 1)
    )
    return FDHistory(domain_name=PERFECT_FD_DOMAIN, entries=entries)


def fd_history_consistent(
    pattern_a: FailurePattern,
    history_a: FDHistory,
    pattern_b: FailurePattern,
    history_b: FDHistory,
) -> bool:
    """A failure detector may depend only on the failure pattern: equal
    patterns must be served by equal histories."""
    if history_a.domain_name != history_b.domain_name:
        raise DomainMismatch(
            f"{history_a.domain_name!r} vs {history_b.domain_name!r}"
        )
    if pattern_a != pattern_b:
        return True
    return history_a.entries == history_b.entries
