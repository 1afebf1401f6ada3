"""Deterministic two-process execution engine.

Algorithms are deterministic state machines driven by an adversarial
schedule: at every index exactly one process takes a step, consuming a
chosen subset of its message buffer and (optionally) a failure-detector
value.  Runs are pure functions of their arguments, so executions can be
replayed, diffed, and enumerated exhaustively.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Mapping, Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from .models import FailureContext


class ProcessId(Enum):
    """The two processes: the input-holding source and the deciding destination."""

    SOURCE = "source"
    DEST = "dest"

    @property
    def idx(self) -> int:
        return 0 if self is ProcessId.SOURCE else 1

    @property
    def other(self) -> "ProcessId":
        return ProcessId.DEST if self is ProcessId.SOURCE else ProcessId.SOURCE


PROCESSES = (ProcessId.SOURCE, ProcessId.DEST)

# Message tags are (send index, ordinal-within-step) packed into one integer,
# so replays allocate identical tags without any hidden counter state.
TAG_STRIDE = 1 << 16


def bit_payload(bit: int) -> bytes:
    """Single-byte encoding of a decision bit."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return b"1" if bit else b"0"


def payload_bit(payload: bytes) -> int:
    if payload == b"0":
        return 0
    if payload == b"1":
        return 1
    raise ValueError(f"payload {payload!r} does not encode a bit")


class KernelError(Exception):
    """Base class for step/run failures; carries the failing step index."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message if index is None else f"{message} (at step index {index})")
        self.index = index


class DeliveryNotInBuffer(KernelError):
    pass


class ActorCrashed(KernelError):
    pass


@dataclass(frozen=True, slots=True)
class MessageRecord:
    """One message in flight; unique_tag disambiguates identical payloads."""

    sender: ProcessId
    receiver: ProcessId
    payload: bytes
    sent_at: int
    unique_tag: int

    def __post_init__(self) -> None:
        if self.sender is self.receiver:
            raise ValueError("a process cannot send to itself")


@dataclass(frozen=True, slots=True)
class LocalState:
    """Per-process state.

    ``algorithm_memory`` is opaque to the kernel.  ``decided_count`` counts
    decision events (not distinct values), so re-deciding the same value is
    still observable.  ``outbox`` holds payloads emitted by the transition;
    the kernel drains it when materialising the step, so stored
    configurations always carry an empty outbox and a send step can be
    followed by genuinely trivial steps.
    """

    process: ProcessId
    algorithm_memory: Any = None
    input_value: Optional[int] = None
    decision: Optional[int] = None
    decided_count: int = 0
    outbox: tuple[bytes, ...] = ()

    def with_memory(self, memory: Any) -> "LocalState":
        return replace(self, algorithm_memory=memory)

    def deciding(self, value: int) -> "LocalState":
        """Record a decision event (increments decided_count)."""
        return replace(self, decision=value, decided_count=self.decided_count + 1)

    def sending(self, *payloads: bytes) -> "LocalState":
        return replace(self, outbox=self.outbox + tuple(payloads))

    def drained(self) -> "LocalState":
        return replace(self, outbox=()) if self.outbox else self


@dataclass(frozen=True, slots=True)
class Configuration:
    """Global snapshot: both local states plus both message buffers.

    ``index`` is positional metadata and excluded from equality, matching
    the trivial-step stutter rule (a trivial step repeats the configuration
    verbatim at the next index).
    """

    states: tuple[LocalState, LocalState]
    buffers: tuple[tuple[MessageRecord, ...], tuple[MessageRecord, ...]]
    index: int = field(compare=False)

    def state_of(self, process: ProcessId) -> LocalState:
        return self.states[process.idx]

    def buffer_of(self, process: ProcessId) -> tuple[MessageRecord, ...]:
        return self.buffers[process.idx]


class StepKind(Enum):
    SEND = "send"
    RECEIVE = "receive"
    SEND_RECEIVE = "send-receive"
    LOCAL = "local"


@dataclass(frozen=True, slots=True)
class StepDirective:
    """One scheduler decision: who steps, which buffered tags it consumes,
    and an optional explicit failure-detector value (normally injected from
    the failure context's history instead)."""

    actor: ProcessId
    deliver: frozenset[int] = frozenset()
    fd_value: Any = None


@dataclass(frozen=True, slots=True)
class StepOutcome:
    kind: StepKind
    trivial: bool
    messages_sent: tuple[MessageRecord, ...]


def _default_emit(state: LocalState) -> tuple[bytes, ...]:
    return state.outbox


def _default_init_memory(process: ProcessId, input_value: Optional[int]) -> Any:
    return None


@dataclass(frozen=True)
class AlgorithmSpec:
    """A deterministic state machine plus its message sending function.

    ``transition`` maps (state, delivered messages sorted by tag, fd value)
    to the successor state; ``emit`` is evaluated exactly once per step on
    the post-transition state and yields the outbound payloads.  The default
    emit reads the state's outbox, which the kernel then drains.
    """

    name: str
    transition: Callable[[LocalState, tuple[MessageRecord, ...], Any], LocalState]
    emit: Callable[[LocalState], tuple[bytes, ...]] = _default_emit
    init_memory: Callable[[ProcessId, Optional[int]], Any] = _default_init_memory


@dataclass(frozen=True)
class Provenance:
    """Generation tuple of a run; equality is what licenses an exact
    zero distance between two finite prefixes."""

    algorithm: str
    inputs: tuple[Optional[int], Optional[int]]
    schedule: tuple[StepDirective, ...]
    context: Any


@dataclass(frozen=True)
class ExecutionPrefix:
    """Finite prefix C_0..C_L of an execution plus the schedule producing it."""

    configurations: tuple[Configuration, ...]
    schedule: tuple[StepDirective, ...]
    outcomes: tuple[StepOutcome, ...]
    failure_context: "FailureContext"
    provenance: Optional[Provenance] = None

    @property
    def horizon(self) -> int:
        return len(self.schedule)

    @property
    def final(self) -> Configuration:
        return self.configurations[-1]

    def input_of(self, process: ProcessId) -> Optional[int]:
        return self.configurations[0].state_of(process).input_value

    def steps_of(self, process: ProcessId) -> tuple[int, ...]:
        return tuple(i for i, d in enumerate(self.schedule) if d.actor is process)


def initial_configuration(
    algorithm: AlgorithmSpec, inputs: Mapping[ProcessId, Optional[int]]
) -> Configuration:
    states = tuple(
        LocalState(
            process=p,
            algorithm_memory=algorithm.init_memory(p, inputs.get(p)),
            input_value=inputs.get(p),
        )
        for p in PROCESSES
    )
    return Configuration(states=states, buffers=((), ()), index=0)


def apply_step(
    config: Configuration,
    directive: StepDirective,
    algorithm: AlgorithmSpec,
    failure_context: Optional["FailureContext"] = None,
) -> tuple[Configuration, StepOutcome]:
    """Apply one step of ``directive.actor`` to ``config``.

    Delivered messages are removed from the actor's buffer; emitted payloads
    are stamped ``sent_at = config.index`` and appended to the peer's buffer.
    The step is trivial iff the resulting configuration equals ``config``.
    """
    actor = directive.actor
    index = config.index
    if failure_context is not None and failure_context.crashed_at(actor, index):
        raise ActorCrashed(f"{actor.value} is crashed and cannot step", index)

    buffer = config.buffer_of(actor)
    by_tag = {m.unique_tag: m for m in buffer}
    missing = directive.deliver - by_tag.keys()
    if missing:
        raise DeliveryNotInBuffer(
            f"tags {sorted(missing)} not in {actor.value}'s buffer", index
        )
    delivered = tuple(by_tag[t] for t in sorted(directive.deliver))

    fd_value = directive.fd_value
    if fd_value is None and failure_context is not None:
        fd_value = failure_context.fd_value(actor, index)

    old_state = config.state_of(actor)
    new_state = algorithm.transition(old_state, delivered, fd_value)
    if new_state.process is not actor:
        raise KernelError("transition changed the owning process", index)
    if new_state.input_value != old_state.input_value:
        raise KernelError("transition mutated the immutable input value", index)

    payloads = tuple(sorted(algorithm.emit(new_state)))
    sent = tuple(
        MessageRecord(
            sender=actor,
            receiver=actor.other,
            payload=payload,
            sent_at=index,
            unique_tag=index * TAG_STRIDE + ordinal,
        )
        for ordinal, payload in enumerate(payloads)
    )
    if len(sent) >= TAG_STRIDE:
        raise KernelError("emit produced too many messages for tag allocation", index)
    new_state = new_state.drained()

    remaining = tuple(m for m in buffer if m.unique_tag not in directive.deliver)
    new_states = list(config.states)
    new_states[actor.idx] = new_state
    new_buffers = list(config.buffers)
    new_buffers[actor.idx] = remaining
    new_buffers[actor.other.idx] = config.buffer_of(actor.other) + sent

    next_config = Configuration(
        states=tuple(new_states), buffers=tuple(new_buffers), index=index + 1
    )

    if sent and delivered:
        kind = StepKind.SEND_RECEIVE
    elif sent:
        kind = StepKind.SEND
    elif delivered:
        kind = StepKind.RECEIVE
    else:
        kind = StepKind.LOCAL
    trivial = next_config == config
    return next_config, StepOutcome(kind=kind, trivial=trivial, messages_sent=sent)


def run(
    algorithm: AlgorithmSpec,
    inputs: Mapping[ProcessId, Optional[int]],
    schedule: tuple[StepDirective, ...] | list[StepDirective],
    failure_context: Optional["FailureContext"] = None,
) -> ExecutionPrefix:
    """Run ``algorithm`` under ``schedule`` from the initial configuration.

    Deterministic: equal arguments produce equal prefixes, and the returned
    prefix carries the generation tuple as provenance.
    """
    if failure_context is None:
        from .models import FailureContext

        failure_context = FailureContext.none()
    schedule = tuple(schedule)
    configs = [initial_configuration(algorithm, inputs)]
    outcomes = []
    for directive in schedule:
        config, outcome = apply_step(configs[-1], directive, algorithm, failure_context)
        configs.append(config)
        outcomes.append(outcome)
    provenance = Provenance(
        algorithm=algorithm.name,
        inputs=tuple(inputs.get(p) for p in PROCESSES),
        schedule=schedule,
        context=failure_context,
    )
    return ExecutionPrefix(
        configurations=tuple(configs),
        schedule=schedule,
        outcomes=tuple(outcomes),
        failure_context=failure_context,
        provenance=provenance,
    )


def extend_prefix(
    prefix: ExecutionPrefix, directive: StepDirective, algorithm: AlgorithmSpec
) -> ExecutionPrefix:
    """Append one step to a prefix (used by extension searches)."""
    config, outcome = apply_step(prefix.final, directive, algorithm, prefix.failure_context)
    provenance = prefix.provenance
    if provenance is not None:
        provenance = replace(provenance, schedule=provenance.schedule + (directive,))
    return ExecutionPrefix(
        configurations=prefix.configurations + (config,),
        schedule=prefix.schedule + (directive,),
        outcomes=prefix.outcomes + (outcome,),
        failure_context=prefix.failure_context,
        provenance=provenance,
    )


def decision_time(prefix: ExecutionPrefix) -> Optional[int]:
    """Least k such that the destination has decided in C_k but not in C_{k-1}
    (k = 0 counts as decided in the initial configuration)."""
    for k, config in enumerate(prefix.configurations):
        if config.state_of(ProcessId.DEST).decision is not None:
            return k
    return None


@dataclass(frozen=True, slots=True)
class C1Report:
    compliant: bool
    violation_index: Optional[int] = None
    reason: Optional[str] = None


def is_c1_compliant(prefix: ExecutionPrefix) -> C1Report:
    """Check the single-message normal form on a prefix.

    Clauses: (a) the destination decides no later than the step in which it
    first receives a source message, (b) destination steps after its
    decision are trivial, (c) source steps after its first send are trivial,
    (d) the source's first step, if any, sends.  Reports the earliest
    violating step index.
    """
    violations: list[tuple[int, str]] = []
    decided_at = decision_time(prefix)
    source_sent = False
    source_stepped = False
    for i, (directive, outcome) in enumerate(zip(prefix.schedule, prefix.outcomes)):
        if directive.actor is ProcessId.SOURCE:
            if not source_stepped:
                source_stepped = True
                if not outcome.messages_sent:
                    violations.append((i, "source first step is not a send"))
            elif source_sent and not outcome.trivial:
                violations.append((i, "source non-trivial step after its send"))
            if outcome.messages_sent:
                source_sent = True
        else:
            received_from_source = any(
                m.sender is ProcessId.SOURCE
                for m in prefix.configurations[i].buffer_of(ProcessId.DEST)
                if m.unique_tag in directive.deliver
            )
            if received_from_source and (decided_at is None or decided_at > i + 1):
                violations.append((i, "destination received without deciding"))
            if decided_at is not None and i >= decided_at and not outcome.trivial:
                violations.append((i, "destination non-trivial step after deciding"))
    if not violations:
        return C1Report(compliant=True)
    index, reason = min(violations)
    return C1Report(compliant=False, violation_index=index, reason=reason)


def c1_transform(algorithm: AlgorithmSpec) -> AlgorithmSpec:
    """Rewrite an algorithm into the single-message normal form.

    The result sends the source's input bit in the source's first step and
    is identity afterwards; the destination decides the received bit on its
    first delivery and is identity afterwards.  Every run of the result
    satisfies :func:`is_c1_compliant`.
    """

    def transition(
        state: LocalState, delivered: tuple[MessageRecord, ...], fd_value: Any
    ) -> LocalState:
        if state.process is ProcessId.SOURCE:
            if state.algorithm_memory is None:
                return state.with_memory("sent").sending(bit_payload(state.input_value))
            return state
        if state.decision is None and delivered:
            return state.deciding(payload_bit(delivered[0].payload))
        return state

    return AlgorithmSpec(name=f"c1<{algorithm.name}>", transition=transition)
