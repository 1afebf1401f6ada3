"""The strongly dependent decision problem: property checkers, the
synchronous solver, and the candidate algorithms used by the adversarial
harnesses.

The destination must output the source's input bit unless the source
crashed initially.  "Initially crashed" has two readings and both are
implemented: by the failure pattern (crashed at every time, i.e. crash time
zero) or by step activity (the source takes no step at all).  Under the
step-activity reading a source that merely has not stepped yet, and is not
crashed, leaves Validity pending rather than decided.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Mapping, Optional

from .kernel import (
    AlgorithmSpec,
    ExecutionPrefix,
    LocalState,
    MessageRecord,
    ProcessId,
    bit_payload,
    decision_time,
    payload_bit,
)
from .models import ModelParams
from .topology import Classification, MonitorVerdict, PropertyMonitor


class MissingInput(Exception):
    pass


class InitialCrashInterpretation(Enum):
    BY_FAILURE_PATTERN = "failure-pattern"
    BY_STEP_ACTIVITY = "step-activity"


class IntegrityStatus(Enum):
    HOLDS = "holds"
    VIOLATED = "violated"


class ValidityStatus(Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    VACUOUSLY_HOLDS = "vacuous"
    PENDING = "pending"


class TerminationStatus(Enum):
    DECIDED = "decided"
    PENDING = "pending"


@dataclass(frozen=True, slots=True)
class SDDVerdict:
    integrity: IntegrityStatus
    integrity_index: Optional[int]
    validity: ValidityStatus
    validity_index: Optional[int]
    termination: TerminationStatus
    decision_index: Optional[int]

    @property
    def has_safety_violation(self) -> bool:
        return (
            self.integrity is IntegrityStatus.VIOLATED
            or self.validity is ValidityStatus.VIOLATED
        )

    def label(self) -> str:
        return (
            f"integrity={self.integrity.value}"
            f",validity={self.validity.value}"
            f",termination={self.termination.value}"
        )


def initially_crashed(
    prefix: ExecutionPrefix, interpretation: InitialCrashInterpretation
) -> Optional[bool]:
    """Whether the source counts as initially crashed; None when the
    step-activity reading cannot be settled at this horizon (the source has
    not stepped yet but is not crashed either)."""
    pattern = prefix.failure_context.pattern
    if interpretation is InitialCrashInterpretation.BY_FAILURE_PATTERN:
        return pattern.crash_time_of(ProcessId.SOURCE) == 0
    if prefix.steps_of(ProcessId.SOURCE):
        return False
    if pattern.faulty(ProcessId.SOURCE):
        return True
    return None


def check_sdd(
    prefix: ExecutionPrefix, interpretation: InitialCrashInterpretation
) -> SDDVerdict:
    """Integrity, Validity, and Termination verdicts for one prefix.

    Termination Pending is finite-horizon honesty, not a refutation; a
    refutation additionally requires an exhausted extension search (see the
    harnesses).
    """
    initial = prefix.configurations[0]
    input_value = initial.state_of(ProcessId.SOURCE).input_value
    if input_value is None:
        raise MissingInput("source input missing in the initial configuration")

    integrity = IntegrityStatus.HOLDS
    integrity_index = None
    for k, config in enumerate(prefix.configurations):
        if config.state_of(ProcessId.DEST).decided_count > 1:
            integrity = IntegrityStatus.VIOLATED
            integrity_index = k
            break

    decided_at = decision_time(prefix)
    decision = (
        None
        if decided_at is None
        else prefix.configurations[decided_at].state_of(ProcessId.DEST).decision
    )

    crashed_initially = initially_crashed(prefix, interpretation)
    if crashed_initially is True:
        validity = ValidityStatus.VACUOUSLY_HOLDS
        validity_index = None
    elif decided_at is None:
        validity = ValidityStatus.PENDING
        validity_index = None
    elif decision == input_value:
        validity = ValidityStatus.HOLDS
        validity_index = decided_at
    elif crashed_initially is False:
        validity = ValidityStatus.VIOLATED
        validity_index = decided_at
    else:
        validity = ValidityStatus.PENDING
        validity_index = None

    if decided_at is None:
        termination = TerminationStatus.PENDING
    else:
        termination = TerminationStatus.DECIDED
    return SDDVerdict(
        integrity=integrity,
        integrity_index=integrity_index,
        validity=validity,
        validity_index=validity_index,
        termination=termination,
        decision_index=decided_at,
    )


# ---------------------------------------------------------------------------
# Algorithms
# ---------------------------------------------------------------------------


def _source_sends_input_once(state: LocalState) -> LocalState:
    """Shared source behaviour: send the input bit in the first step, then
    take only trivial steps (the single-message normal form for the source)."""
    if state.algorithm_memory is None:
        return state.with_memory("sent").sending(bit_payload(state.input_value))
    return state


def make_c1_decider() -> AlgorithmSpec:
    """The minimal normal-form algorithm: the destination waits trivially and
    decides the received bit on first delivery.  It never decides without a
    message, so it solves nothing on its own; it is the canonical subject for
    the unbounded-decision-time and mirrored-schedule constructions."""

    def transition(
        state: LocalState, delivered: tuple[MessageRecord, ...], fd_value: Any
    ) -> LocalState:
        if state.process is ProcessId.SOURCE:
            return _source_sends_input_once(state)
        if state.decision is None and delivered:
            return state.deciding(payload_bit(delivered[0].payload))
        return state

    return AlgorithmSpec(name="c1-decider", transition=transition)


def make_timeout_decider(timeout_steps: int, name: str = "timeout-decider") -> AlgorithmSpec:
    """Decide the received bit on delivery, or default to 0 at the
    destination's ``timeout_steps``-th own step.

    The destination counts its own steps (it has no global clock), so its
    waiting steps are non-trivial until it decides; after deciding it
    freezes.  Sound only in models whose admissibility bounds how late a
    live source's message can arrive; under eventual synchrony it is the
    standard strawman the impossibility harnesses break.
    """
    if timeout_steps < 1:
        raise ValueError("timeout_steps must be at least 1")

    def init_memory(process: ProcessId, input_value: Optional[int]) -> Any:
        return None if process is ProcessId.SOURCE else 0

    def transition(
        state: LocalState, delivered: tuple[MessageRecord, ...], fd_value: Any
    ) -> LocalState:
        if state.process is ProcessId.SOURCE:
            return _source_sends_input_once(state)
        if state.decision is not None:
            return state
        taken = state.algorithm_memory + 1
        state = state.with_memory(taken)
        if delivered:
            return state.deciding(payload_bit(delivered[0].payload))
        if taken >= timeout_steps:
            return state.deciding(0)
        return state

    return AlgorithmSpec(name=name, transition=transition, init_memory=init_memory)


def solver_deadline_steps(params: ModelParams) -> int:
    """Destination step count after which a missing message proves the source
    never stepped, under the synchronous bounds.

    A live source must step within the first window of ``phi`` ticks, so its
    message is delivered at a step index <= (phi - 1) + delta; the
    destination's n-th step sits at index >= n - 1, so n = delta + phi + 1
    is the first own-step count guaranteed to lie past that deadline.
    """
    return params.delta + params.phi + 1


def sync_sdd_solver(params: Optional[ModelParams] = None) -> AlgorithmSpec:
    """The synchronous-model solver: forward the input bit, decide it on
    delivery, and default to 0 once the synchronous deadline proves the
    source took no step (treating it as initially crashed)."""
    if params is None:
        params = ModelParams.synchronous()
    return make_timeout_decider(solver_deadline_steps(params), name="sync-solver")


def make_fd_suspicion_decider() -> AlgorithmSpec:
    """Decide the received bit on delivery; decide the default 0 as soon as
    the failure detector suspects the source.  Waiting steps are trivial.

    The detector value is read as a set of suspected processes (the perfect
    detector's domain); any pattern-consistent history table can be swapped
    in underneath."""

    def transition(
        state: LocalState, delivered: tuple[MessageRecord, ...], fd_value: Any
    ) -> LocalState:
        if state.process is ProcessId.SOURCE:
            return _source_sends_input_once(state)
        if state.decision is not None:
            return state
        if delivered:
            return state.deciding(payload_bit(delivered[0].payload))
        if fd_value and ProcessId.SOURCE in fd_value:
            return state.deciding(0)
        return state

    return AlgorithmSpec(name="fd-suspicion-decider", transition=transition)


def make_chatty_sender() -> AlgorithmSpec:
    """A deliberately non-normal-form algorithm: the source re-sends its
    input bit at every step.  Used to exercise the normal-form transform."""

    def transition(
        state: LocalState, delivered: tuple[MessageRecord, ...], fd_value: Any
    ) -> LocalState:
        if state.process is ProcessId.SOURCE:
            return state.sending(bit_payload(state.input_value))
        if state.decision is None and delivered:
            return state.deciding(payload_bit(delivered[0].payload))
        return state

    return AlgorithmSpec(name="chatty-sender", transition=transition)


ALGORITHM_REGISTRY: dict[str, Callable[[Mapping[str, Any]], AlgorithmSpec]] = {
    "sync-solver": lambda opts: sync_sdd_solver(
        ModelParams.synchronous(
            delta=int(opts.get("delta", 1)), phi=int(opts.get("phi", 2))
        )
    ),
    "c1-decider": lambda opts: make_c1_decider(),
    "timeout-decider": lambda opts: make_timeout_decider(
        int(opts.get("timeout_steps", 4))
    ),
    "fd-suspicion-decider": lambda opts: make_fd_suspicion_decider(),
    "chatty-sender": lambda opts: make_chatty_sender(),
}


def algorithm_from_registry(name: str, options: Optional[Mapping[str, Any]] = None) -> AlgorithmSpec:
    try:
        factory = ALGORITHM_REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown algorithm {name!r}; known: {sorted(ALGORITHM_REGISTRY)}"
        ) from None
    return factory(options or {})


# ---------------------------------------------------------------------------
# Property monitors
# ---------------------------------------------------------------------------


def integrity_monitor() -> PropertyMonitor:
    def classify(prefix: ExecutionPrefix) -> Classification:
        verdict = check_sdd(prefix, InitialCrashInterpretation.BY_STEP_ACTIVITY)
        if verdict.integrity is IntegrityStatus.VIOLATED:
            return Classification(MonitorVerdict.VIOLATED, verdict.integrity_index)
        return Classification(MonitorVerdict.PENDING)

    return PropertyMonitor(name="integrity", classify=classify)


def validity_monitor(
    interpretation: InitialCrashInterpretation = InitialCrashInterpretation.BY_STEP_ACTIVITY,
) -> PropertyMonitor:
    def classify(prefix: ExecutionPrefix) -> Classification:
        verdict = check_sdd(prefix, interpretation)
        if verdict.validity is ValidityStatus.VIOLATED:
            return Classification(MonitorVerdict.VIOLATED, verdict.validity_index)
        if verdict.validity is ValidityStatus.PENDING:
            return Classification(MonitorVerdict.PENDING)
        return Classification(MonitorVerdict.SATISFIED, verdict.validity_index)

    return PropertyMonitor(name=f"validity[{interpretation.value}]", classify=classify)


def termination_monitor() -> PropertyMonitor:
    def classify(prefix: ExecutionPrefix) -> Classification:
        decided_at = decision_time(prefix)
        if decided_at is None:
            return Classification(MonitorVerdict.PENDING)
        return Classification(MonitorVerdict.SATISFIED, decided_at)

    return PropertyMonitor(name="termination", classify=classify)
