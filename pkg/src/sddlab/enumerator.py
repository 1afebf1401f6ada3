"""Exhaustive small-horizon schedule enumeration.

This is the brute-force oracle behind the solver verification and the
derived expectations elsewhere in the test suite: it generates every
admissible schedule (actor choice x delivery subset x crash pattern within
the configured bounds), runs each, and aggregates the problem verdicts.
Pruning mirrors the admissibility checker exactly; every emitted prefix is
re-verified against it, so the explored count equals the admissible count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Optional

from .kernel import (
    AlgorithmSpec,
    ExecutionPrefix,
    ProcessId,
    Provenance,
    StepDirective,
    apply_step,
    initial_configuration,
    PROCESSES,
)
from .models import (
    FailureContext,
    FailurePattern,
    ModelKind,
    ModelParams,
    check_admissible,
)
from .sdd import InitialCrashInterpretation, SDDVerdict, check_sdd


class BudgetExceeded(Exception):
    def __init__(self, explored: int, budget: int):
        super().__init__(
            f"enumeration exceeded the budget of {budget} schedules "
            f"(aborted after {explored})"
        )
        self.explored = explored
        self.budget = budget


def sweep_patterns(horizon: int) -> tuple[FailurePattern, ...]:
    """All crash patterns with crash times in {none, 0..horizon}."""
    times: list[Optional[int]] = [None] + list(range(horizon + 1))
    return tuple(
        FailurePattern.of(source=s, dest=d) for s in times for d in times
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """One enumeration scenario; ``patterns`` already expands the config
    file's failure description (explicit times or a full sweep)."""

    algorithm: AlgorithmSpec
    input_bit: int
    params: ModelParams
    horizon: int
    patterns: tuple[FailurePattern, ...]
    interpretation: InitialCrashInterpretation = (
        InitialCrashInterpretation.BY_STEP_ACTIVITY
    )
    budget: int = 500_000
    seed: int = 0
    algorithm_name: Optional[str] = None
    algorithm_options: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")


@dataclass(frozen=True)
class Counterexample:
    ordinal: int
    pattern: FailurePattern
    prefix: ExecutionPrefix
    verdict: SDDVerdict


@dataclass(frozen=True)
class EnumerationSummary:
    schedules_explored: int
    verdict_histogram: dict[str, int]
    counterexamples: tuple[Counterexample, ...]

    def document(self) -> dict:
        return {
            "schedules_explored": self.schedules_explored,
            "verdict_histogram": dict(sorted(self.verdict_histogram.items())),
            "counterexamples": [
                {
                    "ordinal": c.ordinal,
                    "trace": f"counterexample-{c.ordinal:04d}",
                    "pattern": {
                        "source": c.pattern.crash_time_of(ProcessId.SOURCE),
                        "dest": c.pattern.crash_time_of(ProcessId.DEST),
                    },
                    "verdict": c.verdict.label(),
                }
                for c in self.counterexamples
            ],
        }


def admissible_prefixes(
    algorithm: AlgorithmSpec,
    input_bit: int,
    params: ModelParams,
    pattern: FailurePattern,
    horizon: int,
) -> Iterator[ExecutionPrefix]:
    """Depth-first enumeration of every admissible schedule for one crash
    pattern, in canonical order (actor index first, then delivery subsets in
    ascending tag-mask order)."""
    context = FailureContext(pattern=pattern)
    inputs = {ProcessId.SOURCE: input_bit, ProcessId.DEST: None}
    timed = params.kind in (ModelKind.SYNCHRONOUS, ModelKind.GST)
    start = params.gst if timed else None
    delta = params.delta if timed else None
    phi = params.phi if timed else None

    root = initial_configuration(algorithm, inputs)

    def recurse(
        config,
        directives: list[StepDirective],
        outcomes: list,
        configs: list,
        last_step: dict[ProcessId, int],
        pending: dict[int, tuple[ProcessId, int]],
    ) -> Iterator[tuple[tuple[StepDirective, ...], tuple, tuple]]:
        i = len(directives)
        if i == horizon:
            yield tuple(directives), tuple(configs), tuple(outcomes)
            return
        for actor in PROCESSES:
            if pattern.crashed_at(actor, i):
                continue
            tags = sorted(m.unique_tag for m in config.buffer_of(actor))
            for mask in range(1 << len(tags)):
                deliver = frozenset(t for b, t in enumerate(tags) if mask >> b & 1)
                directive = StepDirective(actor=actor, deliver=deliver)
                next_config, outcome = apply_step(config, directive, algorithm, context)

                new_pending = dict(pending)
                for tag in deliver:
                    new_pending.pop(tag, None)
                if timed:
                    for message in outcome.messages_sent:
                        deadline = max(message.sent_at, start) + delta
                        receiver_ct = pattern.crash_time_of(message.receiver)
                        if receiver_ct is None or receiver_ct > deadline:
                            new_pending[message.unique_tag] = (
                                message.receiver,
                                deadline,
                            )
                    if any(deadline <= i for _, deadline in new_pending.values()):
                        continue
                    window_start = i + 1 - phi
                    if window_start >= start and window_start >= 0:
                        missed = False
                        for p in PROCESSES:
                            ct = pattern.crash_time_of(p)
                            obliged = ct is None or ct >= i + 1
                            stepped = (
                                i if p is actor else last_step[p]
                            ) >= window_start
                            if obliged and not stepped:
                                missed = True
                                break
                        if missed:
                            continue
                else:
                    for message in outcome.messages_sent:
                        new_pending[message.unique_tag] = (message.receiver, -1)

                new_last = dict(last_step)
                new_last[actor] = i
                directives.append(directive)
                configs.append(next_config)
                outcomes.append(outcome)
                yield from recurse(
                    next_config, directives, outcomes, configs, new_last, new_pending
                )
                directives.pop()
                configs.pop()
                outcomes.pop()

    for schedule, configs, outcomes in recurse(
        root, [], [], [root], {p: -1 for p in PROCESSES}, {}
    ):
        prefix = ExecutionPrefix(
            configurations=configs,
            schedule=schedule,
            outcomes=outcomes,
            failure_context=context,
            provenance=Provenance(
                algorithm=algorithm.name,
                inputs=(input_bit, None),
                schedule=schedule,
                context=context,
            ),
        )
        if check_admissible(prefix, params).violated:
            raise AssertionError("pruning admitted an inadmissible schedule")
        yield prefix


def _is_counterexample(
    verdict: SDDVerdict, pattern: FailurePattern
) -> bool:
    from .sdd import IntegrityStatus, TerminationStatus, ValidityStatus

    if verdict.integrity is IntegrityStatus.VIOLATED:
        return True
    if verdict.validity is ValidityStatus.VIOLATED:
        return True
    dest_correct = pattern.crash_time_of(ProcessId.DEST) is None
    return dest_correct and verdict.termination is TerminationStatus.PENDING


def _canonical_key(prefix: ExecutionPrefix, pattern: FailurePattern):
    actors = tuple(d.actor.idx for d in prefix.schedule)
    deliveries = tuple(tuple(sorted(d.deliver)) for d in prefix.schedule)
    crashes = tuple(
        (ct is None, -1 if ct is None else ct) for ct in pattern.crash_times
    )
    return (actors, deliveries, crashes)


def enumerate_schedules(config: ScenarioConfig) -> EnumerationSummary:
    """Run every admissible schedule in the scenario and aggregate verdicts.

    Counterexamples (Integrity or Validity violations, or a correct
    destination left undecided) are numbered in the canonical order, which
    is stable across runs by construction.
    """
    explored = 0
    histogram: dict[str, int] = {}
    raw: list[tuple[tuple, FailurePattern, ExecutionPrefix, SDDVerdict]] = []
    for pattern in config.patterns:
        for prefix in admissible_prefixes(
            config.algorithm, config.input_bit, config.params, pattern, config.horizon
        ):
            explored += 1
            if explored > config.budget:
                raise BudgetExceeded(explored, config.budget)
            verdict = check_sdd(prefix, config.interpretation)
            label = verdict.label()
            histogram[label] = histogram.get(label, 0) + 1
            if _is_counterexample(verdict, pattern):
                raw.append((_canonical_key(prefix, pattern), pattern, prefix, verdict))

    raw.sort(key=lambda item: item[0])
    counterexamples = tuple(
        Counterexample(ordinal=n, pattern=pattern, prefix=prefix, verdict=verdict)
        for n, (_, pattern, prefix, verdict) in enumerate(raw)
    )
    return EnumerationSummary(
        schedules_explored=explored,
        verdict_histogram=histogram,
        counterexamples=counterexamples,
    )
