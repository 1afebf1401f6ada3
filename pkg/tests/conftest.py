"""Shared builders for the test suite: deterministic scenario prefixes,
seeded random prefixes, and deliberately broken algorithms."""

from __future__ import annotations

import random
from typing import Optional

import pytest

from sddlab.kernel import (
    AlgorithmSpec,
    ExecutionPrefix,
    LocalState,
    ProcessId,
    StepDirective,
    apply_step,
    initial_configuration,
    run,
)
from sddlab.models import FailureContext, FailurePattern
from sddlab.sdd import make_c1_decider, make_timeout_decider, sync_sdd_solver


S = ProcessId.SOURCE
D = ProcessId.DEST


def directives_from_actors(
    algorithm: AlgorithmSpec,
    inputs: dict,
    actors: list[ProcessId],
    deliver_at: set[int],
    context: Optional[FailureContext] = None,
) -> ExecutionPrefix:
    """Run an actor sequence, delivering the actor's whole buffer at the
    given indices."""
    if context is None:
        context = FailureContext.none()
    config = initial_configuration(algorithm, inputs)
    directives = []
    for i, actor in enumerate(actors):
        if i in deliver_at:
            deliver = frozenset(m.unique_tag for m in config.buffer_of(actor))
        else:
            deliver = frozenset()
        directive = StepDirective(actor=actor, deliver=deliver)
        config, _ = apply_step(config, directive, algorithm, context)
        directives.append(directive)
    return run(algorithm, inputs, tuple(directives), context)


def random_prefix(
    rng: random.Random,
    horizon: Optional[int] = None,
    algorithm: Optional[AlgorithmSpec] = None,
    input_bit: Optional[int] = None,
    pattern: Optional[FailurePattern] = None,
) -> ExecutionPrefix:
    """A random kernel-legal prefix: random actor sequence over the live
    processes with random delivery subsets."""
    if horizon is None:
        horizon = rng.randint(1, 12)
    if algorithm is None:
        algorithm = rng.choice(
            [make_c1_decider(), make_timeout_decider(3), sync_sdd_solver()]
        )
    if input_bit is None:
        input_bit = rng.randint(0, 1)
    if pattern is None:
        crash_source = rng.choice([None, None, None] + list(range(horizon)))
        crash_dest = rng.choice([None, None, None, None] + list(range(horizon)))
        pattern = FailurePattern.of(source=crash_source, dest=crash_dest)
    context = FailureContext(pattern=pattern)
    inputs = {S: input_bit, D: None}
    config = initial_configuration(algorithm, inputs)
    directives = []
    for i in range(horizon):
        actors = [p for p in (S, D) if not pattern.crashed_at(p, i)]
        if not actors:
            break
        actor = rng.choice(actors)
        tags = [m.unique_tag for m in config.buffer_of(actor)]
        deliver = frozenset(t for t in tags if rng.random() < 0.5)
        directive = StepDirective(actor=actor, deliver=deliver)
        config, _ = apply_step(config, directive, algorithm, context)
        directives.append(directive)
    return run(algorithm, inputs, tuple(directives), context)


def make_double_decider() -> AlgorithmSpec:
    """Broken on purpose: the destination decides 0 at its first step and
    re-decides the same value at its second (an Integrity violation that
    value comparison alone would miss)."""

    def transition(state: LocalState, delivered, fd_value) -> LocalState:
        if state.process is S:
            return state
        if state.decided_count < 2:
            return state.deciding(0)
        return state

    return AlgorithmSpec(name="double-decider", transition=transition)


def make_wrong_decider() -> AlgorithmSpec:
    """Broken on purpose: decides the complement of the received bit."""

    def transition(state: LocalState, delivered, fd_value) -> LocalState:
        if state.process is S:
            if state.algorithm_memory is None:
                from sddlab.kernel import bit_payload

                return state.with_memory("sent").sending(bit_payload(state.input_value))
            return state
        if state.decision is None and delivered:
            from sddlab.kernel import payload_bit

            return state.deciding(1 - payload_bit(delivered[0].payload))
        return state

    return AlgorithmSpec(name="wrong-decider", transition=transition)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260811)
