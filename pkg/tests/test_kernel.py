"""Kernel semantics: step application, runs, decision times, the normal
form and its transform."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sddlab.kernel import (
    ActorCrashed,
    DeliveryNotInBuffer,
    StepDirective,
    StepKind,
    apply_step,
    bit_payload,
    c1_transform,
    decision_time,
    initial_configuration,
    is_c1_compliant,
    run,
)
from sddlab.models import FailureContext, FailurePattern
from sddlab.sdd import make_c1_decider, sync_sdd_solver
from sddlab.trace import step_records

from conftest import D, S, directives_from_actors, make_double_decider, random_prefix


def test_apply_step_local_trivial_identity():
    algorithm = make_c1_decider()
    config = initial_configuration(algorithm, {S: 1, D: None})
    after, outcome = apply_step(config, StepDirective(actor=D), algorithm)
    assert outcome.kind is StepKind.LOCAL
    assert outcome.trivial
    assert after == config
    assert after.index == 1


def test_apply_step_source_first_step_sends_input_payload():
    solver = sync_sdd_solver()
    config = initial_configuration(solver, {S: 1, D: None})
    after, outcome = apply_step(config, StepDirective(actor=S), solver)
    assert outcome.kind is StepKind.SEND
    assert [m.payload for m in outcome.messages_sent] == [b"1"]
    assert [m.payload for m in after.buffer_of(D)] == [b"1"]
    assert after.buffer_of(S) == ()


def test_apply_step_receive_decides_and_counts():
    solver = sync_sdd_solver()
    config = initial_configuration(solver, {S: 0, D: None})
    config, _ = apply_step(config, StepDirective(actor=S), solver)
    message = config.buffer_of(D)[0]
    assert message.payload == b"0"
    before = config.state_of(D)
    assert before.decided_count == 0
    after, outcome = apply_step(
        config, StepDirective(actor=D, deliver=frozenset({message.unique_tag})), solver
    )
    assert outcome.kind is StepKind.RECEIVE
    assert after.state_of(D).decision == 0
    assert after.state_of(D).decided_count == 1
    assert after.buffer_of(D) == ()


def test_apply_step_rejects_unknown_tags_and_crashed_actors():
    algorithm = make_c1_decider()
    config = initial_configuration(algorithm, {S: 1, D: None})
    with pytest.raises(DeliveryNotInBuffer):
        apply_step(config, StepDirective(actor=D, deliver=frozenset({7})), algorithm)
    crashed = FailureContext(FailurePattern.of(source=0))
    with pytest.raises(ActorCrashed):
        apply_step(config, StepDirective(actor=S), algorithm, crashed)


def test_crash_takes_effect_exactly_at_its_index():
    # A process may step right up to its crash time but not at it.
    algorithm = make_c1_decider()
    context = FailureContext(FailurePattern.of(source=2))
    prefix = directives_from_actors(algorithm, {S: 1, D: None}, [S, S], set(), context)
    assert prefix.horizon == 2
    with pytest.raises(ActorCrashed):
        run(algorithm, {S: 1, D: None}, prefix.schedule + (StepDirective(actor=S),), context)


def test_run_attaches_the_failing_index_to_step_errors():
    algorithm = make_c1_decider()
    schedule = (
        StepDirective(actor=S),
        StepDirective(actor=D),
        StepDirective(actor=D, deliver=frozenset({99})),
    )
    with pytest.raises(DeliveryNotInBuffer) as excinfo:
        run(algorithm, {S: 1, D: None}, schedule)
    assert excinfo.value.index == 2


def test_run_horizon_zero_is_just_the_initial_configuration():
    prefix = run(make_c1_decider(), {S: 1, D: None}, ())
    assert prefix.horizon == 0
    assert len(prefix.configurations) == 1
    assert prefix.configurations[0].buffers == ((), ())


def test_run_lockstep_four_steps_decides_the_input():
    solver = sync_sdd_solver()
    prefix = directives_from_actors(solver, {S: 0, D: None}, [S, D, S, D], {1, 3})
    assert prefix.final.state_of(D).decision == 0


def test_run_is_deterministic_byte_identical():
    solver = sync_sdd_solver()
    a = directives_from_actors(solver, {S: 1, D: None}, [S, D, S, D], {1, 3})
    b = run(solver, {S: 1, D: None}, a.schedule, a.failure_context)
    assert a == b
    assert step_records(a) == step_records(b)


def test_decision_time_absent_when_never_deciding():
    prefix = directives_from_actors(make_c1_decider(), {S: 1, D: None}, [D, D, D], set())
    assert decision_time(prefix) is None


def test_decision_time_reads_first_deciding_configuration():
    # Delivery happens on the step producing C_3; the independent oracle is a
    # direct scan of the configurations.
    solver = sync_sdd_solver()
    prefix = directives_from_actors(solver, {S: 1, D: None}, [S, D, D, D], {2})
    scan = next(
        k
        for k, config in enumerate(prefix.configurations)
        if config.state_of(D).decision is not None
    )
    assert scan == 3
    assert decision_time(prefix) == 3


def test_decision_time_returns_first_of_two_decision_events():
    prefix = directives_from_actors(make_double_decider(), {S: 1, D: None}, [D, D, D], set())
    assert decision_time(prefix) == 1


def test_is_c1_compliant_accepts_solver_lockstep():
    solver = sync_sdd_solver()
    prefix = directives_from_actors(solver, {S: 1, D: None}, [S, D, S, D, S, D], {1})
    assert is_c1_compliant(prefix).compliant


def test_is_c1_flags_source_whose_first_step_is_local():
    from sddlab.kernel import AlgorithmSpec

    def transition(state, delivered, fd_value):
        if state.process is S:
            if state.algorithm_memory is None:
                return state.with_memory("warming")
            if state.algorithm_memory == "warming":
                return state.with_memory("sent").sending(bit_payload(state.input_value))
            return state
        if state.decision is None and delivered:
            from sddlab.kernel import payload_bit

            return state.deciding(payload_bit(delivered[0].payload))
        return state

    late = AlgorithmSpec(name="late-sender", transition=transition)
    prefix = directives_from_actors(late, {S: 1, D: None}, [D, S, S, D], {3})
    report = is_c1_compliant(prefix)
    assert not report.compliant
    assert report.violation_index == 1  # the source's first (local) step


def test_is_c1_flags_destination_memory_update_after_deciding():
    from sddlab.kernel import AlgorithmSpec

    def transition(state, delivered, fd_value):
        if state.process is S:
            return state
        if state.decision is None:
            return state.deciding(0)
        return state.with_memory((state.algorithm_memory or 0) + 1)

    restless = AlgorithmSpec(name="restless-decider", transition=transition)
    prefix = directives_from_actors(restless, {S: 1, D: None}, [D, D, D], set())
    report = is_c1_compliant(prefix)
    assert not report.compliant
    assert report.violation_index == 1


def test_c1_transform_of_chatty_sender_sends_once():
    from sddlab.sdd import make_chatty_sender

    chatty = make_chatty_sender()
    raw = directives_from_actors(chatty, {S: 1, D: None}, [S, S, S, D], {3})
    assert sum(1 for o in raw.outcomes if o.messages_sent) == 3
    transformed = c1_transform(chatty)
    cooked = directives_from_actors(transformed, {S: 1, D: None}, [S, S, S, D], {3})
    nontrivial_source = [
        i
        for i, (d, o) in enumerate(zip(cooked.schedule, cooked.outcomes))
        if d.actor is S and not o.trivial
    ]
    assert nontrivial_source == [0]
    assert cooked.final.state_of(D).decision == 1


def test_c1_transform_output_is_compliant_under_random_schedules(rng):
    transformed = c1_transform(sync_sdd_solver())
    for _ in range(60):
        prefix = random_prefix(rng, algorithm=transformed)
        assert is_c1_compliant(prefix).compliant


def test_c1_transform_of_solver_matches_it_on_crash_free_synchronous_runs():
    # The solver is already in normal form on synchronous runs (the timeout
    # never fires when the source is live), so the transform is behaviourally
    # identical there: same actors, kinds, decisions, and decision times.
    from sddlab.enumerator import admissible_prefixes
    from sddlab.models import FailurePattern, ModelParams

    solver = sync_sdd_solver()
    transformed = c1_transform(solver)
    checked = 0
    for bit in (0, 1):
        for prefix in admissible_prefixes(
            solver, bit, ModelParams.synchronous(), FailurePattern.of(), 6
        ):
            replayed = run(
                transformed, {S: bit, D: None}, prefix.schedule, prefix.failure_context
            )
            assert [o.kind for o in replayed.outcomes] == [
                o.kind for o in prefix.outcomes
            ]
            assert decision_time(replayed) == decision_time(prefix)
            assert (
                replayed.final.state_of(D).decision
                == prefix.final.state_of(D).decision
            )
            checked += 1
    assert checked > 0


def test_c1_transform_idempotent_behaviour_on_enumerated_schedules():
    # Transforming an already-compliant algorithm preserves actors, kinds,
    # and decisions on every admissible schedule at the test horizon.
    from sddlab.enumerator import admissible_prefixes
    from sddlab.models import ModelParams

    base = make_c1_decider()
    again = c1_transform(base)
    for prefix in admissible_prefixes(
        base, 1, ModelParams.asynchronous(), FailurePattern.of(), 4
    ):
        replayed = run(again, {S: 1, D: None}, prefix.schedule, prefix.failure_context)
        assert [o.kind for o in replayed.outcomes] == [o.kind for o in prefix.outcomes]
        assert decision_time(replayed) == decision_time(prefix)
        assert replayed.final.state_of(D).decision == prefix.final.state_of(D).decision


def test_trivial_steps_stutter_the_configuration(rng):
    for _ in range(40):
        prefix = random_prefix(rng)
        for i, outcome in enumerate(prefix.outcomes):
            if outcome.trivial:
                assert prefix.configurations[i] == prefix.configurations[i + 1]
            else:
                assert prefix.configurations[i] != prefix.configurations[i + 1]


def test_step_classification_is_total_and_exclusive(rng):
    for _ in range(40):
        prefix = random_prefix(rng)
        for directive, outcome in zip(prefix.schedule, prefix.outcomes):
            sent = bool(outcome.messages_sent)
            received = bool(directive.deliver)
            expected = {
                (True, True): StepKind.SEND_RECEIVE,
                (True, False): StepKind.SEND,
                (False, True): StepKind.RECEIVE,
                (False, False): StepKind.LOCAL,
            }[(sent, received)]
            assert outcome.kind is expected


@settings(deadline=None, max_examples=60)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_buffer_conservation(seed: int):
    """Every buffered message was emitted earlier and not yet delivered, and
    no message is ever delivered twice."""
    prefix = random_prefix(random.Random(seed))
    emitted: dict[int, int] = {}
    delivered: set[int] = set()
    for i, (directive, outcome) in enumerate(zip(prefix.schedule, prefix.outcomes)):
        for tag in directive.deliver:
            assert tag in emitted and emitted[tag] < i
            assert tag not in delivered
            delivered.add(tag)
        for message in outcome.messages_sent:
            assert message.unique_tag not in emitted
            assert message.sent_at == i
            emitted[message.unique_tag] = i
    for p in (S, D):
        for message in prefix.final.buffer_of(p):
            assert message.receiver is p
            assert message.unique_tag in emitted
            assert message.unique_tag not in delivered
