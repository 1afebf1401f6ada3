"""The exhaustive schedule oracle: counts, canonical ordering, pruning
consistency, and counterexample detection."""

from __future__ import annotations

import pytest

from sddlab.enumerator import (
    BudgetExceeded,
    ScenarioConfig,
    admissible_prefixes,
    enumerate_schedules,
    sweep_patterns,
)
from sddlab.models import FailurePattern, ModelParams, check_admissible
from sddlab.sdd import (
    InitialCrashInterpretation,
    make_timeout_decider,
    sync_sdd_solver,
)

from conftest import D, S


def _config(**overrides) -> ScenarioConfig:
    defaults = dict(
        algorithm=sync_sdd_solver(),
        input_bit=1,
        params=ModelParams.synchronous(),
        horizon=6,
        patterns=(FailurePattern.of(),),
        interpretation=InitialCrashInterpretation.BY_STEP_ACTIVITY,
    )
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


def test_horizon_one_synchronous_matches_the_hand_count():
    # One step, no messages yet, either process may take it: 2 schedules.
    summary = enumerate_schedules(_config(horizon=1))
    assert summary.schedules_explored == 2


def test_both_alive_synchronous_schedules_are_the_two_alternations():
    prefixes = list(
        admissible_prefixes(
            sync_sdd_solver(), 1, ModelParams.synchronous(), FailurePattern.of(), 6
        )
    )
    assert len(prefixes) == 2
    actor_sequences = {
        tuple(d.actor for d in prefix.schedule) for prefix in prefixes
    }
    assert actor_sequences == {
        (S, D, S, D, S, D),
        (D, S, D, S, D, S),
    }


def test_solver_has_no_counterexamples_at_horizon_six():
    summary = enumerate_schedules(
        _config(patterns=sweep_patterns(6), horizon=6)
    )
    assert summary.counterexamples == ()
    assert summary.schedules_explored > 0


def test_enumerated_prefixes_are_admissible_and_in_canonical_order():
    prefixes = list(
        admissible_prefixes(
            sync_sdd_solver(), 1, ModelParams.synchronous(), FailurePattern.of(source=2), 5
        )
    )
    keys = [
        tuple((d.actor.idx, tuple(sorted(d.deliver))) for d in prefix.schedule)
        for prefix in prefixes
    ]
    assert keys == sorted(keys)
    for prefix in prefixes:
        assert not check_admissible(prefix, ModelParams.synchronous()).violated


def test_timeout_decider_yields_counterexamples_under_deferral():
    # Under a late stabilization time the adversary may defer the source's
    # message past the timeout, producing validity violations.
    summary = enumerate_schedules(
        _config(
            algorithm=make_timeout_decider(4),
            params=ModelParams.gst_model(8),
            horizon=6,
        )
    )
    assert summary.counterexamples
    assert [c.ordinal for c in summary.counterexamples] == list(
        range(len(summary.counterexamples))
    )
    assert any(
        c.verdict.validity.value == "violated" for c in summary.counterexamples
    )


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        enumerate_schedules(
            _config(params=ModelParams.asynchronous(), horizon=6, budget=10)
        )


def test_async_enumeration_counts_delivery_choices():
    # Destination-only schedules aside, each admissible async schedule is an
    # actor sequence plus a choice of when (if ever) to deliver the single
    # message; spot-check the closed form on horizon 3.
    prefixes = list(
        admissible_prefixes(
            sync_sdd_solver(), 1, ModelParams.asynchronous(), FailurePattern.of(), 3
        )
    )
    expected = 0
    for actors_mask in range(8):
        actors = [S if actors_mask >> i & 1 == 0 else D for i in range(3)]
        try:
            first_send = actors.index(S)
        except ValueError:
            expected += 1
            continue
        dest_after = sum(1 for a in actors[first_send + 1 :] if a is D)
        expected += dest_after + 1
    assert len(prefixes) == expected
