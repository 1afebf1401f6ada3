"""Model admissibility, failure patterns, and failure-detector histories."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sddlab.kernel import run
from sddlab.models import (
    AdmissibilityVerdict,
    DomainMismatch,
    FailureContext,
    FailurePattern,
    ModelKind,
    ModelParams,
    ParamMismatch,
    RULE_DELIVERY_DEADLINE,
    RULE_STEP_WINDOW,
    check_admissible,
    fd_history_consistent,
    perfect_fd_history,
)
from sddlab.sdd import make_c1_decider, sync_sdd_solver

from conftest import D, S, directives_from_actors, random_prefix


crash_times = st.one_of(st.none(), st.integers(min_value=0, max_value=12))


def test_model_params_defaults_and_validation():
    sync = ModelParams.synchronous()
    assert (sync.gst, sync.delta, sync.phi) == (0, 1, 2)
    assert sync.c_p_note == {"c": 1, "p": 1}
    assert ModelParams.asynchronous().c_p_note is None
    with pytest.raises(ParamMismatch):
        ModelParams(kind=ModelKind.GST, gst=None, delta=1, phi=2)
    with pytest.raises(ParamMismatch):
        ModelParams.synchronous(delta=0)


def test_empty_prefix_is_compliant_under_every_model():
    prefix = run(make_c1_decider(), {S: 1, D: None}, ())
    for params in (
        ModelParams.asynchronous(),
        ModelParams.synchronous(),
        ModelParams.gst_model(3),
    ):
        report = check_admissible(prefix, params)
        assert report.verdict is AdmissibilityVerdict.COMPLIANT_SO_FAR
        assert report.violations == ()


def test_synchronous_flags_message_undelivered_past_delta():
    # Send at 0, never delivered; with delta=1 the overdue message is visible
    # from configuration index 2 on.
    solver = sync_sdd_solver()
    prefix = directives_from_actors(solver, {S: 1, D: None}, [S, D, S, D], set())
    report = check_admissible(prefix, ModelParams.synchronous())
    assert report.violated
    assert (2, RULE_DELIVERY_DEADLINE) in report.violations


def test_synchronous_flags_missed_step_window():
    solver = sync_sdd_solver()
    prefix = directives_from_actors(solver, {S: 1, D: None}, [S, D, D, D], {1})
    report = check_admissible(prefix, ModelParams.synchronous())
    assert (3, RULE_STEP_WINDOW) in report.violations


def test_gst_allows_pre_stabilization_chaos():
    # Chaos before gst=5 (destination-only), lockstep afterwards.
    algorithm = make_c1_decider()
    actors = [D, D, D, D, D, S, D, S, D, S]
    prefix = directives_from_actors(algorithm, {S: 1, D: None}, actors, {6})
    report = check_admissible(prefix, ModelParams.gst_model(5))
    assert report.verdict is AdmissibilityVerdict.COMPLIANT_SO_FAR
    # The same prefix is inadmissible if synchrony is demanded from the start.
    assert check_admissible(prefix, ModelParams.synchronous()).violated


def test_crashed_actor_step_is_flagged():
    # Hand-built: schedule the source in a context that crashes it at 0.
    algorithm = make_c1_decider()
    live = directives_from_actors(algorithm, {S: 1, D: None}, [S, D], {1})
    from dataclasses import replace

    doctored = replace(
        live, failure_context=FailureContext(FailurePattern.of(source=0))
    )
    report = check_admissible(doctored, ModelParams.asynchronous())
    assert (0, "crashed-actor") in report.violations


def test_liveness_shortfall_is_an_obligation_not_a_violation():
    algorithm = make_c1_decider()
    prefix = directives_from_actors(algorithm, {S: 1, D: None}, [S], set())
    report = check_admissible(prefix, ModelParams.asynchronous())
    assert report.verdict is AdmissibilityVerdict.COMPLIANT_SO_FAR
    assert any(o.startswith("pending-delivery") for o in report.open_obligations)
    assert any(o == "further-steps:dest" for o in report.open_obligations)


@settings(deadline=None, max_examples=80)
@given(source=crash_times, dest=crash_times, t1=st.integers(0, 12), t2=st.integers(0, 12))
def test_failure_pattern_monotone(source, dest, t1, t2):
    pattern = FailurePattern.of(source=source, dest=dest)
    lo, hi = min(t1, t2), max(t1, t2)
    assert pattern.crashed_set(lo) <= pattern.crashed_set(hi)


@settings(deadline=None, max_examples=60)
@given(source=crash_times, dest=crash_times, horizon=st.integers(0, 10))
def test_perfect_fd_axioms(source, dest, horizon):
    pattern = FailurePattern.of(source=source, dest=dest)
    history = perfect_fd_history(pattern, horizon)
    for p in (S, D):
        for t in range(horizon + 1):
            suspected = history.value(p, t)
            for q in (S, D):
                crashed = pattern.crash_time_of(q) is not None and pattern.crash_time_of(q) <= t
                assert (q in suspected) == crashed


def test_perfect_fd_examples():
    none = perfect_fd_history(FailurePattern.of(), 5)
    assert all(v == frozenset() for _, _, v in none.entries)
    crashed = perfect_fd_history(FailurePattern.of(source=2), 5)
    assert crashed.value(D, 1) == frozenset()
    assert crashed.value(D, 2) == frozenset({S})
    assert crashed.value(D, 4) == frozenset({S})
    again = perfect_fd_history(FailurePattern.of(source=2), 5)
    assert again == crashed


def test_fd_history_consistency():
    pattern = FailurePattern.of(source=2)
    other = FailurePattern.of(source=3)
    history = perfect_fd_history(pattern, 4)
    assert fd_history_consistent(pattern, history, pattern, history)
    tweaked = perfect_fd_history(pattern, 4)
    tweaked = type(tweaked)(
        domain_name=tweaked.domain_name,
        entries=tuple(
            (p, t, frozenset({D}) if (p, t) == (D, 3) else v)
            for p, t, v in tweaked.entries
        ),
    )
    assert not fd_history_consistent(pattern, history, pattern, tweaked)
    assert fd_history_consistent(pattern, history, other, perfect_fd_history(other, 4))
    with pytest.raises(DomainMismatch):
        from sddlab.models import FDHistory

        fd_history_consistent(
            pattern, history, pattern, FDHistory(domain_name="other", entries=())
        )


@settings(deadline=None, max_examples=50)
@given(seed=st.integers(0, 10_000))
def test_model_refinement(seed):
    """Synchronous-admissible implies GST(gst=0)-admissible, and
    GST-admissible raises no asynchronous safety violations."""
    prefix = random_prefix(random.Random(seed), horizon=8)
    sync = check_admissible(prefix, ModelParams.synchronous())
    gst0 = check_admissible(prefix, ModelParams.gst_model(0))
    if not sync.violated:
        assert not gst0.violated
    for gst in (0, 2, 5):
        report = check_admissible(prefix, ModelParams.gst_model(gst))
        if not report.violated:
            assert not check_admissible(prefix, ModelParams.asynchronous()).violated
