"""Adversarial constructions over the kernel: the unbounded-decision-time
family, mirrored schedules, the four-execution contradiction harness for
eventually-synchronous models, and the failure-detector impossibility
harnesses under both initial-crash readings.

Each harness emits an :class:`ImpossibilityReport` whose certificates and
claimed violations re-verify independently: certificates by replaying the
destination's view, violations by a fresh property check on the cited
trace.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Sequence

from .kernel import (
    AlgorithmSpec,
    ExecutionPrefix,
    ProcessId,
    StepDirective,
    apply_step,
    c1_transform,
    decision_time,
    initial_configuration,
    is_c1_compliant,
    run,
)
from .models import (
    FailureContext,
    FailurePattern,
    FDHistory,
    ModelParams,
    check_admissible,
    fd_history_consistent,
    perfect_fd_history,
)
from .sdd import (
    InitialCrashInterpretation,
    SDDVerdict,
    ValidityStatus,
    check_sdd,
    termination_monitor,
)
from .topology import ExecutionFamily, liveness_extendable


class HarnessError(Exception):
    pass


class NotC1Compliant(HarnessError):
    pass


class KindMismatchUnconstructible(HarnessError):
    def __init__(self, index: int):
        super().__init__(f"step kinds diverge at index {index}")
        self.index = index


class BoundedDecisionTime(HarnessError):
    """No deferral past the observed decision time is admissible at this
    horizon: no witness, consistent with solvability."""

    def __init__(self, bound: int, message: str):
        super().__init__(message)
        self.bound = bound


class NoDecisionWithinHorizon(HarnessError):
    pass


# ---------------------------------------------------------------------------
# Schedule builders
# ---------------------------------------------------------------------------


def all_dest_schedule(horizon: int) -> tuple[StepDirective, ...]:
    return tuple(StepDirective(actor=ProcessId.DEST) for _ in range(horizon))


def run_deliver_all_at(
    algorithm: AlgorithmSpec,
    inputs: Mapping[ProcessId, Optional[int]],
    actors: Sequence[ProcessId],
    deliver_indices: frozenset[int] | set[int],
    failure_context: Optional[FailureContext] = None,
) -> ExecutionPrefix:
    """Run with a given actor sequence, delivering the actor's whole buffer
    at the named indices and nothing elsewhere.  Delivery tags depend on the
    evolving buffers, so the schedule is built alongside a first pass and
    then re-run for the canonical provenance-carrying prefix."""
    if failure_context is None:
        failure_context = FailureContext.none()
    config = initial_configuration(algorithm, inputs)
    directives = []
    for i, actor in enumerate(actors):
        if i in deliver_indices:
            deliver = frozenset(m.unique_tag for m in config.buffer_of(actor))
        else:
            deliver = frozenset()
        directive = StepDirective(actor=actor, deliver=deliver)
        config, _ = apply_step(config, directive, algorithm, failure_context)
        directives.append(directive)
    return run(algorithm, inputs, tuple(directives), failure_context)


def lockstep_prefix(
    algorithm: AlgorithmSpec,
    inputs: Mapping[ProcessId, Optional[int]],
    horizon: int,
    failure_context: Optional[FailureContext] = None,
    first: ProcessId = ProcessId.SOURCE,
) -> ExecutionPrefix:
    """Strict alternation starting with ``first``; every step delivers the
    actor's whole buffer (the canonical synchronous run)."""
    actors = tuple(first if i % 2 == 0 else first.other for i in range(horizon))
    return run_deliver_all_at(
        algorithm, inputs, actors, set(range(horizon)), failure_context
    )


def _deferral_actors(k: int, horizon: int) -> tuple[ProcessId, ...]:
    """Destination-only up to k, the source's single step at k + 1, delivery
    at k + 2, then strict alternation."""
    actors = []
    for i in range(horizon):
        if i <= k:
            actors.append(ProcessId.DEST)
        elif i == k + 1:
            actors.append(ProcessId.SOURCE)
        elif (i - (k + 2)) % 2 == 0:
            actors.append(ProcessId.DEST)
        else:
            actors.append(ProcessId.SOURCE)
    return tuple(actors)


# ---------------------------------------------------------------------------
# Unbounded decision times and mirrored schedules
# ---------------------------------------------------------------------------


def _family_member_actors(k: int, horizon: int) -> tuple[ProcessId, ...]:
    # Source sends at index 0; the destination's receiving step must land on
    # index k + 1, which fixes the alternation parity of the tail.
    actors = [ProcessId.SOURCE]
    for i in range(1, horizon):
        if (i - (k + 1)) % 2 == 0:
            actors.append(ProcessId.DEST)
        else:
            actors.append(ProcessId.SOURCE)
    return tuple(actors)


def unbounded_decision_family(
    algorithm: AlgorithmSpec,
    input_bit: int,
    k_max: int,
    horizon: Optional[int] = None,
    delta: int = 1,
    phi: int = 2,
) -> ExecutionFamily:
    """Member k defers delivery of the source's initial message for k ticks
    (admissible with stabilization time k), so decision times grow without
    bound along the family.

    Requires the single-message normal form: every member is probed with
    :func:`is_c1_compliant`, which in particular rejects algorithms that
    decide before the deferred receipt (their post-decision receive step is
    non-trivial).
    """
    if horizon is None:
        horizon = k_max + 8
    if horizon < k_max + 3:
        raise ValueError("horizon too small for the largest deferral")
    members = []
    for k in range(k_max + 1):
        member = run_deliver_all_at(
            algorithm,
            {ProcessId.SOURCE: input_bit, ProcessId.DEST: None},
            _family_member_actors(k, horizon),
            {k + 1},
        )
        report = is_c1_compliant(member)
        if not report.compliant:
            raise NotC1Compliant(
                f"member {k} violates the normal form at index "
                f"{report.violation_index}: {report.reason}"
            )
        if decision_time(member) != k + 2:
            raise NotC1Compliant(
                f"member {k} does not decide upon the deferred receipt"
            )
        members.append(member)
    return ExecutionFamily(
        generator=lambda k: members[k],
        family_horizon=lambda k: horizon,
        description=(
            f"{algorithm.name}, input {input_bit}: delivery of the initial "
            f"message deferred k ticks, k <= {k_max}"
        ),
        member_params=lambda k: ModelParams.gst_model(k, delta=delta, phi=phi),
    )


def _limit_actors(horizon: int) -> tuple[ProcessId, ...]:
    return tuple(
        ProcessId.SOURCE if i % 2 == 0 else ProcessId.DEST for i in range(horizon)
    )


@dataclass(frozen=True)
class GstFamilyBundle:
    family: ExecutionFamily
    limit: ExecutionPrefix
    params: ModelParams


def gst_family(
    algorithm: AlgorithmSpec,
    input_bit: int,
    k_max: int = 8,
    horizon: int = 16,
    delta: int = 1,
    phi: int = 2,
) -> GstFamilyBundle:
    """The bundled non-closedness scenario: the deferral family plus the
    never-stabilizing limit in which the initial message is never delivered
    (alternating trivial steps forever, truncated at the horizon)."""
    family = unbounded_decision_family(
        algorithm, input_bit, k_max, horizon=horizon, delta=delta, phi=phi
    )
    limit = run_deliver_all_at(
        algorithm,
        {ProcessId.SOURCE: input_bit, ProcessId.DEST: None},
        _limit_actors(horizon),
        set(),
    )
    return GstFamilyBundle(
        family=family, limit=limit, params=ModelParams.gst_model(0, delta=delta, phi=phi)
    )


def mirror_schedule(
    original: ExecutionPrefix, flipped_input: int, algorithm: AlgorithmSpec
) -> ExecutionPrefix:
    """Re-run the same schedule with the flipped input.

    For normal-form algorithms the send happens at the same index with the
    same tag, so the verbatim schedule realizes the mirrored execution: the
    same actor takes the same kind of step at every index and the flipped
    message is received exactly where the original was.  Kind divergence
    indicates a normal-form violation.
    """
    original_input = original.input_of(ProcessId.SOURCE)
    if original_input is None or flipped_input != 1 - original_input:
        raise ValueError("flipped_input must be the complement of the original input")
    mirrored = run(
        algorithm,
        {ProcessId.SOURCE: flipped_input, ProcessId.DEST: original.input_of(ProcessId.DEST)},
        original.schedule,
        original.failure_context,
    )
    for i, (a, b) in enumerate(zip(original.outcomes, mirrored.outcomes)):
        if a.kind is not b.kind:
            raise KindMismatchUnconstructible(i)
    return mirrored


# ---------------------------------------------------------------------------
# Destination views and indistinguishability certificates
# ---------------------------------------------------------------------------


def effective_fd(prefix: ExecutionPrefix, index: int) -> Any:
    directive = prefix.schedule[index]
    if directive.fd_value is not None:
        return directive.fd_value
    return prefix.failure_context.fd_value(directive.actor, index)


def _dest_observation(prefix: ExecutionPrefix, index: int):
    directive = prefix.schedule[index]
    payloads = tuple(
        sorted(
            m.payload
            for m in prefix.configurations[index].buffer_of(ProcessId.DEST)
            if m.unique_tag in directive.deliver
        )
    )
    return (prefix.outcomes[index].kind, payloads, effective_fd(prefix, index))


@dataclass(frozen=True, slots=True)
class IndistinguishabilityCertificate:
    """Per-index attestation that the destination cannot tell two traces
    apart up to ``upto``: its local state matches at every configuration
    index, and its observations (step kind, delivered payloads, detector
    value) match at every index where both traces schedule it."""

    trace_a: str
    trace_b: str
    upto: int
    equal: bool
    first_divergence: Optional[int]
    observations_compared: int


def certify_dest_views(
    name_a: str,
    a: ExecutionPrefix,
    name_b: str,
    b: ExecutionPrefix,
    upto: int,
) -> IndistinguishabilityCertificate:
    observations = 0
    divergence: Optional[int] = None
    for i in range(upto + 1):
        if a.configurations[i].state_of(ProcessId.DEST) != b.configurations[i].state_of(
            ProcessId.DEST
        ):
            divergence = i
            break
    if divergence is None:
        for i in range(min(upto, a.horizon, b.horizon)):
            if (
                a.schedule[i].actor is ProcessId.DEST
                and b.schedule[i].actor is ProcessId.DEST
            ):
                observations += 1
                if _dest_observation(a, i) != _dest_observation(b, i):
                    divergence = i
                    break
    return IndistinguishabilityCertificate(
        trace_a=name_a,
        trace_b=name_b,
        upto=upto,
        equal=divergence is None,
        first_divergence=divergence,
        observations_compared=observations,
    )


def verify_certificate(
    certificate: IndistinguishabilityCertificate,
    traces: Mapping[str, ExecutionPrefix],
) -> bool:
    """Recompute a certificate from the named traces and compare."""
    rebuilt = certify_dest_views(
        certificate.trace_a,
        traces[certificate.trace_a],
        certificate.trace_b,
        traces[certificate.trace_b],
        certificate.upto,
    )
    return rebuilt == certificate


# ---------------------------------------------------------------------------
# Impossibility reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ImpossibilityReport:
    scenario_traces: tuple[tuple[str, ExecutionPrefix], ...]
    certificates: tuple[IndistinguishabilityCertificate, ...]
    verdicts: tuple[tuple[str, SDDVerdict], ...]
    violated_property: str
    violating_trace: Optional[str]
    violation_index: Optional[int]
    interpretation: InitialCrashInterpretation
    narrative: str

    def traces(self) -> dict[str, ExecutionPrefix]:
        return dict(self.scenario_traces)

    def document(self) -> dict:
        return {
            "violated_property": self.violated_property,
            "violating_trace": self.violating_trace,
            "violation_index": self.violation_index,
            "interpretation": self.interpretation.value,
            "traces": [name for name, _ in self.scenario_traces],
            "verdicts": {name: verdict.label() for name, verdict in self.verdicts},
            "certificates": [
                {
                    "pair": [c.trace_a, c.trace_b],
                    "upto": c.upto,
                    "equal": c.equal,
                    "first_divergence": c.first_divergence,
                    "observations_compared": c.observations_compared,
                }
                for c in self.certificates
            ],
            "narrative": self.narrative,
        }


def reverify_report(report: ImpossibilityReport) -> bool:
    """Independent re-check: certificates replay and the claimed violation is
    reconfirmed by a fresh property check on the cited trace."""
    traces = report.traces()
    if not all(verify_certificate(c, traces) for c in report.certificates):
        return False
    if not all(c.equal for c in report.certificates):
        return False
    if report.violating_trace is None:
        return True
    verdict = check_sdd(traces[report.violating_trace], report.interpretation)
    if report.violated_property == "validity":
        return (
            verdict.validity is ValidityStatus.VIOLATED
            and verdict.validity_index == report.violation_index
        )
    if report.violated_property == "termination":
        return verdict.decision_index is None
    return False


# ---------------------------------------------------------------------------
# The four-execution contradiction harness
# ---------------------------------------------------------------------------


def _probe_normal_form(algorithm: AlgorithmSpec, horizon: int = 6) -> bool:
    """Benign probes: a prompt-delivery lockstep run and a crashed-source
    destination-only run.  Deliberately excludes deferred-delivery runs so
    that timeout-style algorithms, which are in normal form on these probes,
    are examined unmodified."""
    prompt = lockstep_prefix(
        algorithm, {ProcessId.SOURCE: 0, ProcessId.DEST: None}, horizon
    )
    crashed = run(
        algorithm,
        {ProcessId.SOURCE: 0, ProcessId.DEST: None},
        all_dest_schedule(horizon),
        FailureContext(FailurePattern.of(source=0)),
    )
    return is_c1_compliant(prompt).compliant and is_c1_compliant(crashed).compliant


def theorem3_quadruple(
    algorithm: AlgorithmSpec,
    params: ModelParams,
    horizon: int,
    extension_budget: int = 4,
) -> ImpossibilityReport:
    """Build the contradiction quadruple for an algorithm claiming to solve
    the decision problem in a model that admits unbounded delivery deferral.

    alpha_v: input v, source initially crashed, destination-only schedule;
    the destination decides some value w at time k in both (certified
    indistinguishable).  alpha_v': input v, source alive, its single step
    and the delivery deferred past k.  The destination's view up to k is
    unchanged, so it still decides w at k; the run with input 1 - w then
    violates Validity.  If no deferral past k is admissible the model bounds
    the decision time and :class:`BoundedDecisionTime` is raised instead.
    """
    if not _probe_normal_form(algorithm):
        algorithm = c1_transform(algorithm)
        transformed = True
    else:
        transformed = False

    crashed_ctx = FailureContext(FailurePattern.of(source=0))
    alphas = {}
    for v in (0, 1):
        alphas[v] = run(
            algorithm,
            {ProcessId.SOURCE: v, ProcessId.DEST: None},
            all_dest_schedule(horizon),
            crashed_ctx,
        )
        if check_admissible(alphas[v], params).violated:
            raise HarnessError("crashed-source baseline run is not admissible")

    k0, k1 = decision_time(alphas[0]), decision_time(alphas[1])
    baseline_cert = certify_dest_views(
        "alpha0", alphas[0], "alpha1", alphas[1], min(k0 or horizon, k1 or horizon)
    )
    if k0 is None or k1 is None:
        search = liveness_extendable(
            termination_monitor(), alphas[0], algorithm, params, extension_budget
        )
        if search.found:
            raise HarnessError(
                f"the destination decides only beyond this horizon (a deciding "
                f"extension of length {len(search.suffix)} exists); rerun with a "
                f"larger horizon"
            )
        narrative = (
            f"{'Transformed to normal form first. ' if transformed else ''}"
            "The algorithm never decides while the source is initially crashed; "
            f"extension search found no deciding continuation "
            f"(explored {search.explored} extensions, budget {extension_budget}). "
            "Termination is refuted at this horizon rather than Validity."
        )
        name = "alpha0" if k0 is None else "alpha1"
        return ImpossibilityReport(
            scenario_traces=(("alpha0", alphas[0]), ("alpha1", alphas[1])),
            certificates=(baseline_cert,),
            verdicts=tuple(
                (f"alpha{v}", check_sdd(alphas[v], InitialCrashInterpretation.BY_STEP_ACTIVITY))
                for v in (0, 1)
            ),
            violated_property="termination",
            violating_trace=name,
            violation_index=None,
            interpretation=InitialCrashInterpretation.BY_STEP_ACTIVITY,
            narrative=narrative,
        )

    if k0 != k1:
        raise HarnessError(f"decision times diverge ({k0} vs {k1}) despite equal views")
    k = k0
    w = alphas[0].configurations[k].state_of(ProcessId.DEST).decision
    if alphas[1].configurations[k].state_of(ProcessId.DEST).decision != w:
        raise HarnessError("decisions diverge despite equal views")

    primes = None
    for t_s in range(k + 1, horizon - 1):
        actors = _deferral_actors(t_s - 1, horizon)
        candidate = {
            v: run_deliver_all_at(
                algorithm,
                {ProcessId.SOURCE: v, ProcessId.DEST: None},
                actors,
                {t_s + 1},
            )
            for v in (0, 1)
        }
        if all(not check_admissible(candidate[v], params).violated for v in (0, 1)):
            primes = candidate
            deferral_index = t_s
            break
    if primes is None:
        raise BoundedDecisionTime(
            k,
            f"no admissible schedule defers the source's message past the "
            f"decision time {k} within horizon {horizon}: no witness at this "
            f"horizon (consistent with solvability)",
        )

    for v in (0, 1):
        if decision_time(primes[v]) != k:
            raise HarnessError("deferred run decided at a different time than the baseline")

    certificates = (
        baseline_cert,
        certify_dest_views("alpha0", alphas[0], "alpha0_prime", primes[0], k),
        certify_dest_views("alpha1", alphas[1], "alpha1_prime", primes[1], k),
    )
    if not all(c.equal for c in certificates):
        raise HarnessError("indistinguishability certificate failed during construction")

    violating_name = f"alpha{1 - w}_prime"
    interpretation = InitialCrashInterpretation.BY_STEP_ACTIVITY
    verdicts = {
        "alpha0": check_sdd(alphas[0], interpretation),
        "alpha1": check_sdd(alphas[1], interpretation),
        "alpha0_prime": check_sdd(primes[0], interpretation),
        "alpha1_prime": check_sdd(primes[1], interpretation),
    }
    violating_verdict = verdicts[violating_name]
    if violating_verdict.validity is not ValidityStatus.VIOLATED:
        raise HarnessError("expected Validity violation did not reconfirm")

    narrative = (
        f"{'Transformed to normal form first. ' if transformed else ''}"
        f"With the source initially crashed the destination decides {w} at "
        f"time {k} for both inputs (indistinguishable runs). The model admits "
        f"deferring the live source's step to index {deferral_index} and its "
        f"message past {k}, so the destination's view up to {k} is unchanged "
        f"and it still decides {w}; with input {1 - w} and a live source this "
        f"violates Validity in {violating_name}."
    )
    return ImpossibilityReport(
        scenario_traces=(
            ("alpha0", alphas[0]),
            ("alpha1", alphas[1]),
            ("alpha0_prime", primes[0]),
            ("alpha1_prime", primes[1]),
        ),
        certificates=certificates,
        verdicts=tuple(verdicts.items()),
        violated_property="validity",
        violating_trace=violating_name,
        violation_index=violating_verdict.validity_index,
        interpretation=interpretation,
        narrative=narrative,
    )


# ---------------------------------------------------------------------------
# Failure-detector impossibility harnesses
# ---------------------------------------------------------------------------

HistorySource = Callable[[FailurePattern], FDHistory]


def perfect_history_source(horizon: int) -> HistorySource:
    return lambda pattern: perfect_fd_history(pattern, horizon)


def make_randomized_history_source(seed: int, horizon: int) -> HistorySource:
    """A pattern-consistent but otherwise arbitrary detector: suspicion sets
    are seeded noise on top of the crashed set, derived deterministically
    from (seed, pattern, querier, time) alone, so equal patterns always get
    byte-equal histories."""

    def noise(pattern: FailurePattern, process: ProcessId, t: int) -> frozenset[ProcessId]:
        material = repr((seed, pattern.crash_times, process.value, t)).encode()
        digest = hashlib.blake2b(material, digest_size=2).digest()
        noisy = set()
        if digest[0] % 4 == 0:
            noisy.add(ProcessId.SOURCE)
        if digest[1] % 5 == 0:
            noisy.add(ProcessId.DEST)
        return frozenset(noisy)

    def source(pattern: FailurePattern) -> FDHistory:
        entries = tuple(
            (p, t, pattern.crashed_set(t) | noise(pattern, p, t))
            for p in (ProcessId.SOURCE, ProcessId.DEST)
            for t in range(horizon + 1)
        )
        return FDHistory(domain_name=f"randomized-fd-{seed}", entries=entries)

    return source


def _paired_fd_runs(
    algorithm: AlgorithmSpec,
    fd_history_source: HistorySource,
    horizon: int,
    t_c: int,
) -> tuple[dict[int, ExecutionPrefix], FailureContext, int, int]:
    if not 0 < t_c < horizon:
        raise ValueError("t_c must satisfy 0 < t_c < horizon")
    pattern = FailurePattern.of(source=t_c)
    history = fd_history_source(pattern)
    again = fd_history_source(pattern)
    if not fd_history_consistent(pattern, history, pattern, again):
        raise HarnessError("history source is not a function of the failure pattern")
    context = FailureContext(pattern=pattern, history=history)
    runs = {
        v: run(
            algorithm,
            {ProcessId.SOURCE: v, ProcessId.DEST: None},
            all_dest_schedule(horizon),
            context,
        )
        for v in (0, 1)
    }
    times = {v: decision_time(runs[v]) for v in (0, 1)}
    if times[0] is None or times[1] is None:
        raise NoDecisionWithinHorizon(
            f"destination undecided at horizon {horizon} (inconclusive)"
        )
    if times[0] != times[1]:
        raise HarnessError("decision times diverge despite equal views")
    w0 = runs[0].configurations[times[0]].state_of(ProcessId.DEST).decision
    w1 = runs[1].configurations[times[1]].state_of(ProcessId.DEST).decision
    if w0 != w1:
        raise HarnessError("decisions diverge despite equal views")
    return runs, context, times[0], w0


def fd_impossibility_pattern_interp(
    algorithm: AlgorithmSpec,
    fd_history_source: HistorySource,
    horizon: int,
    t_c: int = 3,
) -> ImpossibilityReport:
    """Initial crash read off the failure pattern (crashed at every time).

    alpha_v: the source crashes at t_c > 0 without ever stepping; the
    destination decides (t_d, w) identically for both inputs.  alpha_prime:
    identical pattern, history, and destination view, except the source
    takes one step before t_c and its message is delayed past t_d.  The
    source demonstrably did not crash initially, yet the destination still
    decides w, violating Validity for input 1 - w.

    Because time is identified with step indices, the source's step must
    displace a destination step; view preservation therefore requires the
    displaced step to be trivial, or the insertion to happen after t_d.
    """
    runs, context, t_d, w = _paired_fd_runs(algorithm, fd_history_source, horizon, t_c)
    base = runs[1 - w]

    insert_at = None
    for j in range(t_c - 1, -1, -1):
        if j >= t_d or base.outcomes[j].trivial:
            insert_at = j
            break
    if insert_at is None:
        raise HarnessError(
            f"no view-preserving insertion point before t_c={t_c}: every "
            f"destination step before the decision is non-trivial; choose "
            f"t_c > t_d + 1 (observed t_d={t_d})"
        )

    actors = tuple(
        ProcessId.SOURCE if i == insert_at else ProcessId.DEST for i in range(horizon)
    )
    delivery = max(insert_at, t_d) + 1
    deliver_indices = {delivery} if delivery <= horizon - 1 else set()
    prime = run_deliver_all_at(
        algorithm,
        {ProcessId.SOURCE: 1 - w, ProcessId.DEST: None},
        actors,
        deliver_indices,
        context,
    )
    if decision_time(prime) != t_d:
        raise HarnessError("insertion perturbed the destination's decision time")

    certificates = (
        certify_dest_views("alpha0", runs[0], "alpha1", runs[1], t_d),
        certify_dest_views(f"alpha{1 - w}", base, "alpha_prime", prime, t_d),
    )
    if not all(c.equal for c in certificates):
        raise HarnessError("indistinguishability certificate failed during construction")

    interpretation = InitialCrashInterpretation.BY_FAILURE_PATTERN
    verdicts = {
        "alpha0": check_sdd(runs[0], interpretation),
        "alpha1": check_sdd(runs[1], interpretation),
        "alpha_prime": check_sdd(prime, interpretation),
    }
    if verdicts["alpha_prime"].validity is not ValidityStatus.VIOLATED:
        raise HarnessError("expected Validity violation did not reconfirm")

    delayed = (
        f"delivered at index {delivery}" if deliver_indices else "never delivered in the prefix"
    )
    narrative = (
        f"The source crashes at t_c={t_c} (so it is not initially crashed "
        f"under the pattern reading) and takes no step before t_c in alpha_0 "
        f"and alpha_1; the histories depend only on the pattern, so the "
        f"destination decides {w} at t_d={t_d} in both. In alpha_prime the "
        f"source steps at index {insert_at} < t_c and its message is delayed "
        f"past t_d ({delayed}); the destination's view up to t_d is unchanged, "
        f"so it decides {w} against input {1 - w}, violating Validity. The "
        f"construction never inspects the detector's semantics."
    )
    return ImpossibilityReport(
        scenario_traces=(
            ("alpha0", runs[0]),
            ("alpha1", runs[1]),
            ("alpha_prime", prime),
        ),
        certificates=certificates,
        verdicts=tuple(verdicts.items()),
        violated_property="validity",
        violating_trace="alpha_prime",
        violation_index=verdicts["alpha_prime"].validity_index,
        interpretation=interpretation,
        narrative=narrative,
    )


def fd_impossibility_step_interp(
    algorithm: AlgorithmSpec,
    fd_history_source: HistorySource,
    horizon: int,
    t_c: int = 3,
) -> ImpossibilityReport:
    """Initial crash read off step activity (the source takes no steps).

    beta_v: the source is stepless with a failure pattern that keeps it
    uncrashed before some t_c > 0; both runs share step times, pattern, and
    history, so the destination decides the same (t_d, w) in both, and the
    run with input 1 - w violates Validity.

    The confirmation is issued under the pattern reading, which is what the
    construction's prose appeals to; a literal step-activity reading would
    instead call the stepless source initially crashed and Validity vacuous.
    The narrative surfaces that tension without resolving it.
    """
    runs, context, t_d, w = _paired_fd_runs(algorithm, fd_history_source, horizon, t_c)

    certificate = certify_dest_views("beta0", runs[0], "beta1", runs[1], t_d)
    if not certificate.equal:
        raise HarnessError("indistinguishability certificate failed during construction")

    interpretation = InitialCrashInterpretation.BY_FAILURE_PATTERN
    verdicts = {
        "beta0": check_sdd(runs[0], interpretation),
        "beta1": check_sdd(runs[1], interpretation),
    }
    violating = f"beta{1 - w}"
    if verdicts[violating].validity is not ValidityStatus.VIOLATED:
        raise HarnessError("expected Validity violation did not reconfirm")

    step_reading = check_sdd(
        runs[1 - w], InitialCrashInterpretation.BY_STEP_ACTIVITY
    ).validity.value
    narrative = (
        f"The source takes no steps; the pattern keeps it uncrashed before "
        f"t_c={t_c}, so under the pattern-based reading it did not crash "
        f"initially. Both runs share step times, pattern, and history, so the "
        f"destination decides {w} at t_d={t_d} in both; with input {1 - w} "
        f"this violates Validity ({violating}). Unresolved tension: a literal "
        f"step-activity reading makes the stepless source initially crashed, "
        f"rendering Validity {step_reading} on the same trace."
    )
    return ImpossibilityReport(
        scenario_traces=(("beta0", runs[0]), ("beta1", runs[1])),
        certificates=(certificate,),
        verdicts=tuple(verdicts.items()),
        violated_property="validity",
        violating_trace=violating,
        violation_index=verdicts[violating].validity_index,
        interpretation=interpretation,
        narrative=narrative,
    )
