"""The prefix metric on executions and the analyses built on it.

Distances are dyadic rationals 2^-N kept as integer exponents; nothing here
touches floating point.  Because the toolkit only ever sees finite prefixes
of infinite executions, metric verdicts are split into ``Exact`` values and
sound ``AtMost`` upper bounds, and convergence/closure verdicts state what
was established at the probed horizon rather than pretending to a proof.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .kernel import (
    AlgorithmSpec,
    ExecutionPrefix,
    StepDirective,
    extend_prefix,
    PROCESSES,
)
from .models import ModelKind, ModelParams, check_admissible


class EmptyPrefix(Exception):
    pass


class NonPositiveEpsilon(Exception):
    pass


class NotConverging(Exception):
    pass


class MetricKind(Enum):
    EXACT = "exact"
    AT_MOST = "at-most"


@dataclass(frozen=True, slots=True)
class MetricResult:
    """Either the exact distance 2^-exponent (or exactly 0), or the sound
    bound "the compared prefixes agree entirely, so d <= 2^-exponent"."""

    kind: MetricKind
    exponent: Optional[int]
    zero: bool = False

    @classmethod
    def exact(cls, exponent: int) -> "MetricResult":
        return cls(kind=MetricKind.EXACT, exponent=exponent)

    @classmethod
    def exact_zero(cls) -> "MetricResult":
        return cls(kind=MetricKind.EXACT, exponent=None, zero=True)

    @classmethod
    def at_most(cls, exponent: int) -> "MetricResult":
        return cls(kind=MetricKind.AT_MOST, exponent=exponent)

    @property
    def value(self) -> Fraction:
        """Exact value for EXACT results, the upper bound for AT_MOST."""
        if self.zero:
            return Fraction(0)
        return Fraction(1, 2 ** self.exponent)

    @property
    def guaranteed_agreement(self) -> Optional[int]:
        """Number of leading configurations known to coincide (None = all
        compared, i.e. agreement saturated the horizon)."""
        if self.zero or self.kind is MetricKind.AT_MOST:
            return None
        return self.exponent

    @property
    def saturated(self) -> bool:
        return self.zero or self.kind is MetricKind.AT_MOST


def metric_prefix(a: ExecutionPrefix, b: ExecutionPrefix) -> MetricResult:
    """Prefix distance: 2^-N with N the first index where configurations
    differ.

    Exact zero is claimed only on provenance equality: two distinct infinite
    executions can share any finite prefix, so configuration equality alone
    never proves d = 0 and yields an AtMost bound instead.
    """
    if not a.configurations or not b.configurations:
        raise EmptyPrefix("cannot compare a prefix without configurations")
    if a.provenance is not None and a.provenance == b.provenance:
        return MetricResult.exact_zero()
    common = min(a.horizon, b.horizon)
    for n in range(common + 1):
        if a.configurations[n] != b.configurations[n]:
            return MetricResult.exact(n)
    return MetricResult.at_most(common)


class Membership(Enum):
    IN = "in"
    OUT = "out"
    UNKNOWN = "unknown"


def ball_membership(
    center: ExecutionPrefix, epsilon: Fraction, candidate: ExecutionPrefix
) -> Membership:
    """Membership of ``candidate`` in the open ball of radius ``epsilon``
    around ``center`` (strict inequality, per the ball definition)."""
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise NonPositiveEpsilon(f"epsilon must be positive, got {epsilon}")
    result = metric_prefix(center, candidate)
    if result.kind is MetricKind.EXACT:
        return Membership.IN if result.value < epsilon else Membership.OUT
    if result.value < epsilon:
        return Membership.IN
    return Membership.UNKNOWN


@dataclass(frozen=True)
class ExecutionFamily:
    """An indexed family of prefixes standing in for a sequence of
    executions; the generator must be deterministic in k."""

    generator: Callable[[int], ExecutionPrefix]
    family_horizon: Callable[[int], int]
    description: str
    member_params: Optional[Callable[[int], ModelParams]] = None


@dataclass(frozen=True, slots=True)
class ConvergenceProfile:
    results: tuple[MetricResult, ...]
    agreements: tuple[Optional[int], ...]
    converging_at_horizon: bool

    def result(self, k: int) -> MetricResult:
        return self.results[k]


def convergence_profile(
    family: ExecutionFamily, limit: ExecutionPrefix, k_max: int
) -> ConvergenceProfile:
    """Distance of each family member to the candidate limit.

    "Converging at horizon" is the desk-scale stand-in for convergence: some
    member agrees with the limit over the whole compared range, or the
    guaranteed agreement lengths keep setting new records up to the last
    member.  A constant profile or one that stalls before k_max is not
    declared converging.
    """
    results = []
    for k in range(k_max + 1):
        member = family.generator(k)
        if limit.horizon < member.horizon:
            raise ValueError(
                f"limit horizon {limit.horizon} is shorter than member {k}'s"
            )
        results.append(metric_prefix(member, limit))
    agreements = tuple(r.guaranteed_agreement for r in results)

    converging = any(r.saturated for r in results)
    if not converging:
        records = []
        best = -1
        for k, g in enumerate(agreements):
            if g > best:
                records.append(k)
                best = g
        converging = len(records) >= 2 and records[-1] == k_max
    return ConvergenceProfile(
        results=tuple(results), agreements=agreements, converging_at_horizon=converging
    )


@dataclass(frozen=True)
class NonClosedWitness:
    """A converging family of admissible prefixes whose limit violates the
    model: the constructive refutation of closedness."""

    family: ExecutionFamily
    limit: ExecutionPrefix
    agreement: tuple[tuple[int, Optional[int]], ...]
    limit_violation: str
    limit_checks: tuple[tuple[int, int, str], ...]  # (gst, index, rule) per candidate


def _limit_gst_sweep(
    limit: ExecutionPrefix, params: ModelParams
) -> Optional[tuple[tuple[int, int, str], ...]]:
    """Check the limit against every candidate stabilization time whose
    violation would still be visible within the horizon; None if some
    candidate admits it."""
    checks = []
    for gst in range(0, limit.horizon - params.delta):
        report = check_admissible(
            limit, ModelParams.gst_model(gst, delta=params.delta, phi=params.phi)
        )
        if not report.violations:
            return None
        index, rule = report.violations[0]
        checks.append((gst, index, rule))
    if not checks:
        return None
    return tuple(checks)


def closure_witness(
    family: ExecutionFamily,
    limit: ExecutionPrefix,
    params: ModelParams,
    k_max: int,
) -> Optional[NonClosedWitness]:
    """Produce a non-closedness witness, or None.

    Requires the family to be converging at the horizon.  A witness exists
    iff every member up to k_max is admissible (each against its own member
    parameters when the family carries them) while the limit violates the
    model; for the GST model the limit must fail for every candidate
    stabilization time refutable within the horizon.
    """
    profile = convergence_profile(family, limit, k_max)
    if not profile.converging_at_horizon:
        raise NotConverging("family does not converge to the limit at this horizon")

    for k in range(k_max + 1):
        member = family.generator(k)
        member_params = (
            family.member_params(k) if family.member_params is not None else params
        )
        if check_admissible(member, member_params).violations:
            return None

    if params.kind is ModelKind.GST:
        checks = _limit_gst_sweep(limit, params)
        if checks is None:
            return None
        limit_violation = checks[-1][2]
    else:
        report = check_admissible(limit, params)
        if not report.violations:
            return None
        index, limit_violation = report.violations[0]
        checks = ((params.gst or 0, index, limit_violation),)

    return NonClosedWitness(
        family=family,
        limit=limit,
        agreement=tuple(enumerate(profile.agreements)),
        limit_violation=limit_violation,
        limit_checks=checks,
    )


def validate_witness(
    witness: NonClosedWitness, params: ModelParams, k_max: int
) -> bool:
    """Independent re-check of an emitted witness: members admissible,
    agreement records strictly increasing, limit still violating."""
    finite = [g for _, g in witness.agreement if g is not None]
    if finite and any(b <= a for a, b in zip(finite, finite[1:])):
        return False
    try:
        rebuilt = closure_witness(witness.family, witness.limit, params, k_max)
    except NotConverging:
        return False
    return rebuilt is not None and rebuilt.limit_checks == witness.limit_checks


class MonitorVerdict(Enum):
    VIOLATED = "violated"
    SATISFIED = "satisfied"
    PENDING = "pending"


@dataclass(frozen=True, slots=True)
class Classification:
    verdict: MonitorVerdict
    index: Optional[int] = None


@dataclass(frozen=True)
class PropertyMonitor:
    """A prefix classifier.  For safety-style monitors, ViolatedAt must be
    prefix-stable: once reported on a prefix, every extension must report
    the same violation; that stability is exactly what makes the property a
    closed set in the prefix topology."""

    name: str
    classify: Callable[[ExecutionPrefix], Classification]


def monitor_is_prefix_stable(
    monitor: PropertyMonitor,
    prefixes: Iterable[tuple[ExecutionPrefix, Iterable[ExecutionPrefix]]],
) -> bool:
    """True iff every ViolatedAt verdict persists, with the same index,
    under every supplied extension."""
    for prefix, extensions in prefixes:
        verdict = monitor.classify(prefix)
        if verdict.verdict is not MonitorVerdict.VIOLATED:
            continue
        for extension in extensions:
            extended = monitor.classify(extension)
            if extended != verdict:
                return False
    return True


@dataclass(frozen=True, slots=True)
class ExtensionSearch:
    found: bool
    suffix: Optional[tuple[StepDirective, ...]]
    explored: int


def _candidate_directives(prefix: ExecutionPrefix) -> list[StepDirective]:
    index = prefix.horizon
    candidates = []
    for actor in PROCESSES:
        if prefix.failure_context.crashed_at(actor, index):
            continue
        tags = sorted(m.unique_tag for m in prefix.final.buffer_of(actor))
        for mask in range(1 << len(tags)):
            deliver = frozenset(t for bit, t in enumerate(tags) if mask >> bit & 1)
            candidates.append(StepDirective(actor=actor, deliver=deliver))
    return candidates


def liveness_extendable(
    monitor: PropertyMonitor,
    prefix: ExecutionPrefix,
    algorithm: AlgorithmSpec,
    params: ModelParams,
    budget: int,
) -> ExtensionSearch:
    """Bounded breadth-first search for an admissible schedule suffix whose
    extension satisfies the monitor.

    This is the executable content of denseness at desk scale: a liveness
    property should be reachable from any prefix, and the verdict carries
    the search budget so a NotFound is never mistaken for a refutation.
    """
    if monitor.classify(prefix).verdict is MonitorVerdict.SATISFIED:
        return ExtensionSearch(found=True, suffix=(), explored=0)
    explored = 0
    queue: deque[tuple[ExecutionPrefix, tuple[StepDirective, ...]]] = deque([(prefix, ())])
    while queue:
        base, suffix = queue.popleft()
        if len(suffix) >= budget:
            continue
        for directive in _candidate_directives(base):
            extended = extend_prefix(base, directive, algorithm)
            explored += 1
            if check_admissible(extended, params).violated:
                continue
            new_suffix = suffix + (directive,)
            if monitor.classify(extended).verdict is MonitorVerdict.SATISFIED:
                return ExtensionSearch(found=True, suffix=new_suffix, explored=explored)
            queue.append((extended, new_suffix))
    return ExtensionSearch(found=False, suffix=None, explored=explored)
