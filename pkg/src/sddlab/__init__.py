"""sddlab: a deterministic two-process execution simulator and an
execution-space topology toolkit for the strongly dependent decision
problem."""

from .kernel import (
    AlgorithmSpec,
    C1Report,
    Configuration,
    ExecutionPrefix,
    LocalState,
    MessageRecord,
    ProcessId,
    StepDirective,
    StepKind,
    StepOutcome,
    apply_step,
    c1_transform,
    decision_time,
    extend_prefix,
    initial_configuration,
    is_c1_compliant,
    run,
)
from .models import (
    AdmissibilityReport,
    AdmissibilityVerdict,
    FailureContext,
    FailurePattern,
    FDHistory,
    ModelKind,
    ModelParams,
    check_admissible,
    fd_history_consistent,
    perfect_fd_history,
)
from .topology import (
    Classification,
    ConvergenceProfile,
    ExecutionFamily,
    Membership,
    MetricKind,
    MetricResult,
    MonitorVerdict,
    NonClosedWitness,
    PropertyMonitor,
    ball_membership,
    closure_witness,
    convergence_profile,
    liveness_extendable,
    metric_prefix,
    monitor_is_prefix_stable,
    validate_witness,
)
from .sdd import (
    InitialCrashInterpretation,
    IntegrityStatus,
    SDDVerdict,
    TerminationStatus,
    ValidityStatus,
    algorithm_from_registry,
    check_sdd,
    integrity_monitor,
    make_c1_decider,
    make_fd_suspicion_decider,
    make_timeout_decider,
    sync_sdd_solver,
    termination_monitor,
    validity_monitor,
)
from .harnesses import (
    BoundedDecisionTime,
    ImpossibilityReport,
    IndistinguishabilityCertificate,
    KindMismatchUnconstructible,
    NoDecisionWithinHorizon,
    NotC1Compliant,
    fd_impossibility_pattern_interp,
    fd_impossibility_step_interp,
    gst_family,
    make_randomized_history_source,
    mirror_schedule,
    perfect_history_source,
    reverify_report,
    theorem3_quadruple,
    unbounded_decision_family,
)
from .enumerator import (
    BudgetExceeded,
    EnumerationSummary,
    ScenarioConfig,
    admissible_prefixes,
    enumerate_schedules,
    sweep_patterns,
)

__version__ = "0.1.0"
