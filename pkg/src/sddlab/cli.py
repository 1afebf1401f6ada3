"""Command-line scenario runner.

Subcommands: ``run`` (single execution, emit trace), ``enumerate`` (the
exhaustive oracle), ``metric`` (pairwise distance matrix over a trace
directory), ``closure`` (family + non-closedness witness), ``sdd-check``
(replay a trace and report the problem verdicts), ``theorem3``,
``fd-pattern``, ``fd-step`` (the impossibility harnesses).

Exit codes: 0 success, 1 property violation found in the checked artifact,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Mapping, Optional

from .enumerator import (
    BudgetExceeded,
    ScenarioConfig,
    enumerate_schedules,
    sweep_patterns,
)
from .harnesses import (
    BoundedDecisionTime,
    HarnessError,
    ImpossibilityReport,
    NoDecisionWithinHorizon,
    all_dest_schedule,
    gst_family,
    make_randomized_history_source,
    perfect_history_source,
    fd_impossibility_pattern_interp,
    fd_impossibility_step_interp,
    reverify_report,
    theorem3_quadruple,
)
from .kernel import (
    ExecutionPrefix,
    KernelError,
    ProcessId,
    StepDirective,
    apply_step,
    initial_configuration,
    run,
)
from .models import (
    FailureContext,
    FailurePattern,
    ModelKind,
    ModelParams,
    ParamMismatch,
    check_admissible,
)
from .sdd import (
    InitialCrashInterpretation,
    ValidityStatus,
    IntegrityStatus,
    algorithm_from_registry,
    check_sdd,
)
from .topology import closure_witness, convergence_profile, validate_witness
from .trace import TRACE_SUFFIX, TraceError, load_trace, replay_trace, write_trace

OUT_DIR_ENV = "SDDLAB_OUT"


class ConfigError(Exception):
    pass


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(config, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    return config


def _model_from_config(config: Mapping[str, Any]) -> ModelParams:
    raw = config.get("model", {"kind": "async"})
    kind = raw.get("kind")
    try:
        model_kind = ModelKind(kind)
    except ValueError:
        raise ConfigError(f"unknown model kind {kind!r}") from None
    if model_kind is ModelKind.ASYNC:
        return ModelParams.asynchronous()
    if model_kind is ModelKind.SYNCHRONOUS:
        return ModelParams.synchronous(
            delta=int(raw.get("delta", 1)), phi=int(raw.get("phi", 2))
        )
    if "gst" not in raw:
        raise ConfigError("gst model requires a 'gst' field")
    return ModelParams.gst_model(
        int(raw["gst"]), delta=int(raw.get("delta", 1)), phi=int(raw.get("phi", 2))
    )


def _algorithm_from_config(config: Mapping[str, Any], model: ModelParams):
    raw = config.get("algorithm", "sync-solver")
    if isinstance(raw, str):
        name, options = raw, {}
    else:
        options = dict(raw)
        name = options.pop("name", None)
        if name is None:
            raise ConfigError("algorithm object requires a 'name' field")
    if name == "sync-solver" and model.kind is not ModelKind.ASYNC:
        options.setdefault("delta", model.delta)
        options.setdefault("phi", model.phi)
    try:
        return algorithm_from_registry(name, options), name, options
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc


def _pattern_from_config(config: Mapping[str, Any]) -> FailurePattern:
    raw = config.get("failure", {})
    if raw == "sweep":
        raise ConfigError("failure sweep is only valid for 'enumerate'")
    return FailurePattern.of(source=raw.get("source"), dest=raw.get("dest"))


def _interpretation_from_config(config: Mapping[str, Any]) -> InitialCrashInterpretation:
    raw = config.get("interpretation", "step-activity")
    try:
        return InitialCrashInterpretation(raw)
    except ValueError:
        raise ConfigError(f"unknown interpretation {raw!r}") from None


def _out_dir(args: argparse.Namespace, config: Mapping[str, Any]) -> Path:
    out = args.out or config.get("out") or os.environ.get(OUT_DIR_ENV) or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_document(out_dir: Path, name: str, document: Mapping[str, Any]) -> Path:
    path = out_dir / f"{name}.json"
    path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _horizon(args: argparse.Namespace, config: Mapping[str, Any], default: int) -> int:
    if args.horizon is not None:
        return args.horizon
    return int(config.get("horizon", default))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _lockstep_actors(pattern: FailurePattern, horizon: int) -> list[ProcessId]:
    actors = []
    for i in range(horizon):
        preferred = ProcessId.SOURCE if i % 2 == 0 else ProcessId.DEST
        if pattern.crashed_at(preferred, i):
            preferred = preferred.other
        if pattern.crashed_at(preferred, i):
            raise ConfigError(
                f"both processes are crashed at index {i}; shrink the horizon"
            )
        actors.append(preferred)
    return actors


def _prefix_from_schedule_config(
    config: Mapping[str, Any], algorithm, pattern: FailurePattern, horizon: int
) -> ExecutionPrefix:
    inputs = {
        ProcessId.SOURCE: config.get("inputs", {}).get("source", 0),
        ProcessId.DEST: config.get("inputs", {}).get("dest"),
    }
    context = FailureContext(pattern=pattern)
    spec = config.get("schedule", "lockstep")
    if spec == "lockstep":
        actors = _lockstep_actors(pattern, horizon)
        current = initial_configuration(algorithm, inputs)
        directives = []
        for actor in actors:
            deliver = frozenset(m.unique_tag for m in current.buffer_of(actor))
            directive = StepDirective(actor=actor, deliver=deliver)
            current, _ = apply_step(current, directive, algorithm, context)
            directives.append(directive)
        return run(algorithm, inputs, tuple(directives), context)
    if spec == "all-dest":
        return run(algorithm, inputs, all_dest_schedule(horizon), context)
    if not isinstance(spec, list):
        raise ConfigError(f"unknown schedule spec {spec!r}")
    current = initial_configuration(algorithm, inputs)
    directives = []
    for i, step in enumerate(spec[:horizon]):
        actor = ProcessId(step.get("actor", "dest"))
        deliver_spec = step.get("deliver", "none")
        if deliver_spec == "all":
            deliver = frozenset(m.unique_tag for m in current.buffer_of(actor))
        elif deliver_spec == "none":
            deliver = frozenset()
        else:
            deliver = frozenset(int(t) for t in deliver_spec)
        directive = StepDirective(actor=actor, deliver=deliver)
        current, _ = apply_step(current, directive, algorithm, context)
        directives.append(directive)
    return run(algorithm, inputs, tuple(directives), context)


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    model = _model_from_config(config)
    (algorithm, name, options) = _algorithm_from_config(config, model)
    pattern = _pattern_from_config(config)
    horizon = _horizon(args, config, 6)
    out_dir = _out_dir(args, config)

    prefix = _prefix_from_schedule_config(config, algorithm, pattern, horizon)
    trace_path = write_trace(prefix, out_dir, config.get("name", "run"), name, options)
    verdict = check_sdd(prefix, _interpretation_from_config(config))
    admissibility = check_admissible(prefix, model)
    document = {
        "trace": trace_path.name,
        "sdd": verdict.label(),
        "decision_index": verdict.decision_index,
        "admissibility": admissibility.verdict.value,
        "violations": list(admissibility.violations),
    }
    _write_document(out_dir, f"{config.get('name', 'run')}.report", document)
    print(f"trace written to {trace_path}")
    print(f"sdd verdict: {verdict.label()}")
    if verdict.has_safety_violation or admissibility.violated:
        return 1
    return 0


def cmd_enumerate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    model = _model_from_config(config)
    (algorithm, name, options) = _algorithm_from_config(config, model)
    horizon = _horizon(args, config, 6)
    out_dir = _out_dir(args, config)
    raw_failure = config.get("failure", {})
    if raw_failure == "sweep":
        patterns = sweep_patterns(horizon)
    else:
        patterns = (FailurePattern.of(source=raw_failure.get("source"), dest=raw_failure.get("dest")),)
    scenario = ScenarioConfig(
        algorithm=algorithm,
        input_bit=int(config.get("inputs", {}).get("source", 0)),
        params=model,
        horizon=horizon,
        patterns=patterns,
        interpretation=_interpretation_from_config(config),
        budget=args.budget or int(config.get("budget", 500_000)),
        seed=args.seed or int(config.get("seed", 0)),
        algorithm_name=name,
        algorithm_options=options,
    )
    summary = enumerate_schedules(scenario)
    for counterexample in summary.counterexamples:
        write_trace(
            counterexample.prefix,
            out_dir,
            f"counterexample-{counterexample.ordinal:04d}",
            name,
            options,
        )
    _write_document(out_dir, config.get("name", "enumeration"), summary.document())
    print(
        f"explored {summary.schedules_explored} schedules, "
        f"{len(summary.counterexamples)} counterexamples"
    )
    return 1 if summary.counterexamples else 0


def cmd_metric(args: argparse.Namespace) -> int:
    directory = Path(args.traces)
    paths = sorted(directory.glob(f"*{TRACE_SUFFIX}"))
    if not paths:
        print(f"no traces found under {directory}", file=sys.stderr)
        return 2
    loaded = []
    for path in paths:
        meta, records = load_trace(path)
        loaded.append(
            (
                path.name.replace(TRACE_SUFFIX, ""),
                meta,
                [record["state_digest"] for record in records],
            )
        )
    matrix = {}
    for name_a, meta_a, digests_a in loaded:
        row = {}
        for name_b, meta_b, digests_b in loaded:
            if (
                meta_a["provenance_digest"] is not None
                and meta_a["provenance_digest"] == meta_b["provenance_digest"]
            ):
                row[name_b] = {"kind": "exact", "zero": True, "exponent": None}
                continue
            if meta_a["initial_digest"] != meta_b["initial_digest"]:
                row[name_b] = {"kind": "exact", "zero": False, "exponent": 0}
                continue
            common = min(len(digests_a), len(digests_b))
            exponent = None
            for i in range(common):
                if digests_a[i] != digests_b[i]:
                    exponent = i + 1
                    break
            if exponent is None:
                row[name_b] = {"kind": "at-most", "zero": False, "exponent": common}
            else:
                row[name_b] = {"kind": "exact", "zero": False, "exponent": exponent}
        matrix[name_a] = row
    out_dir = _out_dir(args, {})
    _write_document(out_dir, args.name, {"metric_matrix": matrix})
    print(f"metric matrix over {len(loaded)} traces written")
    return 0


def cmd_closure(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    model = _model_from_config(config)
    if model.kind is not ModelKind.GST:
        raise ConfigError("closure scenarios require the gst model")
    (algorithm, name, options) = _algorithm_from_config(config, model)
    horizon = _horizon(args, config, 16)
    k_max = int(config.get("k_max", 8))
    input_bit = int(config.get("inputs", {}).get("source", 1))
    out_dir = _out_dir(args, config)

    bundle = gst_family(
        algorithm, input_bit, k_max=k_max, horizon=horizon,
        delta=model.delta, phi=model.phi,
    )
    profile = convergence_profile(bundle.family, bundle.limit, k_max)
    witness = closure_witness(bundle.family, bundle.limit, bundle.params, k_max)
    document = {
        "description": bundle.family.description,
        "converging_at_horizon": profile.converging_at_horizon,
        "per_k": [
            {
                "k": k,
                "kind": result.kind.value,
                "exponent": result.exponent,
                "agreement": profile.agreements[k],
            }
            for k, result in enumerate(profile.results)
        ],
        "witness": None
        if witness is None
        else {
            "limit_violation": witness.limit_violation,
            "limit_checks": [list(check) for check in witness.limit_checks],
            "agreement": [list(pair) for pair in witness.agreement],
            "revalidates": validate_witness(witness, bundle.params, k_max),
        },
    }
    _write_document(out_dir, config.get("name", "closure"), document)
    write_trace(bundle.limit, out_dir, "limit", name, options)
    print(
        "witness found" if witness is not None else "no witness at this horizon"
    )
    return 0


def cmd_sdd_check(args: argparse.Namespace) -> int:
    meta, _ = load_trace(args.trace)
    algorithm = algorithm_from_registry(meta["algorithm"], meta["algorithm_options"])
    prefix = replay_trace(args.trace, algorithm)
    interpretation = InitialCrashInterpretation(args.interpretation)
    verdict = check_sdd(prefix, interpretation)
    print(f"integrity: {verdict.integrity.value}"
          + (f" at {verdict.integrity_index}" if verdict.integrity_index is not None else ""))
    print(f"validity: {verdict.validity.value}"
          + (f" at {verdict.validity_index}" if verdict.validity_index is not None else ""))
    print(f"termination: {verdict.termination.value}"
          + (f" at {verdict.decision_index}" if verdict.decision_index is not None else ""))
    if (
        verdict.integrity is IntegrityStatus.VIOLATED
        or verdict.validity is ValidityStatus.VIOLATED
    ):
        return 1
    return 0


def _write_report(
    report: ImpossibilityReport, out_dir: Path, name: str, algorithm_name: str, options
) -> None:
    document = report.document()
    document["reverifies"] = reverify_report(report)
    _write_document(out_dir, name, document)
    for trace_name, prefix in report.scenario_traces:
        write_trace(prefix, out_dir, f"{name}-{trace_name}", algorithm_name, options)


def cmd_theorem3(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    model = _model_from_config(config)
    (algorithm, name, options) = _algorithm_from_config(config, model)
    horizon = _horizon(args, config, 12)
    out_dir = _out_dir(args, config)
    doc_name = config.get("name", "theorem3")
    try:
        report = theorem3_quadruple(algorithm, model, horizon)
    except BoundedDecisionTime as exc:
        _write_document(
            out_dir,
            doc_name,
            {"outcome": "bounded-decision-time", "bound": exc.bound, "message": str(exc)},
        )
        print(f"bounded decision time: {exc}")
        return 0
    _write_report(report, out_dir, doc_name, name, options)
    print(f"violated property: {report.violated_property} in {report.violating_trace}")
    return 0


def _fd_source(config: Mapping[str, Any], horizon: int):
    raw = config.get("fd", {"kind": "perfect"})
    kind = raw.get("kind", "perfect")
    if kind == "perfect":
        return perfect_history_source(horizon)
    if kind == "randomized":
        return make_randomized_history_source(int(raw.get("seed", 0)), horizon)
    raise ConfigError(f"unknown fd source kind {kind!r}")


def _cmd_fd(args: argparse.Namespace, harness) -> int:
    config = _load_config(args.config)
    model = _model_from_config(config)
    (algorithm, name, options) = _algorithm_from_config(config, model)
    horizon = _horizon(args, config, 10)
    t_c = int(config.get("t_c", 3))
    out_dir = _out_dir(args, config)
    doc_name = config.get("name", args.command)
    try:
        report = harness(algorithm, _fd_source(config, horizon), horizon, t_c=t_c)
    except NoDecisionWithinHorizon as exc:
        _write_document(
            out_dir, doc_name, {"outcome": "no-decision-within-horizon", "message": str(exc)}
        )
        print(f"inconclusive: {exc}")
        return 0
    _write_report(report, out_dir, doc_name, name, options)
    print(f"violated property: {report.violated_property} in {report.violating_trace}")
    return 0


def cmd_fd_pattern(args: argparse.Namespace) -> int:
    return _cmd_fd(args, fd_impossibility_pattern_interp)


def cmd_fd_step(args: argparse.Namespace) -> int:
    return _cmd_fd(args, fd_impossibility_step_interp)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sddlab",
        description="Two-process decision-problem simulator and execution-space topology toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config: bool = True) -> None:
        if config:
            p.add_argument("--config", required=True, help="scenario config (JSON)")
        p.add_argument("--out", default=None, help=f"output directory (default: ${OUT_DIR_ENV} or ./out)")
        p.add_argument("--horizon", type=int, default=None, help="override the config horizon")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--budget", type=int, default=None, help="override the config budget")

    common(sub.add_parser("run", help="single execution, emit trace"))
    common(sub.add_parser("enumerate", help="exhaustive schedule enumeration"))

    metric = sub.add_parser("metric", help="pairwise distance matrix over a trace directory")
    metric.add_argument("--traces", required=True, help="directory of *.trace.jsonl files")
    metric.add_argument("--name", default="metric", help="output document name")
    common(metric, config=False)

    common(sub.add_parser("closure", help="convergence profile and non-closedness witness"))

    check = sub.add_parser("sdd-check", help="replay a trace and report problem verdicts")
    check.add_argument("--trace", required=True, help="path to a *.trace.jsonl file")
    check.add_argument(
        "--interpretation",
        default="step-activity",
        choices=[i.value for i in InitialCrashInterpretation],
    )
    common(check, config=False)

    common(sub.add_parser("theorem3", help="four-execution contradiction harness"))
    common(sub.add_parser("fd-pattern", help="failure-detector harness, pattern reading"))
    common(sub.add_parser("fd-step", help="failure-detector harness, step-activity reading"))
    return parser


_COMMANDS = {
    "run": cmd_run,
    "enumerate": cmd_enumerate,
    "metric": cmd_metric,
    "closure": cmd_closure,
    "sdd-check": cmd_sdd_check,
    "theorem3": cmd_theorem3,
    "fd-pattern": cmd_fd_pattern,
    "fd-step": cmd_fd_step,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (
        ConfigError,
        BudgetExceeded,
        TraceError,
        KernelError,
        HarnessError,
        ParamMismatch,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
