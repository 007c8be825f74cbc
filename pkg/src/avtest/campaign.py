"""Campaign configuration, suite assembly, execution and artifact writing."""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .planners import BrakeConfig, PerceptionConfig, PlannerSettings, available_planners, make_planner
from .report import (
    CampaignReport, OutcomeRecord, aggregate, export_radar_data, mt_csv, parameters_csv, summary_csv,
)
from .scenario import ClassId, parse_class_id
from .simkernel import EgoDynamics, SimulationLimits, Verdict, run_simulation
from .testgen import (
    Role, TestCase, class_spec, derive_suite_follow_ups, enumerate_test_cases, is_canonical_source,
)


class ConfigError(ValueError):
    pass


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(p.title() for p in rest)


def _section_to_dict(obj) -> Dict[str, Any]:
    return {_camel(k): v for k, v in asdict(obj).items()}


def _section_from_dict(cls, d: Optional[Mapping[str, Any]], label: str):
    if d is None:
        return cls()
    names = {_camel(f.name): f.name for f in fields(cls)}
    unknown = set(d) - set(names)
    if unknown:
        raise ConfigError(f"unknown {label} keys: {sorted(unknown)}")
    try:
        return cls(**{names[k]: float(v) for k, v in d.items()})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid {label}: {e}") from None


@dataclass(frozen=True)
class CampaignConfig:
    """Everything that defines a campaign. Only some fields affect outcomes."""

    classes: Tuple[ClassId, ...] = tuple(ClassId)
    planner: str = "limited"
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    brake: BrakeConfig = field(default_factory=BrakeConfig)
    dynamics: EgoDynamics = field(default_factory=EgoDynamics)
    limits: SimulationLimits = field(default_factory=SimulationLimits)
    reaction_delay_steps: int = 1
    output_dir: str = "campaign_out"
    jobs: int = 1
    seed: int = 0
    mt_enabled: Tuple[ClassId, ...] = (ClassId.D,)
    format: str = "csv"

    def __post_init__(self):
        if not self.classes:
            raise ConfigError("classes must not be empty")
        if isinstance(self.jobs, bool) or not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError(f"jobs must be an integer >= 1, got {self.jobs!r}")
        if self.reaction_delay_steps < 0:
            raise ConfigError("reactionDelaySteps must be >= 0")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")

    @property
    def settings(self) -> PlannerSettings:
        return PlannerSettings(self.dynamics, self.perception, self.brake, self.reaction_delay_steps)

    def outcome_fields(self) -> Dict[str, Any]:
        """The part of the config that can change a run's outcome."""
        return {
            "planner": self.planner,
            "perception": _section_to_dict(self.perception),
            "brake": _section_to_dict(self.brake),
            "dynamics": _section_to_dict(self.dynamics),
            "limits": {"dt": self.limits.dt, "maxSimTime": self.limits.max_sim_time},
            "reactionDelaySteps": self.reaction_delay_steps,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.outcome_fields(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_dict(self) -> Dict[str, Any]:
        d = self.outcome_fields()
        d.update(
            classes=[c.value for c in self.classes],
            mtEnabled=[c.value for c in self.mt_enabled],
            outputDir=self.output_dir,
            jobs=self.jobs,
            format=self.format,
        )
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CampaignConfig":
        known = {"classes", "planner", "perception", "brake", "dynamics", "limits",
                 "reactionDelaySteps", "outputDir", "jobs", "seed", "mtEnabled", "format"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw: Dict[str, Any] = {}
        if "classes" in d:
            kw["classes"] = parse_classes(d["classes"])
        if "mtEnabled" in d:
            kw["mt_enabled"] = parse_classes(d["mtEnabled"]) if d["mtEnabled"] else ()
        for key, attr in (("planner", "planner"), ("outputDir", "output_dir"), ("format", "format")):
            if key in d:
                kw[attr] = str(d[key])
        for key, attr in (("jobs", "jobs"), ("seed", "seed"), ("reactionDelaySteps", "reaction_delay_steps")):
            if key in d:
                v = d[key]
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ConfigError(f"{key} must be an integer, got {v!r}")
                kw[attr] = v
        kw["perception"] = _section_from_dict(PerceptionConfig, d.get("perception"), "perception")
        kw["brake"] = _section_from_dict(BrakeConfig, d.get("brake"), "brake")
        kw["dynamics"] = _section_from_dict(EgoDynamics, d.get("dynamics"), "dynamics")
        kw["limits"] = _section_from_dict(SimulationLimits, d.get("limits"), "limits")
        return cls(**kw)

    @classmethod
    def load(cls, path: os.PathLike) -> "CampaignConfig":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from None


def parse_classes(value: Any) -> Tuple[ClassId, ...]:
    """Accept "all", a single id, a comma list, or a JSON list."""
    if isinstance(value, str):
        if value.strip().lower() == "all":
            return tuple(ClassId)
        value = [v for v in value.split(",") if v.strip()]
    try:
        out = tuple(dict.fromkeys(parse_class_id(v.strip() if isinstance(v, str) else v)
                                  for v in value))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if not out:
        raise ConfigError("no classes selected")
    return tuple(sorted(out, key=lambda c: c.value))


# ---------------------------------------------------------------------------
# Suites

def build_suite(classes: Iterable[ClassId], mt_classes: Iterable[ClassId] = ()) -> List[TestCase]:
    """EP sources of every class, then MT follow-ups of the MT-enabled ones."""
    mt = set(mt_classes)
    cases: List[TestCase] = []
    follow: List[TestCase] = []
    for cid in classes:
        sources = enumerate_test_cases(class_spec(cid))
        cases.extend(sources)
        if cid in mt:
            follow.extend(derive_suite_follow_ups(sources))
    return cases + follow


def build_mt_suite(class_id: ClassId) -> List[TestCase]:
    """Canonical daytime sources of one class with their two follow-ups each."""
    sources = [c for c in enumerate_test_cases(class_spec(class_id)) if is_canonical_source(c)]
    return sources + derive_suite_follow_ups(sources)


# ---------------------------------------------------------------------------
# Execution

def _round(x: float) -> float:
    # Keeps records byte-stable across platforms' float printing of long tails.
    return float(f"{x:.6f}")


def execute_case(case: TestCase, config: CampaignConfig) -> Dict[str, Any]:
    """Run one case with a fresh planner and return its outcome record."""
    instance = case.build()
    planner = make_planner(config.planner, config.settings)
    out = run_simulation(instance, planner, config.limits, config.dynamics, record_trajectory=False)
    collision = None
    if out.collision is not None:
        c = out.collision
        collision = {"agents": list(c.agents), "time": _round(c.time),
                     "position": [_round(c.position[0]), _round(c.position[1])]}
    return {
        "caseId": case.id,
        "classId": case.class_id.value,
        "role": case.role.value,
        "sourceId": case.source_id,
        "params": dict(case.params),
        "environment": case.effective_environment.to_dict(),
        "environmentOverride": case.environment.to_dict() if case.environment else None,
        "planner": config.planner,
        "verdict": out.verdict.value,
        "collision": collision,
        "destinationReached": out.destination_reached,
        "simTime": _round(out.sim_time),
        "steps": out.steps,
        "seed": config.seed,
        "configHash": config.config_hash(),
    }


def _execute_packed(args: Tuple[Dict[str, Any], Dict[str, Any]]) -> Dict[str, Any]:
    case_d, cfg_d = args
    return execute_case(TestCase.from_dict(case_d), CampaignConfig.from_dict(cfg_d))


def execute_suite(cases: Sequence[TestCase], config: CampaignConfig) -> Iterator[Dict[str, Any]]:
    """Yield outcome records in suite order, whatever the worker count."""
    if config.jobs == 1:
        for c in cases:
            yield execute_case(c, config)
        return
    cfg_d = config.to_dict()
    work = [(c.to_dict(), cfg_d) for c in cases]
    chunk = max(1, math.ceil(len(work) / (config.jobs * 8)))
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        yield from pool.map(_execute_packed, work, chunksize=chunk)


def record_line(record: Mapping[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def record_to_outcome(record: Mapping[str, Any]) -> OutcomeRecord:
    env = record.get("environmentOverride")
    case = TestCase.from_dict({
        "id": record["caseId"], "classId": record["classId"], "params": record["params"],
        "role": record.get("role", Role.SOURCE.value), "sourceId": record.get("sourceId"),
        "environment": env,
    })
    return OutcomeRecord(case, Verdict(record["verdict"]))


def load_records(paths: Iterable[os.PathLike]) -> List[Dict[str, Any]]:
    records: List[Dict[str, Any]] = []
    for p in paths:
        path = Path(p)
        if not path.is_file():
            raise FileNotFoundError(f"outcome file not found: {path}")
        with path.open() as fh:
            for n, line in enumerate(fh, start=1):
                if line.strip():
                    try:
                        records.append(json.loads(line))
                    except json.JSONDecodeError as e:
                        raise ValueError(f"{path}:{n}: bad JSON line: {e}") from None
    return records


def report_from_records(records: Iterable[Mapping[str, Any]]) -> CampaignReport:
    return aggregate(record_to_outcome(r) for r in records)


# ---------------------------------------------------------------------------
# Artifacts

OUTCOMES_FILE = "outcomes.jsonl"
MANIFEST_FILE = "manifest.json"


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def write_report(report: CampaignReport, out_dir: Path, fmt: str = "csv") -> List[str]:
    """Write summary, per-parameter, MT and radar files; return their names."""
    out_dir.mkdir(parents=True, exist_ok=True)
    d = report.to_dict()
    if fmt == "csv":
        files = {"summary.csv": summary_csv(report), "parameters.csv": parameters_csv(report),
                 "mt_summary.csv": mt_csv(report)}
    else:
        files = {"summary.json": _dump({"perClass": d["perClass"], "total": d["total"]}),
                 "parameters.json": _dump(d["perParameter"]),
                 "mt_summary.json": _dump(d["mtSummary"])}
    files["radar.json"] = export_radar_data(report) + "\n"
    files["report.json"] = _dump(d)
    for name, text in files.items():
        (out_dir / name).write_text(text)
    return sorted(files)


def _check_writable(out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as e:
        raise ConfigError(f"output directory {out_dir} is not writable: {e}") from None


def _write_manifest(out_dir: Path, config: CampaignConfig, expected: int, written: int,
                    complete: bool, files: Sequence[str] = (), error: Optional[str] = None) -> None:
    manifest = {
        "complete": complete,
        "expectedRecords": expected,
        "writtenRecords": written,
        "configHash": config.config_hash(),
        "config": config.to_dict(),
        "files": list(files),
        "error": error,
    }
    (out_dir / MANIFEST_FILE).write_text(_dump(manifest))


def run_suite(cases: Sequence[TestCase], config: CampaignConfig) -> CampaignReport:
    """Execute a suite, stream outcomes to disk, aggregate and write reports.

    The manifest is written first with ``complete: false`` and only flipped
    once every record and report file is on disk, so an interrupted run
    leaves a readable partial JSONL and an honest manifest.
    """
    if config.planner not in available_planners():
        raise KeyError(f"planner {config.planner!r} not found; available: {available_planners()}")
    out_dir = Path(config.output_dir)
    _check_writable(out_dir)
    (out_dir / "config.json").write_text(_dump(config.to_dict()))
    _write_manifest(out_dir, config, len(cases), 0, False)

    records: List[Dict[str, Any]] = []
    try:
        with (out_dir / OUTCOMES_FILE).open("w") as fh:
            for rec in execute_suite(cases, config):
                fh.write(record_line(rec) + "\n")
                records.append(rec)
        report = report_from_records(records)
        files = [OUTCOMES_FILE, "config.json", *write_report(report, out_dir, config.format)]
    except BaseException as e:
        _write_manifest(out_dir, config, len(cases), len(records), False,
                        error=f"{type(e).__name__}: {e}")
        raise
    _write_manifest(out_dir, config, len(cases), len(records), True, files)
    return report


def run_campaign(config: CampaignConfig) -> CampaignReport:
    mt = [c for c in config.mt_enabled if c in config.classes]
    return run_suite(build_suite(config.classes, mt), config)


def run_mt_campaign(config: CampaignConfig, class_id: ClassId) -> CampaignReport:
    return run_suite(build_mt_suite(class_id), config)
