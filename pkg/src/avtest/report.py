"""Campaign aggregation: per-class summary, per-parameter breakdowns, MT summary, radar data."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import ROUND_DOWN, ROUND_HALF_UP, Decimal
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .scenario import CODE_NAMES, PARAMETERS, ClassId
from .simkernel import Verdict
from .testgen import MetamorphicPair, RelationResult, Role, TestCase, class_spec, make_pair


def round_half_away(x: float, places: int = 1) -> float:
    """Round half away from zero: 0.05 -> 0.1, -0.05 -> -0.1."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def truncate_pct(x: float, places: int = 1) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_DOWN))


@dataclass(frozen=True)
class OutcomeRecord:
    """What aggregation needs from one run."""

    case: TestCase
    verdict: Verdict

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.COLLISION


@dataclass
class ClassSummary:
    class_id: str
    code_name: str
    parameters: int
    total_cases: int
    failed_cases: int

    @property
    def failure_rate(self) -> float:
        return self.failed_cases / self.total_cases if self.total_cases else 0.0

    @property
    def failure_rate_pct(self) -> float:
        # Headline rates are truncated, not rounded, to one decimal.
        return truncate_pct(100.0 * self.failure_rate)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classId": self.class_id, "codeName": self.code_name, "parameters": self.parameters,
            "totalCases": self.total_cases, "failedCases": self.failed_cases,
            "failureRate": self.failure_rate, "failureRatePct": self.failure_rate_pct,
        }


@dataclass
class BreakdownRow:
    value: Any
    failure_count: int
    percent: float

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "failureCount": self.failure_count, "percent": self.percent}


@dataclass
class MTSummary:
    relation: str
    source_failures: int
    follow_up_failures: int
    violations: int
    pairs: int

    def to_dict(self) -> Dict[str, Any]:
        return {"relation": self.relation, "sourceFailures": self.source_failures,
                "followUpFailures": self.follow_up_failures, "violations": self.violations,
                "pairs": self.pairs}


@dataclass
class RadarPolyline:
    case_id: str
    class_id: str
    unsafe: bool
    axes: List[Tuple[str, Any, int]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "caseId": self.case_id, "classId": self.class_id,
            "status": "unsafe" if self.unsafe else "safe",
            "axes": [{"name": n, "value": v, "index": i} for n, v, i in self.axes],
        }


@dataclass
class CampaignReport:
    per_class: Dict[str, ClassSummary] = field(default_factory=dict)
    per_parameter: Dict[str, Dict[str, List[BreakdownRow]]] = field(default_factory=dict)
    mt_summary: Dict[str, Dict[str, MTSummary]] = field(default_factory=dict)
    radar: List[RadarPolyline] = field(default_factory=list)

    @property
    def total(self) -> ClassSummary:
        cs = list(self.per_class.values())
        return ClassSummary("Total", "", sum(c.parameters for c in cs),
                            sum(c.total_cases for c in cs), sum(c.failed_cases for c in cs))

    def unsafe_polylines(self) -> List[RadarPolyline]:
        return [r for r in self.radar if r.unsafe]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "perClass": [c.to_dict() for c in self.per_class.values()],
            "total": self.total.to_dict(),
            "perParameter": {
                cid: {name: [r.to_dict() for r in rows] for name, rows in params.items()}
                for cid, params in self.per_parameter.items()
            },
            "mtSummary": {cid: {rel: m.to_dict() for rel, m in d.items()}
                          for cid, d in self.mt_summary.items()},
        }


def _breakdown(class_id: ClassId, failed: Sequence[TestCase]) -> Dict[str, List[BreakdownRow]]:
    spec = class_spec(class_id)
    out: Dict[str, List[BreakdownRow]] = {}
    n = len(failed)
    for part in spec.partitions:
        rows = []
        for v in part.values:
            count = sum(1 for c in failed if c.param_dict[part.name] == v)
            pct = round_half_away(100.0 * count / n) if n else 0.0
            rows.append(BreakdownRow(v, count, pct))
        out[part.name] = rows
    return out


def mt_summarize(pairs: Iterable[MetamorphicPair]) -> Dict[str, MTSummary]:
    """Per relation: failing sources, failing follow-ups and violated pairs."""
    acc: Dict[str, List[int]] = {}
    for p in pairs:
        a = acc.setdefault(p.relation.value, [0, 0, 0, 0])
        a[0] += p.source_verdict is Verdict.COLLISION
        a[1] += p.follow_up_verdict is Verdict.COLLISION
        a[2] += p.result is RelationResult.VIOLATED
        a[3] += 1
    return {rel: MTSummary(rel, *acc[rel]) for rel in sorted(acc)}


def aggregate(records: Iterable[OutcomeRecord]) -> CampaignReport:
    """Fold run outcomes into a report. Failure means a collision."""
    by_id: Dict[str, OutcomeRecord] = {}
    for r in records:
        if r.case.id in by_id:
            raise ValueError(f"duplicate case id {r.case.id}")
        by_id[r.case.id] = r

    report = CampaignReport()
    ordered = sorted(by_id.values(), key=lambda r: r.case.id)
    sources = [r for r in ordered if r.case.role is Role.SOURCE]
    for cid in ClassId:
        cls_records = [r for r in sources if r.case.class_id is cid]
        if not cls_records:
            continue
        failed = [r.case for r in cls_records if r.failed]
        report.per_class[cid.value] = ClassSummary(
            cid.value, CODE_NAMES[cid], len(PARAMETERS[cid]), len(cls_records), len(failed))
        report.per_parameter[cid.value] = _breakdown(cid, failed)
        axes = class_spec(cid).partitions
        for r in cls_records:
            p = r.case.param_dict
            report.radar.append(RadarPolyline(
                r.case.id, cid.value, r.failed,
                [(a.name, p[a.name], a.values.index(p[a.name]) if p[a.name] in a.values else -1)
                 for a in axes]))

    follow = [r for r in ordered if r.case.role is not Role.SOURCE]
    pairs: Dict[str, List[MetamorphicPair]] = {}
    for r in follow:
        src = by_id.get(r.case.source_id or "")
        if src is None:
            raise ValueError(f"follow-up {r.case.id} is missing its source {r.case.source_id}")
        pairs.setdefault(r.case.class_id.value, []).append(
            make_pair(src.case, r.case, src.verdict, r.verdict))
    for cid in sorted(pairs):
        report.mt_summary[cid] = mt_summarize(pairs[cid])
    return report


def aggregate_outcomes(pairs: Iterable[Tuple[TestCase, Any]]) -> CampaignReport:
    """Convenience wrapper over ``(TestCase, SimulationOutcome)`` pairs."""
    return aggregate(OutcomeRecord(c, o.verdict) for c, o in pairs)


# ---------------------------------------------------------------------------
# File formats

def summary_csv(report: CampaignReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "code_name", "parameters", "failed_cases", "total_cases", "failure_rate_pct"])
    for c in [*report.per_class.values(), report.total]:
        w.writerow([c.class_id, c.code_name, c.parameters, c.failed_cases, c.total_cases,
                    f"{c.failure_rate_pct:.1f}"])
    return buf.getvalue()


def parameters_csv(report: CampaignReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "parameter", "value", "failures", "percentage"])
    for cid, params in report.per_parameter.items():
        for name, rows in params.items():
            for r in rows:
                w.writerow([cid, name, r.value, r.failure_count, f"{r.percent:.1f}"])
    return buf.getvalue()


def mt_csv(report: CampaignReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "relation", "pairs", "source_failures", "follow_up_failures", "violations"])
    for cid, rels in report.mt_summary.items():
        for m in rels.values():
            w.writerow([cid, m.relation, m.pairs, m.source_failures, m.follow_up_failures, m.violations])
    return buf.getvalue()


def export_radar_data(report: CampaignReport, only_class: Optional[str] = None) -> str:
    """One polyline per case over the class's parameter axes, as a JSON array."""
    lines = [r.to_dict() for r in report.radar if only_class is None or r.class_id == only_class]
    return json.dumps(lines, indent=1)
