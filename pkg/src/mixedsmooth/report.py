"""Report envelope, serialization, and schema validation.

The JSON layout is the machine contract: a fixed envelope holding a list of
uniform entries.  Serialization is deterministic (insertion-ordered keys,
shortest round-trip float repr), and wall time is deliberately excluded
from JSON so equal-seed runs are byte-identical; the human format prints
it instead.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from . import __version__
from .counterexample import CounterexampleReport
from .embedding import InequalityReport, LimitCheckReport
from .gnl import GnlCheckReport
from .mollify import ConvergenceStudy
from .norms import NormReport

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"

SCHEMA_VERSION = "1"

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_IO = 74


def combine(verdicts) -> str:
    verdicts = list(verdicts)
    if any(v == FAIL for v in verdicts):
        return FAIL
    if any(v == INCONCLUSIVE for v in verdicts):
        return INCONCLUSIVE
    return PASS


@dataclass
class Entry:
    kind: str
    verdict: str
    inputs: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    margin: float | None = None
    quadrature: dict | None = None
    sampler: dict | None = None
    details: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "inputs": _plain(self.inputs),
            "values": _plain(self.values),
            "margin": _plain(self.margin),
            "quadrature": _plain(self.quadrature),
            "sampler": _plain(self.sampler),
            "details": _plain(self.details),
            "note": self.note,
        }


def _plain(value):
    """Recursively convert to JSON-encodable plain Python values."""
    import numpy as np

    if value is None or isinstance(value, (str, bool, int)):
        return value
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            return repr(value)
        return value
    if isinstance(value, np.floating):
        return _plain(float(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return repr(value)


@dataclass
class ReportEnvelope:
    command: str
    config: dict
    entries: list[Entry] = field(default_factory=list)
    wall_time_s: float = 0.0  # human output only, never serialized to JSON

    @property
    def overall(self) -> str:
        return combine(e.verdict for e in self.entries) if self.entries else PASS

    @property
    def exit_code(self) -> int:
        return {PASS: EXIT_PASS, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}[
            self.overall
        ]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "command": self.command,
            "config": _plain(self.config),
            "entries": [e.to_dict() for e in self.entries],
            "overall": self.overall,
        }


def _schema() -> dict:
    text = resources.files("mixedsmooth.data").joinpath("report.schema.json").read_text(
        encoding="utf-8"
    )
    return json.loads(text)


def to_json(envelope: ReportEnvelope, validate: bool = True) -> str:
    doc = envelope.to_dict()
    if validate:
        jsonschema.validate(doc, _schema())
    return json.dumps(doc, indent=2) + "\n"


def to_csv(envelope: ReportEnvelope) -> str:
    """Generic flat CSV; the gallery command substitutes its table."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "verdict", "value", "margin", "note"])
    for e in envelope.entries:
        value = e.values.get("value", e.values.get("lhs", ""))
        writer.writerow([e.kind, e.verdict, value, "" if e.margin is None else e.margin, e.note])
    return buf.getvalue()


def counterexample_csv(report: CounterexampleReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["r0", "sup", "w12_norm", "s12_norm"])
    for row in report.csv_rows():
        writer.writerow([repr(v) for v in row])
    return buf.getvalue()


def to_human(envelope: ReportEnvelope) -> str:
    lines = [
        f"mixedsmooth {__version__} :: {envelope.command}",
        f"overall: {envelope.overall}   wall time: {envelope.wall_time_s:.2f}s",
        "",
        f"{'kind':<18} {'verdict':<13} {'value':>14} {'margin':>14}  note",
    ]
    for e in envelope.entries:
        value = e.values.get("value", e.values.get("lhs", ""))
        vtxt = f"{value:.6g}" if isinstance(value, float) else str(value)
        mtxt = f"{e.margin:.6g}" if isinstance(e.margin, float) else ""
        lines.append(f"{e.kind:<18} {e.verdict:<13} {vtxt:>14} {mtxt:>14}  {e.note}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# adapters from the check modules' result objects


def entry_from_norm(rep: NormReport, label: str | None = None) -> Entry:
    note = "sampled lower bound" if rep.sampled_lower_bound else ""
    return Entry(
        kind=label or f"norm_{rep.kind}",
        verdict=PASS,
        inputs={
            "p": rep.p,
            "gamma": rep.gamma,
            "box_lo": rep.box.lo,
            "box_hi": rep.box.hi,
        },
        values={"value": rep.value},
        quadrature=rep.quadrature,
        sampler={"seed": rep.seed, "count": rep.pairs} if rep.seed is not None else None,
        details=dict(rep.details),
        note=note,
    )


def entry_from_inequality(rep: InequalityReport, inputs: dict | None = None) -> Entry:
    quad = rep.norm.quadrature if rep.norm is not None else None
    sampler = None
    if rep.sampler_seed is not None:
        sampler = {"seed": rep.sampler_seed, "count": rep.pair_count}
    return Entry(
        kind=rep.kind,
        verdict=rep.verdict,
        inputs={"p": rep.p, "n": rep.n, **(inputs or {})},
        values={
            "lhs": rep.lhs_max,
            "rhs": rep.rhs_at_worst,
            "violations": rep.violations,
            "norm": rep.norm.value if rep.norm else None,
        },
        margin=rep.margin if rep.margin == rep.margin else None,
        quadrature=quad,
        sampler=sampler,
        details={"worst": rep.worst, "components": rep.components},
        note=rep.note,
    )


def entry_from_gnl(rep: GnlCheckReport, inputs: dict | None = None) -> Entry:
    worst = rep.worst
    details: dict = {
        "rectangles": [
            {
                "lo": r.rectangle.lo,
                "hi": r.rectangle.hi,
                "verdict": r.verdict,
                "relative_residual": r.relative_residual,
                "detail": r.detail,
            }
            for r in rep.results
        ]
    }
    values: dict = {"value": worst.relative_residual if worst else None}
    if worst is not None and worst.breakdown is not None:
        bd = worst.breakdown
        details["worst_rectangle"] = {
            "lo": bd.rectangle.lo,
            "hi": bd.rectangle.hi,
            "lhs": bd.lhs,
            "rhs": bd.rhs,
            "contributions": [
                {"subset": r.subset.indices, "value": r.value, "error_estimate": r.error_estimate}
                for r in bd.records
            ],
        }
    return Entry(
        kind="gnl",
        verdict=rep.verdict,
        inputs={"tol": rep.tol, **(inputs or {})},
        values=values,
        details=details,
    )


def entry_from_limit(rep: LimitCheckReport) -> Entry:
    return Entry(
        kind="p_to_1_limit",
        verdict=rep.verdict,
        inputs={"n": rep.n, "d": rep.d, "hard_tolerance": rep.hard_tolerance},
        values={"value": rep.final_error, "limit": rep.limit},
        details={"trace": [{"p": p, "constant": c} for p, c in rep.trace]},
        note="" if rep.hard_tolerance is not None else "convergence trace only (d != 1)",
    )


def entry_from_counterexample(rep: CounterexampleReport) -> Entry:
    return Entry(
        kind="counterexample",
        verdict=rep.verdict,
        inputs={"dim": rep.dim, "radii": [r.r0 for r in rep.rows]},
        values={"value": rep.rows[-1].sup if rep.rows else None},
        details={
            "rows": [
                {"r0": r.r0, "sup": r.sup, "w12_norm": r.w12, "s12_norm": r.s12}
                for r in rep.rows
            ],
            "checks": rep.checks,
        },
    )


def entry_from_mollification(study: ConvergenceStudy, verdict: str, extra: dict) -> Entry:
    return Entry(
        kind="mollification",
        verdict=verdict,
        inputs={"epsilons": study.epsilons},
        values={"value": study.orders[-1] if study.orders else None},
        details={
            "max_differences": study.max_differences,
            "orders": study.orders,
            **extra,
        },
    )
