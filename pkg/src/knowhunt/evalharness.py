"""Metrics and reports.

WSC runs are scored with abstention: precision over answered instances,
recall over all of them.  COPA runs report plain accuracy plus the number
answered.  Ratios are kept as exact fractions and rounded only for display.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .labels import Decision, Relation
from .resolver import Resolution

TSV_HEADER = ("id", "decision", "gold", "correct", "agent_strength", "patient_strength")
REPORT_FORMATS = ("json-lines", "tsv")


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class CopaInstance:
    id: str
    premise: str
    alt1: str
    alt2: str
    relation: Relation
    answer: Decision | None = None

    def __post_init__(self):
        for name in ("premise", "alt1", "alt2"):
            if not getattr(self, name).strip():
                raise ValueError(f"COPA instance {self.id}: empty {name}")
        if self.answer not in (None, Decision.ALT1, Decision.ALT2):
            raise ValueError(f"COPA instance {self.id}: answer must be alt1 or alt2")


def load_copa(path: str | Path) -> list[CopaInstance]:
    """Read line-delimited COPA records; ``asks-for`` is accepted for ``relation``."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for index, line in enumerate(l for l in fh if l.strip()):
            try:
                rec = json.loads(line)
                relation = Relation(str(rec.get("relation", rec.get("asks-for"))).lower())
                answer = rec.get("answer")
                gold = None if answer is None else {1: Decision.ALT1, 2: Decision.ALT2}[int(answer)]
                out.append(
                    CopaInstance(str(rec["id"]), rec["premise"], rec["alt1"], rec["alt2"], relation, gold)
                )
            except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
                raise EvalError(f"COPA record {index}: {exc!r}") from None
    return out


@dataclass(frozen=True)
class InstanceResult:
    id: str
    decision: Decision
    gold: Decision
    agent_strength: int
    patient_strength: int

    @property
    def answered(self) -> bool:
        return self.decision != Decision.ABSTAIN

    @property
    def correct(self) -> bool:
        return self.decision == self.gold


def ratios(correct: int, answered: int, total: int) -> tuple[Fraction, Fraction, Fraction]:
    """Exact (precision, recall, F1) from counts, zero where undefined."""
    if not 0 <= correct <= answered <= total:
        raise EvalError(f"inconsistent counts: correct={correct} answered={answered} total={total}")
    p = Fraction(correct, answered) if answered else Fraction(0)
    r = Fraction(correct, total) if total else Fraction(0)
    f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
    return p, r, f1


def fmt(x: Fraction, places: int = 2) -> str:
    return f"{float(round(x, places)):.{places}f}"


@dataclass(frozen=True)
class EvalReport:
    total: int
    answered: int
    correct: int
    task: str = "wsc"
    per_instance: tuple[InstanceResult, ...] = field(default_factory=tuple)

    @classmethod
    def from_counts(cls, correct: int, answered: int, total: int, task: str = "wsc") -> "EvalReport":
        ratios(correct, answered, total)
        return cls(total, answered, correct, task)

    @classmethod
    def from_results(cls, results: Iterable[InstanceResult], task: str = "wsc") -> "EvalReport":
        results = tuple(results)
        return cls(
            total=len(results),
            answered=sum(r.answered for r in results),
            correct=sum(r.correct for r in results),
            task=task,
            per_instance=results,
        )

    @property
    def exact(self) -> tuple[Fraction, Fraction, Fraction]:
        return ratios(self.correct, self.answered, self.total)

    @property
    def precision(self) -> float:
        return float(self.exact[0])

    @property
    def recall(self) -> float:
        return float(self.exact[1])

    @property
    def f1(self) -> float:
        return float(self.exact[2])

    @property
    def accuracy(self) -> float:
        """Abstentions count as wrong; equals recall."""
        return self.recall

    def summary_line(self) -> str:
        p, r, f1 = self.exact
        if self.task == "copa":
            return (
                f"accuracy={fmt(100 * r, 1)}% answered={self.answered}/{self.total} "
                f"answered_accuracy={fmt(100 * p, 1)}%"
            )
        return f"P={fmt(p)} R={fmt(r)} F1={fmt(f1)}"

    def summary_record(self) -> dict:
        p, r, f1 = self.exact
        rec = {"task": self.task, "total": self.total, "answered": self.answered, "correct": self.correct}
        if self.task == "copa":
            rec.update(accuracy=fmt(100 * r, 1), answered_accuracy=fmt(100 * p, 1))
        else:
            rec.update(precision=fmt(p), recall=fmt(r), f1=fmt(f1))
        return rec

    def check_consistency(self) -> None:
        again = EvalReport.from_results(self.per_instance, self.task)
        if (again.total, again.answered, again.correct) != (self.total, self.answered, self.correct):
            raise EvalError("summary counts disagree with per-instance results")


def _results(resolutions: Sequence[Resolution], gold: Mapping[str, Decision]) -> list[InstanceResult]:
    ids = [r.instance_id for r in resolutions]
    if len(set(ids)) != len(ids):
        raise EvalError("duplicate instance ids among resolutions")
    missing = sorted(set(ids) - set(gold))
    extra = sorted(set(gold) - set(ids))
    if missing or extra:
        raise EvalError(f"id mismatch: no gold for {missing[:5]}, no resolution for {extra[:5]}")
    return [
        InstanceResult(r.instance_id, r.decision, gold[r.instance_id], r.agent_strength, r.patient_strength)
        for r in resolutions
    ]


def evaluate_wsc(resolutions: Sequence[Resolution], gold: Mapping[str, Decision]) -> EvalReport:
    return EvalReport.from_results(_results(resolutions, gold), "wsc")


def evaluate_copa(resolutions: Sequence[Resolution], gold: Mapping[str, Decision]) -> EvalReport:
    return EvalReport.from_results(_results(resolutions, gold), "copa")


def render_report(report: EvalReport, fmt_name: str = "json-lines") -> str:
    if fmt_name == "tsv":
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
        writer.writerow(TSV_HEADER)
        for r in report.per_instance:
            writer.writerow(
                [r.id, str(r.decision), str(r.gold), str(r.correct).lower(), r.agent_strength, r.patient_strength]
            )
        return buf.getvalue()
    if fmt_name != "json-lines":
        raise EvalError(f"unknown report format {fmt_name!r}")
    lines = []
    for r in report.per_instance:
        rec = {
            "id": r.id,
            "decision": str(r.decision),
            "gold": str(r.gold),
            "correct": r.correct,
            "agent_strength": r.agent_strength,
            "patient_strength": r.patient_strength,
        }
        lines.append(json.dumps(rec, ensure_ascii=False))
    lines.append(json.dumps({"summary": report.summary_record()}, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def emit_report(report: EvalReport, fmt_name: str = "json-lines", out: str | Path | TextIO | None = None) -> str:
    """Render ``report`` and write it to ``out`` (a path or stream) if given."""
    text = render_report(report, fmt_name)
    if out is None:
        return text
    if hasattr(out, "write"):
        out.write(text)
        return text
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise EvalError(f"cannot write report to {out}: {exc}") from exc
    return text
