"""Evaluation settings, reports and PR-curve output."""

import csv
import json
import logging
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from pathlib import Path
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

from unsup_speech_features.config import METRICS


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalConfig:
    """How word distances are computed and which pairs are scored."""

    metric: str = "cosine"
    cross_speaker: bool = False
    min_frames: int = 0
    threads: int = 1

    def __post_init__(self) -> None:
        """Validate the metric and filters."""
        if self.metric not in METRICS:
            raise ValueError(f"Unknown metric {self.metric!r}; expected one of {METRICS}")
        if self.min_frames < 0:
            raise ValueError("min_frames must be >= 0")

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly view; the worker count does not affect results."""
        return {"metric": self.metric, "cross_speaker": self.cross_speaker, "min_frames": self.min_frames}


@dataclass(frozen=True)
class AbxCell:
    """One (A type, B type, AB speaker, X speaker) configuration."""

    label_a: str
    label_b: str
    speaker_ab: str
    speaker_x: str
    n_triples: int
    accuracy: float

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly view."""
        return {
            "label_a": self.label_a,
            "label_b": self.label_b,
            "speaker_ab": self.speaker_ab,
            "speaker_x": self.speaker_x,
            "n_triples": self.n_triples,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class EvalReport:
    """Same-different and/or ABX results."""

    ap: Optional[float] = None
    pr_points: List[Tuple[float, float]] = field(default_factory=list)
    n_pairs: int = 0
    n_positive: int = 0
    ties: bool = False
    abx_error: Optional[float] = None
    abx_cells: List[AbxCell] = field(default_factory=list)

    def merge(self, other: "EvalReport") -> "EvalReport":
        """Combine a same-different report with an ABX report."""
        if other.ap is not None:
            merged = replace(
                self,
                ap=other.ap,
                pr_points=other.pr_points,
                n_pairs=other.n_pairs,
                n_positive=other.n_positive,
                ties=other.ties,
            )
        else:
            merged = self
        if other.abx_error is not None:
            merged = replace(merged, abx_error=other.abx_error, abx_cells=other.abx_cells)
        return merged

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly view."""
        values: Dict[str, Any] = {}
        if self.ap is not None:
            values.update(
                ap=self.ap,
                n_pairs=self.n_pairs,
                n_positive=self.n_positive,
                ties=self.ties,
                n_thresholds=max(0, len(self.pr_points) - 1),
            )
        if self.abx_error is not None:
            values.update(abx_error=self.abx_error, abx_cells=[cell.to_dict() for cell in self.abx_cells])
        return values


def format_report(report: EvalReport) -> str:
    """``AP=`` / ``ABX=`` lines followed by the JSON report."""
    lines = []
    if report.ap is not None:
        lines.append(f"AP={report.ap:.6f}")
    if report.abx_error is not None:
        lines.append(f"ABX={report.abx_error:.6f}")
    lines.append(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return "\n".join(lines)


def emit_pr_curve(report: EvalReport, path: Path) -> None:
    """Write the precision-recall curve as ``recall,precision`` CSV.

    Raises:
        ValueError: The report has no same-different curve.
    """
    if report.ap is None or not report.pr_points:
        raise ValueError("report holds no precision-recall curve")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["recall", "precision"])
        for recall, precision in report.pr_points:
            writer.writerow([repr(recall), repr(precision)])
    logger.info("Wrote %d PR points to %s", len(report.pr_points), path)
