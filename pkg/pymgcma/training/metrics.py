"""
Weighted and unweighted accuracy.

WA is overall accuracy (confusion trace over total); UA is the mean of
per-class recalls over the classes present in the ground truth.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence

import numpy as np
from sklearn.metrics import confusion_matrix

from ..core.exceptions import EmptyInputError
from ..enumerations import EmotionLabel
from ..logger import get_logger

logger = get_logger(__name__)


@dataclass
class MetricsReport:
    """
    WA/UA with their confusion matrix (rows true, columns predicted).

    ``missing_classes`` lists class codes absent from the ground truth;
    UA is then averaged over the present classes only. Reports pooled
    from several folds keep the fold reports and their averages.
    """

    wa: float
    ua: float
    confusion: np.ndarray
    missing_classes: List[int] = field(default_factory=list)
    folds: List["MetricsReport"] = field(default_factory=list)

    @property
    def support(self) -> np.ndarray:
        return self.confusion.sum(axis=1)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def fold_mean_wa(self) -> float | None:
        return float(np.mean([fold.wa for fold in self.folds])) if self.folds else None

    @property
    def fold_mean_ua(self) -> float | None:
        return float(np.mean([fold.ua for fold in self.folds])) if self.folds else None

    def to_dict(self) -> dict:
        report = {
            "wa": self.wa,
            "ua": self.ua,
            "confusion": self.confusion.tolist(),
            "missing_classes": list(self.missing_classes),
        }
        if self.folds:
            report["fold_mean_wa"] = self.fold_mean_wa
            report["fold_mean_ua"] = self.fold_mean_ua
            report["folds"] = [fold.to_dict() for fold in self.folds]
        return report


def metrics_from_confusion(confusion: np.ndarray) -> MetricsReport:
    """Compute WA/UA from a square count matrix."""
    confusion = np.asarray(confusion, dtype=np.int64)
    total = int(confusion.sum())
    if total == 0:
        error_string = "Metrics over an empty test set."
        logger.error(error_string)
        raise EmptyInputError(error_string)

    support = confusion.sum(axis=1)
    present = np.flatnonzero(support > 0)
    missing = [int(code) for code in np.flatnonzero(support == 0)]
    if missing:
        logger.warning(f"Classes {missing} are absent from the test set; UA uses the rest.")

    # Exact rationals: balanced supports give WA == UA
    recalls = [Fraction(int(confusion[code, code]), int(support[code])) for code in present]
    wa = float(Fraction(int(np.trace(confusion)), total))
    ua = float(sum(recalls) / len(recalls))
    return MetricsReport(wa=wa, ua=ua, confusion=confusion, missing_classes=missing)


def compute_metrics(
    y_true: Sequence[int], y_pred: Sequence[int], num_classes: int = len(EmotionLabel)
) -> MetricsReport:
    """Metrics for one set of predictions."""
    if len(y_true) == 0:
        error_string = "Metrics over an empty test set."
        logger.error(error_string)
        raise EmptyInputError(error_string)
    confusion = confusion_matrix(y_true, y_pred, labels=list(range(num_classes)))
    return metrics_from_confusion(confusion)


def pool_reports(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Sum fold confusion matrices, then compute WA/UA; folds are kept in order."""
    if not reports:
        error_string = "Cannot pool an empty list of reports."
        logger.error(error_string)
        raise EmptyInputError(error_string)
    pooled = metrics_from_confusion(sum(report.confusion for report in reports))
    pooled.folds = list(reports)
    return pooled
