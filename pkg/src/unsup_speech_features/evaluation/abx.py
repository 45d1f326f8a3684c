"""Cross-speaker minimal-pair ABX discrimination."""

import logging
from collections import defaultdict
from itertools import product
from typing import Dict
from typing import List
from typing import Mapping
from typing import Sequence
from typing import Set
from typing import Tuple

from unsup_speech_features.exceptions import DataError
from unsup_speech_features.evaluation.items import AbxItem
from unsup_speech_features.evaluation.report import AbxCell
from unsup_speech_features.evaluation.report import EvalConfig
from unsup_speech_features.evaluation.report import EvalReport
from unsup_speech_features.evaluation.samediff import pairwise_distances
from unsup_speech_features.features.sequence import FeatureSequence


logger = logging.getLogger(__name__)


def is_minimal_pair(first: AbxItem, second: AbxItem) -> bool:
    """Same outer phones, different middle phone."""
    a, b = first.phones, second.phones
    return a[0] == b[0] and a[2] == b[2] and a[1] != b[1]


def abx_cells(items: Sequence[AbxItem]) -> List[Tuple[str, str, str, str]]:
    """Every (A type, B type, AB speaker, X speaker) cell with exemplars.

    A and B are a minimal pair spoken by the same speaker; X is of A's type
    and spoken by someone else. Both orders of each minimal pair appear.
    """
    by_label: Dict[str, AbxItem] = {}
    speakers: Dict[str, Set[str]] = defaultdict(set)
    for item in items:
        by_label.setdefault(item.triphone_label, item)
        speakers[item.triphone_label].add(item.speaker_id)

    cells = []
    labels = sorted(by_label)
    for label_a, label_b in product(labels, labels):
        if not is_minimal_pair(by_label[label_a], by_label[label_b]):
            continue
        for speaker_ab in sorted(speakers[label_a] & speakers[label_b]):
            for speaker_x in sorted(speakers[label_a] - {speaker_ab}):
                cells.append((label_a, label_b, speaker_ab, speaker_x))
    return cells


def abx_error(
    items: Sequence[AbxItem],
    features: Mapping[str, FeatureSequence],
    config: EvalConfig = EvalConfig(),
) -> EvalReport:
    """Minimal-pair ABX error with X from a different speaker than A and B.

    A triple scores 1 when d(A, X) < d(B, X), 0.5 on an exact tie and 0
    otherwise. Each cell's accuracy is the mean over its triples; the error is
    one minus the mean over cells.

    Args:
        items (Sequence[AbxItem]): Labelled word tokens.
        features (Mapping[str, FeatureSequence]): Features per utterance.
        config (EvalConfig): Metric and worker count.

    Returns:
        EvalReport: ABX error and the per-cell breakdown.

    Raises:
        DataError: No valid cell exists.
    """
    cells = abx_cells(items)
    if not cells:
        raise DataError("no ABX cells: need minimal pairs from one speaker and X tokens from another")

    groups: Dict[Tuple[str, str], List[int]] = defaultdict(list)
    for idx, item in enumerate(items):
        groups[(item.triphone_label, item.speaker_id)].append(idx)

    triples: List[List[Tuple[int, int, int]]] = [
        list(
            product(
                groups[(label_a, speaker_ab)],
                groups[(label_b, speaker_ab)],
                groups[(label_a, speaker_x)],
            )
        )
        for label_a, label_b, speaker_ab, speaker_x in cells
    ]
    needed_pairs: Set[Tuple[int, int]] = set()
    for cell_triples in triples:
        for a, b, x in cell_triples:
            needed_pairs.update([(a, x), (b, x)])
    needed = sorted(needed_pairs)
    segments = [item.segment.frames(features) for item in items]
    distances = dict(zip(needed, pairwise_distances(segments, needed, config.metric, config.threads)))

    results: List[AbxCell] = []
    for (label_a, label_b, speaker_ab, speaker_x), cell_triples in zip(cells, triples):
        score = 0.0
        for a, b, x in cell_triples:
            d_ax, d_bx = distances[(a, x)], distances[(b, x)]
            score += 1.0 if d_ax < d_bx else 0.5 if d_ax == d_bx else 0.0
        accuracy = score / len(cell_triples)
        results.append(AbxCell(label_a, label_b, speaker_ab, speaker_x, len(cell_triples), accuracy))
        logger.debug(
            "ABX cell %s/%s speaker %s vs %s: %d triples, accuracy %.4f",
            label_a,
            label_b,
            speaker_ab,
            speaker_x,
            len(cell_triples),
            accuracy,
        )

    error = 1.0 - sum(cell.accuracy for cell in results) / len(results)
    logger.info("ABX error %.4f over %d cells", error, len(results))
    return EvalReport(abx_error=error, abx_cells=results)
