"""Same-different word discrimination scored by average precision."""

import logging
from typing import Any
from typing import List
from typing import Mapping
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt
from tqdm import tqdm

from unsup_speech_features.alignment.dtw import dtw_distance
from unsup_speech_features.exceptions import DataError
from unsup_speech_features.evaluation.items import LabeledWord
from unsup_speech_features.evaluation.report import EvalConfig
from unsup_speech_features.evaluation.report import EvalReport
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.utils import parallel_map


logger = logging.getLogger(__name__)

DistanceTask = Tuple[npt.NDArray[Any], npt.NDArray[Any], str]


def _distance_task(task: DistanceTask) -> float:
    first, second, metric = task
    return dtw_distance(first, second, metric)


def pairwise_distances(
    segments: Sequence[npt.NDArray[Any]],
    index_pairs: Sequence[Tuple[int, int]],
    metric: str = "cosine",
    threads: int = 1,
) -> npt.NDArray[np.float64]:
    """DTW distance for each ``(i, j)`` in ``index_pairs``, in that order."""
    tasks = [(segments[i], segments[j], metric) for i, j in index_pairs]
    if threads > 1:
        return np.asarray(parallel_map(_distance_task, tasks, threads), dtype=np.float64)
    return np.asarray(
        [_distance_task(task) for task in tqdm(tasks, desc="DTW distances", disable=None, leave=False)],
        dtype=np.float64,
    )


def average_precision(
    distances: npt.ArrayLike, same: npt.ArrayLike
) -> Tuple[float, List[Tuple[float, float]], bool]:
    """AP of ranking ``distances`` ascending against the ``same`` labels.

    Every distinct distance is one threshold; tied pairs enter the ranking
    together. AP sums precision times the recall gained at each threshold.

    Args:
        distances (npt.ArrayLike): One distance per pair.
        same (npt.ArrayLike): Whether each pair is a positive.

    Returns:
        Tuple[float, List[Tuple[float, float]], bool]: AP, the PR curve
            starting at (0, 1) with one point per threshold, and whether any
            distances tie.

    Raises:
        DataError: No positive pairs.
    """
    dist = np.asarray(distances, dtype=np.float64)
    labels = np.asarray(same, dtype=bool)
    n_positive = int(labels.sum())
    if n_positive == 0:
        raise DataError("same-different evaluation needs at least one same-type pair")

    order = np.argsort(dist, kind="stable")
    dist = dist[order]
    hits = np.cumsum(labels[order])
    # Last index of each run of equal distances
    ends = np.flatnonzero(np.append(dist[1:] != dist[:-1], True))
    ranked = ends + 1
    precision = hits[ends] / ranked
    recall = hits[ends] / n_positive
    gained = np.diff(np.concatenate([[0.0], recall]))
    ap = float(np.sum(precision * gained))
    curve = [(0.0, 1.0)] + [(float(r), float(p)) for r, p in zip(recall, precision)]
    return ap, curve, bool(ends.shape[0] < dist.shape[0])


def same_different_ap(
    words: Sequence[LabeledWord],
    features: Mapping[str, FeatureSequence],
    config: EvalConfig = EvalConfig(),
) -> EvalReport:
    """Average precision of telling same-type word pairs from different-type ones.

    Args:
        words (Sequence[LabeledWord]): Test words.
        features (Mapping[str, FeatureSequence]): Features per utterance.
        config (EvalConfig): Metric, pair filters and worker count.

    Returns:
        EvalReport: AP, PR curve and pair counts.

    Raises:
        DataError: Fewer than two words, or no same-type pair survives the filters.
    """
    kept = [word for word in words if word.segment.n_frames >= config.min_frames]
    if len(kept) < len(words):
        logger.info("Dropped %d words shorter than %d frames", len(words) - len(kept), config.min_frames)
    if len(kept) < 2:
        raise DataError(f"same-different evaluation needs at least 2 words, got {len(kept)}")

    segments = [word.segment.frames(features) for word in kept]
    index_pairs = [
        (i, j)
        for i in range(len(kept))
        for j in range(i + 1, len(kept))
        if not config.cross_speaker or kept[i].speaker_id != kept[j].speaker_id
    ]
    if not index_pairs:
        raise DataError("no word pairs to score")
    same = [kept[i].gold_type == kept[j].gold_type for i, j in index_pairs]

    distances = pairwise_distances(segments, index_pairs, config.metric, config.threads)
    ap, curve, ties = average_precision(distances, same)
    if ties:
        logger.debug("Tied distances among %d pairs; tied pairs share a threshold", len(index_pairs))
    logger.info("Same-different AP %.4f over %d pairs (%d same)", ap, len(index_pairs), sum(same))
    return EvalReport(ap=ap, pr_points=curve, n_pairs=len(index_pairs), n_positive=sum(same), ties=ties)
