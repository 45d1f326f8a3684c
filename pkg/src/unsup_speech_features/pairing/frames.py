"""Frame-level training items built from discovered pairs."""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict
from typing import List
from typing import Mapping
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt

from unsup_speech_features.alignment.dtw import AlignmentPath
from unsup_speech_features.alignment.dtw import dtw_align
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.pairing.segments import DiscoveredPair
from unsup_speech_features.pairing.segments import WordSegment
from unsup_speech_features.utils import parallel_map


logger = logging.getLogger(__name__)

Vector = npt.NDArray[np.float32]


@dataclass(frozen=True)
class FramePair:
    """Two DTW-aligned frames from words of the same predicted type."""

    x_a: Vector
    x_b: Vector
    speaker_a: str
    speaker_b: str
    cluster_id: int


@dataclass(frozen=True)
class FrameTriplet:
    """A frame pair plus a negative frame from the first speaker."""

    pair: FramePair
    x_neg: Vector
    neg_speaker: str
    neg_cluster: int
    neg_segment: WordSegment
    neg_frame: int


@dataclass(frozen=True)
class FrameQuadruplet:
    """A triplet plus the frame of a fourth word aligned to the negative."""

    triplet: FrameTriplet
    x_neg_b: Vector
    neg_b_speaker: str
    neg_b_segment: WordSegment

    @property
    def pair(self) -> FramePair:
        """The positive pair."""
        return self.triplet.pair

    @property
    def x_neg(self) -> Vector:
        """The negative frame x'_a."""
        return self.triplet.x_neg


@dataclass(frozen=True)
class DropSummary:
    """Counts from one sampling stage."""

    stage: str
    total: int
    kept: int

    @property
    def dropped(self) -> int:
        """Items with no eligible partner word."""
        return self.total - self.kept

    def log(self) -> None:
        """Report the counts, warning when nothing survived."""
        if self.total and not self.kept:
            logger.warning("%s: all %d items dropped", self.stage, self.total)
        else:
            logger.info("%s: kept %d of %d (%d dropped)", self.stage, self.kept, self.total, self.dropped)


def _align_task(task: Tuple[Vector, Vector, str]) -> Tuple[Tuple[int, int], ...]:
    first, second, metric = task
    return dtw_align(first, second, metric).steps


def build_frame_pairs(
    pairs: Sequence[DiscoveredPair],
    features: Mapping[str, FeatureSequence],
    metric: str = "cosine",
    threads: int = 1,
) -> List[FramePair]:
    """DTW-align each discovered pair into directed frame pairs.

    Every path step (i, j) yields (a_i -> b_j) and (b_j -> a_i), so the output
    holds twice the summed path length. The forward direction of a pair is
    emitted before its reverse.

    Args:
        pairs (Sequence[DiscoveredPair]): Discovered word pairs.
        features (Mapping[str, FeatureSequence]): CMVN + delta features.
        metric (str): DTW local distance.
        threads (int): Worker processes for the alignments.

    Returns:
        List[FramePair]: Directed frame pairs in pair order.
    """
    tasks = [
        (pair.first.frames(features), pair.second.frames(features), metric) for pair in pairs
    ]
    paths = parallel_map(_align_task, tasks, threads)

    frame_pairs: List[FramePair] = []
    for pair, (first, second, _), steps in zip(pairs, tasks, paths):
        a, b = pair.first, pair.second
        for i, j in steps:
            frame_pairs.append(FramePair(first[i], second[j], a.speaker_id, b.speaker_id, pair.cluster_id))
        for i, j in steps:
            frame_pairs.append(FramePair(second[j], first[i], b.speaker_id, a.speaker_id, pair.cluster_id))
    logger.info("Built %d directed frame pairs from %d word pairs", len(frame_pairs), len(pairs))
    return frame_pairs


def sample_triplets(
    frame_pairs: Sequence[FramePair],
    segments: Sequence[WordSegment],
    features: Mapping[str, FeatureSequence],
    seed: int,
) -> Tuple[List[FrameTriplet], DropSummary]:
    """Attach a negative frame to each pair.

    The third word is drawn uniformly among words of the first speaker with a
    different cluster, then a frame is drawn uniformly within it. Pairs with
    no eligible word are dropped.

    Args:
        frame_pairs (Sequence[FramePair]): Directed frame pairs.
        segments (Sequence[WordSegment]): Candidate words.
        features (Mapping[str, FeatureSequence]): Feature map for the frames.
        seed (int): Sampling seed.

    Returns:
        Tuple[List[FrameTriplet], DropSummary]: Triplets and drop counts.
    """
    rng = np.random.default_rng(seed)
    by_speaker: Dict[str, List[WordSegment]] = defaultdict(list)
    for segment in segments:
        by_speaker[segment.speaker_id].append(segment)

    eligible: Dict[Tuple[str, int], List[WordSegment]] = {}
    triplets: List[FrameTriplet] = []
    for pair in frame_pairs:
        key = (pair.speaker_a, pair.cluster_id)
        if key not in eligible:
            eligible[key] = [s for s in by_speaker[pair.speaker_a] if s.cluster_id != pair.cluster_id]
        candidates = eligible[key]
        if not candidates:
            continue
        word = candidates[int(rng.integers(len(candidates)))]
        frame = int(rng.integers(word.n_frames))
        triplets.append(
            FrameTriplet(
                pair,
                word.frames(features)[frame],
                word.speaker_id,
                word.cluster_id,
                word,
                frame,
            )
        )

    summary = DropSummary("triplets", len(frame_pairs), len(triplets))
    summary.log()
    return triplets, summary


def sample_quadruplets(
    triplets: Sequence[FrameTriplet],
    segments: Sequence[WordSegment],
    features: Mapping[str, FeatureSequence],
    seed: int,
    metric: str = "cosine",
) -> Tuple[List[FrameQuadruplet], DropSummary]:
    """Attach an aligned frame from a fourth word to each triplet.

    The fourth word is drawn uniformly among words of the negative's cluster,
    excluding the third word itself, and DTW-aligned to the third word. The
    chosen frame is the partner of the negative frame on the first path step
    touching it. Triplets with no eligible word are dropped.

    Args:
        triplets (Sequence[FrameTriplet]): Triplets from :func:`sample_triplets`.
        segments (Sequence[WordSegment]): Candidate words.
        features (Mapping[str, FeatureSequence]): Feature map for the frames.
        seed (int): Sampling seed.
        metric (str): DTW local distance.

    Returns:
        Tuple[List[FrameQuadruplet], DropSummary]: Quadruplets and drop counts.
    """
    rng = np.random.default_rng(seed)
    by_cluster: Dict[int, List[WordSegment]] = defaultdict(list)
    for segment in segments:
        by_cluster[segment.cluster_id].append(segment)

    paths: Dict[Tuple[str, str], AlignmentPath] = {}
    quadruplets: List[FrameQuadruplet] = []
    for triplet in triplets:
        third = triplet.neg_segment
        candidates = [s for s in by_cluster[triplet.neg_cluster] if s.key != third.key]
        if not candidates:
            continue
        fourth = candidates[int(rng.integers(len(candidates)))]
        cache_key = (third.key, fourth.key)
        if cache_key not in paths:
            paths[cache_key] = dtw_align(third.frames(features), fourth.frames(features), metric)
        partner = paths[cache_key].first_partner_of(triplet.neg_frame)
        quadruplets.append(
            FrameQuadruplet(
                triplet,
                fourth.frames(features)[partner],
                fourth.speaker_id,
                fourth,
            )
        )

    summary = DropSummary("quadruplets", len(triplets), len(quadruplets))
    summary.log()
    return quadruplets, summary
