"""Word segments and discovered pair lists."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict
from typing import Iterable
from typing import List
from typing import Mapping
from typing import Optional

import numpy as np
import numpy.typing as npt

from unsup_speech_features.exceptions import DataError
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.features.sequence import SpeakerMap


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WordSegment:
    """A frame interval [start_frame, end_frame) of one utterance."""

    utterance_id: str
    start_frame: int
    end_frame: int
    speaker_id: str
    cluster_id: int = 0

    def __post_init__(self) -> None:
        """Check the interval and cluster id."""
        if not 0 <= self.start_frame < self.end_frame:
            raise ValueError(
                f"{self.utterance_id}: invalid interval [{self.start_frame}, {self.end_frame})"
            )
        if self.cluster_id < 0:
            raise ValueError(f"{self.utterance_id}: negative cluster id {self.cluster_id}")

    @property
    def n_frames(self) -> int:
        """Segment length in frames."""
        return self.end_frame - self.start_frame

    @property
    def key(self) -> str:
        """Identity of the interval, independent of cluster label."""
        return f"{self.utterance_id}:{self.start_frame}:{self.end_frame}"

    def frames(self, features: Mapping[str, FeatureSequence]) -> npt.NDArray[np.float32]:
        """Slice this segment's frames out of the feature map."""
        try:
            seq = features[self.utterance_id]
        except KeyError:
            raise DataError(f"Unknown utterance {self.utterance_id}") from None
        if self.end_frame > seq.n_frames:
            raise DataError(
                f"Segment {self.key} exceeds utterance length {seq.n_frames}"
            )
        return seq.frames[self.start_frame : self.end_frame]


@dataclass(frozen=True)
class DiscoveredPair:
    """Two segments predicted to be of the same word type."""

    first: WordSegment
    second: WordSegment

    def __post_init__(self) -> None:
        """Both halves must carry the same cluster."""
        if self.first.cluster_id != self.second.cluster_id:
            raise ValueError(
                f"cluster mismatch: {self.first.cluster_id} vs {self.second.cluster_id}"
            )

    @property
    def cluster_id(self) -> int:
        """Shared predicted cluster."""
        return self.first.cluster_id


def check_segment(
    segment: WordSegment, features: Optional[Mapping[str, FeatureSequence]], where: str
) -> None:
    """Raise a DataError if the segment does not fit its utterance."""
    if features is None:
        return
    seq = features.get(segment.utterance_id)
    if seq is None:
        raise DataError(f"{where}: unknown utterance {segment.utterance_id}")
    if segment.end_frame > seq.n_frames:
        raise DataError(
            f"{where}: segment {segment.key} out of bounds (utterance has {seq.n_frames} frames)"
        )


def _parse_frame(token: str, where: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise DataError(f"{where}: expected an integer frame index, got {token!r}") from None


def load_pair_list(
    path: Path,
    speakers: SpeakerMap,
    features: Optional[Mapping[str, FeatureSequence]] = None,
) -> List[DiscoveredPair]:
    """Parse a discovered-pair list.

    Each non-comment line holds seven tab-separated fields
    ``cluster utt_a start_a end_a utt_b start_b end_b`` with frame indices at
    100 frames per second and exclusive ends.

    Args:
        path (Path): Pair-list file.
        speakers (SpeakerMap): Resolves each utterance's speaker.
        features (Optional[Mapping[str, FeatureSequence]]): When given, every
            segment is bounds-checked against it.

    Returns:
        List[DiscoveredPair]: Pairs in file order.

    Raises:
        DataError: Malformed line, bad interval, unknown utterance or speaker,
            or a segment out of bounds; the message names the line number.
    """
    pairs: List[DiscoveredPair] = []
    with open(path, encoding="utf-8") as file:
        for lineno, line in enumerate(file, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            where = f"{path}:{lineno}"
            fields = line.split("\t")
            if len(fields) != 7:
                raise DataError(f"{where}: expected 7 tab-separated fields, got {len(fields)}")
            try:
                cluster_id = int(fields[0])
            except ValueError:
                raise DataError(f"{where}: bad cluster id {fields[0]!r}") from None
            segments = []
            for utt, start, end in (fields[1:4], fields[4:7]):
                start_frame = _parse_frame(start, where)
                end_frame = _parse_frame(end, where)
                if end_frame <= start_frame or start_frame < 0:
                    raise DataError(
                        f"{where}: segment end {end_frame} must exceed start {start_frame} >= 0"
                    )
                if cluster_id < 0:
                    raise DataError(f"{where}: negative cluster id {cluster_id}")
                try:
                    speaker = speakers[utt]
                except DataError as err:
                    raise DataError(f"{where}: {err}") from None
                segment = WordSegment(utt, start_frame, end_frame, speaker, cluster_id)
                check_segment(segment, features, where)
                segments.append(segment)
            pairs.append(DiscoveredPair(segments[0], segments[1]))
    logger.info("Loaded %d discovered pairs from %s", len(pairs), path)
    return pairs


def save_pair_list(pairs: Iterable[DiscoveredPair], path: Path) -> None:
    """Write pairs in the pair-list format."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as file:
        file.write("# cluster\tutt_a\tstart_a\tend_a\tutt_b\tstart_b\tend_b\n")
        for pair in pairs:
            a, b = pair.first, pair.second
            file.write(
                f"{pair.cluster_id}\t{a.utterance_id}\t{a.start_frame}\t{a.end_frame}"
                f"\t{b.utterance_id}\t{b.start_frame}\t{b.end_frame}\n"
            )


def unique_segments(pairs: Iterable[DiscoveredPair]) -> List[WordSegment]:
    """Distinct (interval, cluster) segments in first-seen order."""
    seen: Dict[WordSegment, None] = {}
    for pair in pairs:
        seen.setdefault(pair.first, None)
        seen.setdefault(pair.second, None)
    return list(seen)
