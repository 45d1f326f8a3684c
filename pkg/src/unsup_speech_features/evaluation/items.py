"""Evaluation word lists and ABX item lists."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable
from typing import List
from typing import Mapping
from typing import Optional
from typing import Tuple

from unsup_speech_features.exceptions import DataError
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.pairing.segments import WordSegment
from unsup_speech_features.pairing.segments import check_segment


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabeledWord:
    """An isolated test word with its true type."""

    segment: WordSegment
    gold_type: str

    def __post_init__(self) -> None:
        """Labels must be non-empty."""
        if not self.gold_type:
            raise ValueError(f"{self.segment.key}: empty gold label")

    @property
    def speaker_id(self) -> str:
        """Speaker of the word."""
        return self.segment.speaker_id


@dataclass(frozen=True)
class AbxItem:
    """A word token labelled with a phone triple."""

    segment: WordSegment
    triphone_label: str
    speaker_id: str

    def __post_init__(self) -> None:
        """The label must split into three phones."""
        phones = self.triphone_label.split("-")
        if len(phones) != 3 or not all(phones):
            raise ValueError(
                f"{self.segment.key}: triphone label {self.triphone_label!r} must be 'p1-p2-p3'"
            )

    @property
    def phones(self) -> Tuple[str, str, str]:
        """The three phones."""
        first, middle, last = self.triphone_label.split("-")
        return first, middle, last


def _parse_segment(fields: List[str], where: str) -> WordSegment:
    utterance_id, start, end, speaker = fields[:4]
    try:
        start_frame, end_frame = int(start), int(end)
    except ValueError:
        raise DataError(f"{where}: start and end must be integers") from None
    if end_frame <= start_frame or start_frame < 0:
        raise DataError(f"{where}: segment end {end_frame} must exceed start {start_frame} >= 0")
    return WordSegment(utterance_id, start_frame, end_frame, speaker)


def _rows(path: Path, n_fields: int) -> Iterable[Tuple[str, List[str]]]:
    with open(path, encoding="utf-8") as file:
        for lineno, line in enumerate(file, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            where = f"{path}:{lineno}"
            if len(fields) != n_fields:
                raise DataError(f"{where}: expected {n_fields} tab-separated fields, got {len(fields)}")
            yield where, fields


def load_word_list(
    path: Path,
    features: Optional[Mapping[str, FeatureSequence]] = None,
    min_frames: int = 0,
) -> List[LabeledWord]:
    """Read ``utt start end speaker gold_label`` lines.

    Args:
        path (Path): Word-list file.
        features (Optional[Mapping[str, FeatureSequence]]): When given, every
            segment is bounds-checked against it.
        min_frames (int): Words shorter than this are skipped.

    Returns:
        List[LabeledWord]: Words in file order.
    """
    words: List[LabeledWord] = []
    skipped = 0
    for where, fields in _rows(path, 5):
        segment = _parse_segment(fields, where)
        check_segment(segment, features, where)
        if segment.n_frames < min_frames:
            skipped += 1
            continue
        if not fields[4]:
            raise DataError(f"{where}: empty gold label")
        words.append(LabeledWord(segment, fields[4]))
    if skipped:
        logger.info("Skipped %d words shorter than %d frames", skipped, min_frames)
    return words


def load_abx_list(
    path: Path, features: Optional[Mapping[str, FeatureSequence]] = None
) -> List[AbxItem]:
    """Read ``utt start end speaker gold_label triphone`` lines.

    Args:
        path (Path): ABX item file.
        features (Optional[Mapping[str, FeatureSequence]]): When given, every
            segment is bounds-checked against it.

    Returns:
        List[AbxItem]: Items in file order.

    Raises:
        DataError: Malformed line or triphone label.
    """
    items: List[AbxItem] = []
    for where, fields in _rows(path, 6):
        segment = _parse_segment(fields, where)
        check_segment(segment, features, where)
        try:
            items.append(AbxItem(segment, fields[5], segment.speaker_id))
        except ValueError as err:
            raise DataError(f"{where}: {err}") from None
    return items


def save_word_list(words: Iterable[LabeledWord], path: Path) -> None:
    """Write words in the word-list format."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as file:
        for word in words:
            seg = word.segment
            file.write(
                f"{seg.utterance_id}\t{seg.start_frame}\t{seg.end_frame}"
                f"\t{seg.speaker_id}\t{word.gold_type}\n"
            )


def save_abx_list(items: Iterable[AbxItem], path: Path, gold: Mapping[str, str]) -> None:
    """Write ABX items; ``gold`` maps segment keys to word labels."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as file:
        for item in items:
            seg = item.segment
            file.write(
                f"{seg.utterance_id}\t{seg.start_frame}\t{seg.end_frame}"
                f"\t{item.speaker_id}\t{gold[seg.key]}\t{item.triphone_label}\n"
            )
