"""Frame sequences and the utterance-to-speaker map."""

from dataclasses import dataclass
from pathlib import Path
from typing import Any
from typing import Dict
from typing import Iterable
from typing import Iterator
from typing import List
from typing import Mapping

import numpy as np
import numpy.typing as npt

from unsup_speech_features.config import FRAME_RATE_HZ
from unsup_speech_features.exceptions import DataError


FloatArray = npt.NDArray[np.float32]


@dataclass
class FeatureSequence:
    """A T x D matrix of acoustic frames for one utterance."""

    utterance_id: str
    frames: FloatArray
    frame_rate_hz: float = FRAME_RATE_HZ

    def __post_init__(self) -> None:
        """Validate shape and finiteness."""
        if self.frames.ndim != 2:
            raise ValueError(
                f"{self.utterance_id}: frames must be 2-D, got shape {self.frames.shape}"
            )
        if self.frames.shape[0] < 1 or self.frames.shape[1] < 1:
            raise ValueError(f"{self.utterance_id}: empty frame matrix")
        if not np.all(np.isfinite(self.frames)):
            raise ValueError(f"{self.utterance_id}: non-finite frame values")

    @property
    def dim(self) -> int:
        """Frame dimensionality D."""
        return int(self.frames.shape[1])

    @property
    def n_frames(self) -> int:
        """Frame count T."""
        return int(self.frames.shape[0])

    def with_frames(self, frames: npt.NDArray[np.floating[Any]]) -> "FeatureSequence":
        """Return a copy holding new frames for the same utterance."""
        return FeatureSequence(
            self.utterance_id, frames.astype(np.float32), self.frame_rate_hz
        )


def index_sequences(sequences: Iterable[FeatureSequence]) -> Dict[str, FeatureSequence]:
    """Map utterance ids to sequences, rejecting duplicates."""
    index: Dict[str, FeatureSequence] = {}
    for seq in sequences:
        if seq.utterance_id in index:
            raise DataError(f"Duplicate utterance id: {seq.utterance_id}")
        index[seq.utterance_id] = seq
    return index


class SpeakerMap(Mapping[str, str]):
    """Total mapping from utterance id to speaker id."""

    def __init__(self, entries: Mapping[str, str]) -> None:
        """Wrap a plain mapping."""
        self._entries: Dict[str, str] = dict(entries)

    def __getitem__(self, utterance_id: str) -> str:
        """Speaker of an utterance, or a DataError naming the utterance."""
        try:
            return self._entries[utterance_id]
        except KeyError:
            raise DataError(f"No speaker entry for utterance {utterance_id}") from None

    def __iter__(self) -> Iterator[str]:
        """Iterate over utterance ids."""
        return iter(self._entries)

    def __len__(self) -> int:
        """Number of utterances."""
        return len(self._entries)

    def speakers(self) -> List[str]:
        """Sorted distinct speaker ids."""
        return sorted(set(self._entries.values()))

    @classmethod
    def load(cls, path: Path) -> "SpeakerMap":
        """Read ``utterance_id<TAB>speaker_id`` lines.

        Args:
            path (Path): Speaker map file.

        Returns:
            SpeakerMap: The parsed map.

        Raises:
            DataError: A line does not have exactly two fields, or an utterance
                appears twice.
        """
        entries: Dict[str, str] = {}
        with open(path, encoding="utf-8") as file:
            for lineno, line in enumerate(file, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 2 or not all(fields):
                    raise DataError(f"{path}:{lineno}: expected 'utterance<TAB>speaker'")
                if fields[0] in entries:
                    raise DataError(f"{path}:{lineno}: duplicate utterance {fields[0]}")
                entries[fields[0]] = fields[1]
        return cls(entries)

    def save(self, path: Path) -> None:
        """Write the map, one sorted line per utterance."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as file:
            for utterance_id in sorted(self._entries):
                file.write(f"{utterance_id}\t{self._entries[utterance_id]}\n")
