"""Columnar training sets and their on-disk format.

Layout (little-endian): magic ``ZRDS1\\0``, u8 item kind, u32 item count N,
u32 dim D, u32 speaker count, per speaker u16 length + UTF-8 name, then the
frame blocks (N*D f32 each: x_a, x_b, then x_neg and x_neg_b when present),
the speaker-index blocks (N u32 each, same order) and two u32 drop counts
(triplet stage, quadruplet stage).
"""

import logging
import struct
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from pathlib import Path
from typing import Any
from typing import BinaryIO
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt

from unsup_speech_features.config import DATASET_MAGIC
from unsup_speech_features.config import FEATURE_DIM
from unsup_speech_features.exceptions import ArchiveError
from unsup_speech_features.pairing.frames import FramePair
from unsup_speech_features.pairing.frames import FrameQuadruplet
from unsup_speech_features.pairing.frames import FrameTriplet


logger = logging.getLogger(__name__)

FloatMatrix = npt.NDArray[np.float32]
IndexVector = npt.NDArray[np.int64]

_HEADER = struct.Struct("<BIII")
_NAME_LENGTH = struct.Struct("<H")
_DROPS = struct.Struct("<II")


class ItemKind(str, Enum):
    """Which frame items a training set holds."""

    PAIRS = "pairs"
    TRIPLETS = "triplets"
    QUADRUPLETS = "quadruplets"

    @property
    def code(self) -> int:
        """Byte code used on disk."""
        return list(ItemKind).index(self)

    @property
    def n_frame_blocks(self) -> int:
        """Number of frame columns stored for this kind."""
        return {"pairs": 2, "triplets": 3, "quadruplets": 4}[self.value]


@dataclass
class TrainingSet:
    """Frame items as aligned arrays with speaker indices into ``speakers``."""

    kind: ItemKind
    speakers: List[str]
    x_a: FloatMatrix
    x_b: FloatMatrix
    speaker_a: IndexVector
    speaker_b: IndexVector
    x_neg: Optional[FloatMatrix] = None
    speaker_neg: Optional[IndexVector] = None
    x_neg_b: Optional[FloatMatrix] = None
    speaker_neg_b: Optional[IndexVector] = None
    drops: Dict[str, int] = field(default_factory=lambda: {"triplets": 0, "quadruplets": 0})

    def __len__(self) -> int:
        """Number of items."""
        return int(self.x_a.shape[0])

    @property
    def dim(self) -> int:
        """Frame dimensionality."""
        return int(self.x_a.shape[1])

    def frame_blocks(self) -> List[FloatMatrix]:
        """Frame columns present for this kind, in storage order."""
        blocks = [self.x_a, self.x_b, self.x_neg, self.x_neg_b][: self.kind.n_frame_blocks]
        return [block for block in blocks if block is not None]

    def speaker_blocks(self) -> List[IndexVector]:
        """Speaker-index columns present for this kind, in storage order."""
        blocks = [self.speaker_a, self.speaker_b, self.speaker_neg, self.speaker_neg_b]
        return [block for block in blocks[: self.kind.n_frame_blocks] if block is not None]

    def take(self, index: npt.NDArray[np.int64]) -> "TrainingSet":
        """Subset of items at ``index``, in that order."""

        def pick(array: Optional[npt.NDArray[Any]]) -> Optional[npt.NDArray[Any]]:
            return None if array is None else array[index]

        return TrainingSet(
            self.kind,
            self.speakers,
            self.x_a[index],
            self.x_b[index],
            self.speaker_a[index],
            self.speaker_b[index],
            pick(self.x_neg),
            pick(self.speaker_neg),
            pick(self.x_neg_b),
            pick(self.speaker_neg_b),
            dict(self.drops),
        )

    @classmethod
    def from_items(
        cls,
        items: Sequence[object],
        kind: ItemKind,
        drops: Optional[Dict[str, int]] = None,
        dim: int = FEATURE_DIM,
    ) -> "TrainingSet":
        """Convert frame pairs, triplets or quadruplets to columns.

        Args:
            items (Sequence[object]): FramePair, FrameTriplet or FrameQuadruplet
                objects matching ``kind``.
            kind (ItemKind): Item kind.
            drops (Optional[Dict[str, int]]): Drop counts to carry along.
            dim (int): Frame dimension used when ``items`` is empty.

        Returns:
            TrainingSet: The columnar set.

        Raises:
            ValueError: An item does not match ``kind``.
        """
        expected = {
            ItemKind.PAIRS: FramePair,
            ItemKind.TRIPLETS: FrameTriplet,
            ItemKind.QUADRUPLETS: FrameQuadruplet,
        }[kind]
        for item in items:
            if not isinstance(item, expected):
                raise ValueError(f"{kind.value} set cannot hold {type(item).__name__}")

        pairs: List[FramePair] = []
        negatives: List[Tuple[npt.NDArray[Any], str]] = []
        fourths: List[Tuple[npt.NDArray[Any], str]] = []
        for item in items:
            if isinstance(item, FrameQuadruplet):
                pairs.append(item.pair)
                negatives.append((item.x_neg, item.triplet.neg_speaker))
                fourths.append((item.x_neg_b, item.neg_b_speaker))
            elif isinstance(item, FrameTriplet):
                pairs.append(item.pair)
                negatives.append((item.x_neg, item.neg_speaker))
            elif isinstance(item, FramePair):
                pairs.append(item)

        names = {p.speaker_a for p in pairs} | {p.speaker_b for p in pairs}
        names |= {name for _, name in negatives} | {name for _, name in fourths}
        speakers = sorted(names)
        lookup = {name: idx for idx, name in enumerate(speakers)}

        def frames(vectors: Sequence[npt.NDArray[Any]]) -> FloatMatrix:
            if not vectors:
                return np.zeros((0, dim), dtype=np.float32)
            return np.stack(vectors).astype(np.float32)

        def indices(names_: Sequence[str]) -> IndexVector:
            return np.asarray([lookup[name] for name in names_], dtype=np.int64)

        dataset = cls(
            kind,
            speakers,
            frames([p.x_a for p in pairs]),
            frames([p.x_b for p in pairs]),
            indices([p.speaker_a for p in pairs]),
            indices([p.speaker_b for p in pairs]),
            drops=dict(drops or {"triplets": 0, "quadruplets": 0}),
        )
        if kind is not ItemKind.PAIRS:
            dataset.x_neg = frames([vec for vec, _ in negatives])
            dataset.speaker_neg = indices([name for _, name in negatives])
        if kind is ItemKind.QUADRUPLETS:
            dataset.x_neg_b = frames([vec for vec, _ in fourths])
            dataset.speaker_neg_b = indices([name for _, name in fourths])
        return dataset

    def save(self, path: Path) -> None:
        """Write the set in the binary dataset format."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as file:
            file.write(DATASET_MAGIC)
            file.write(_HEADER.pack(self.kind.code, len(self), self.dim, len(self.speakers)))
            for name in self.speakers:
                encoded = name.encode("utf-8")
                file.write(_NAME_LENGTH.pack(len(encoded)))
                file.write(encoded)
            for block in self.frame_blocks():
                file.write(np.ascontiguousarray(block, dtype="<f4").tobytes())
            for block in self.speaker_blocks():
                file.write(np.ascontiguousarray(block, dtype="<u4").tobytes())
            file.write(_DROPS.pack(self.drops.get("triplets", 0), self.drops.get("quadruplets", 0)))
        logger.info("Wrote %d %s to %s", len(self), self.kind.value, path)

    @classmethod
    def load(cls, path: Path) -> "TrainingSet":
        """Read a set written by :meth:`save`.

        Args:
            path (Path): Dataset file.

        Returns:
            TrainingSet: The loaded set.

        Raises:
            ArchiveError: Bad magic, unknown kind or truncation.
        """
        with open(path, "rb") as file:
            if file.read(len(DATASET_MAGIC)) != DATASET_MAGIC:
                raise ArchiveError(f"{path}: not a training dataset")
            code, count, dim, n_speakers = _HEADER.unpack(_read_exact(file, _HEADER.size))
            if code >= len(ItemKind):
                raise ArchiveError(f"{path}: unknown item kind {code}")
            kind = list(ItemKind)[code]
            speakers = []
            for _ in range(n_speakers):
                (length,) = _NAME_LENGTH.unpack(_read_exact(file, _NAME_LENGTH.size))
                speakers.append(_read_exact(file, length).decode("utf-8"))
            frames = [
                np.frombuffer(_read_exact(file, 4 * count * dim), dtype="<f4")
                .astype(np.float32)
                .reshape(count, dim)
                for _ in range(kind.n_frame_blocks)
            ]
            indices = [
                np.frombuffer(_read_exact(file, 4 * count), dtype="<u4").astype(np.int64)
                for _ in range(kind.n_frame_blocks)
            ]
            triplet_drops, quadruplet_drops = _DROPS.unpack(_read_exact(file, _DROPS.size))
            if file.read(1):
                raise ArchiveError(f"{path}: trailing bytes after dataset payload")

        frames += [None] * (4 - len(frames))  # type: ignore[list-item]
        indices += [None] * (4 - len(indices))  # type: ignore[list-item]
        return cls(
            kind,
            speakers,
            frames[0],
            frames[1],
            indices[0],
            indices[1],
            frames[2],
            indices[2],
            frames[3],
            indices[3],
            {"triplets": triplet_drops, "quadruplets": quadruplet_drops},
        )


def _read_exact(file: BinaryIO, size: int) -> bytes:
    data = file.read(size)
    if len(data) != size:
        raise ArchiveError("truncated dataset file")
    return data
