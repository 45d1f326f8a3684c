"""Binary feature archive.

Layout (little-endian): magic ``ZRFA1\\0``, u32 record count, then per record
u16 id length, UTF-8 utterance id, u32 T, u32 D, f32 frame rate and T*D f32
values in row-major order.
"""

import logging
import struct
from pathlib import Path
from typing import BinaryIO
from typing import List
from typing import Sequence

import numpy as np

from unsup_speech_features.config import ARCHIVE_MAGIC
from unsup_speech_features.exceptions import ArchiveError
from unsup_speech_features.features.sequence import FeatureSequence


logger = logging.getLogger(__name__)

_COUNT = struct.Struct("<I")
_ID_LENGTH = struct.Struct("<H")
_RECORD_HEADER = struct.Struct("<IIf")


def _read_exact(file: BinaryIO, size: int, what: str) -> bytes:
    data = file.read(size)
    if len(data) != size:
        raise ArchiveError(f"truncated archive while reading {what}")
    return data


def write_archive(sequences: Sequence[FeatureSequence], path: Path) -> None:
    """Write sequences to ``path``, overwriting it.

    Args:
        sequences (Sequence[FeatureSequence]): Records, written in order.
        path (Path): Output file.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as file:
        file.write(ARCHIVE_MAGIC)
        file.write(_COUNT.pack(len(sequences)))
        for seq in sequences:
            name = seq.utterance_id.encode("utf-8")
            file.write(_ID_LENGTH.pack(len(name)))
            file.write(name)
            file.write(_RECORD_HEADER.pack(seq.n_frames, seq.dim, seq.frame_rate_hz))
            file.write(np.ascontiguousarray(seq.frames, dtype="<f4").tobytes())
    logger.info("Wrote %d records to %s", len(sequences), path)


def read_archive(path: Path) -> List[FeatureSequence]:
    """Read every record of an archive.

    Args:
        path (Path): Archive file.

    Returns:
        List[FeatureSequence]: Records in file order.

    Raises:
        ArchiveError: Bad magic, truncation, or trailing bytes.
    """
    sequences: List[FeatureSequence] = []
    with open(path, "rb") as file:
        if file.read(len(ARCHIVE_MAGIC)) != ARCHIVE_MAGIC:
            raise ArchiveError(f"{path}: not a feature archive")
        (count,) = _COUNT.unpack(_read_exact(file, _COUNT.size, "record count"))
        for _ in range(count):
            (id_length,) = _ID_LENGTH.unpack(_read_exact(file, _ID_LENGTH.size, "id length"))
            utterance_id = _read_exact(file, id_length, "utterance id").decode("utf-8")
            n_frames, dim, frame_rate = _RECORD_HEADER.unpack(
                _read_exact(file, _RECORD_HEADER.size, f"header of {utterance_id}")
            )
            payload = _read_exact(file, 4 * n_frames * dim, f"frames of {utterance_id}")
            frames = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(n_frames, dim)
            try:
                sequences.append(FeatureSequence(utterance_id, frames, float(frame_rate)))
            except ValueError as err:
                raise ArchiveError(f"{path}: invalid record {utterance_id}: {err}") from err
        if file.read(1):
            raise ArchiveError(f"{path}: payload size does not match the record headers")
    logger.debug("Read %d records from %s", len(sequences), path)
    return sequences
