"""Binary checkpoints for trained models.

Layout (little-endian): magic ``ZRCK1\\0``, u8 model kind, u32 config digest,
u32 header length and a canonical-JSON header (network specs, margin,
speakers, optimizer kind and hyperparameters, training config), f32 parameter
blobs in ``parameter_arrays()`` order, u8 optimizer flag and, when set, the
f32 optimizer state arrays, then u32 epoch and u64 seed.
"""

import json
import logging
import struct
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any
from typing import BinaryIO
from typing import Dict
from typing import List
from typing import Optional

import numpy as np

from unsup_speech_features.config import CHECKPOINT_MAGIC
from unsup_speech_features.exceptions import CheckpointError
from unsup_speech_features.models.architectures import CaeModel
from unsup_speech_features.models.architectures import CTriameseModel
from unsup_speech_features.models.architectures import Model
from unsup_speech_features.models.architectures import ModelKind
from unsup_speech_features.models.architectures import SpeakerTable
from unsup_speech_features.models.architectures import TriameseModel
from unsup_speech_features.neuralnet.network import Array
from unsup_speech_features.neuralnet.network import NetworkSpec
from unsup_speech_features.neuralnet.network import init_parameters
from unsup_speech_features.neuralnet.optimizers import Optimizer
from unsup_speech_features.neuralnet.optimizers import make_optimizer
from unsup_speech_features.utils import canonical_json
from unsup_speech_features.utils import digest_u32


logger = logging.getLogger(__name__)

_PREAMBLE = struct.Struct("<BII")
_FLAG = struct.Struct("<B")
_TRAILER = struct.Struct("<IQ")


@dataclass
class ModelCheckpoint:
    """A model with the state needed to resume or reproduce its training."""

    model: Model
    optimizer: Optional[Optimizer] = None
    epoch: int = 0
    seed: int = 0
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def kind(self) -> ModelKind:
        """Model kind."""
        return self.model.kind

    @property
    def digest(self) -> int:
        """32-bit digest of the training config."""
        return digest_u32(self.config)


def _cae_structure(cae: CaeModel) -> Dict[str, Any]:
    return {
        "encoder": cae.encoder_spec.to_dict(),
        "decoder": cae.decoder_spec.to_dict(),
        "speakers": None if cae.speaker_table is None else list(cae.speaker_table.speakers),
    }


def model_structure(model: Model) -> Dict[str, Any]:
    """Everything except parameter values needed to rebuild ``model``."""
    if isinstance(model, CaeModel):
        return _cae_structure(model)
    if isinstance(model, TriameseModel):
        return {"branch": model.branch_spec.to_dict(), "margin": model.margin}
    return dict(_cae_structure(model.cae), margin=model.margin)


def _empty_cae(structure: Dict[str, Any]) -> CaeModel:
    encoder_spec = NetworkSpec.from_dict(structure["encoder"])
    decoder_spec = NetworkSpec.from_dict(structure["decoder"])
    table = None
    if structure["speakers"] is not None:
        speaker_dim = decoder_spec.input_dim - encoder_spec.output_dim
        speakers = list(structure["speakers"])
        table = SpeakerTable(speakers, np.zeros((len(speakers), speaker_dim), dtype=np.float32))
    return CaeModel(encoder_spec, decoder_spec, init_parameters(encoder_spec), init_parameters(decoder_spec), table)


def empty_model(kind: ModelKind, structure: Dict[str, Any]) -> Model:
    """Model of the given structure with placeholder parameters."""
    if kind is ModelKind.CAE:
        return _empty_cae(structure)
    if kind is ModelKind.TRIAMESE:
        spec = NetworkSpec.from_dict(structure["branch"])
        return TriameseModel(spec, init_parameters(spec), float(structure["margin"]))
    return CTriameseModel(_empty_cae(structure), float(structure["margin"]))


def _write_arrays(file: BinaryIO, arrays: List[Array]) -> None:
    for array in arrays:
        file.write(np.ascontiguousarray(array, dtype="<f4").tobytes())


def save_checkpoint(checkpoint: ModelCheckpoint, path: Path) -> None:
    """Write ``checkpoint`` to ``path``; parameters are stored as float32.

    Args:
        checkpoint (ModelCheckpoint): What to save.
        path (Path): Destination file.
    """
    optimizer = checkpoint.optimizer
    header = {
        "config": checkpoint.config,
        "optimizer": None
        if optimizer is None
        else {"kind": optimizer.kind, "hyperparameters": optimizer.hyperparameters()},
        "structure": model_structure(checkpoint.model),
    }
    encoded = canonical_json(header).encode("utf-8")

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as file:
        file.write(CHECKPOINT_MAGIC)
        file.write(_PREAMBLE.pack(checkpoint.kind.code, checkpoint.digest, len(encoded)))
        file.write(encoded)
        _write_arrays(file, checkpoint.model.parameter_arrays())
        file.write(_FLAG.pack(0 if optimizer is None else 1))
        if optimizer is not None:
            _write_arrays(file, optimizer.state_arrays())
        file.write(_TRAILER.pack(checkpoint.epoch, checkpoint.seed))
    logger.info("Wrote %s checkpoint (epoch %d) to %s", checkpoint.kind.value, checkpoint.epoch, path)


def _read_exact(file: BinaryIO, size: int, path: Path) -> bytes:
    data = file.read(size)
    if len(data) != size:
        raise CheckpointError(f"{path}: truncated checkpoint")
    return data


def _read_into(file: BinaryIO, arrays: List[Array], path: Path) -> None:
    for array in arrays:
        blob = _read_exact(file, 4 * array.size, path)
        array[...] = np.frombuffer(blob, dtype="<f4").reshape(array.shape)


def load_checkpoint(
    path: Path,
    expected_kind: Optional[ModelKind] = None,
    expected_digest: Optional[int] = None,
) -> ModelCheckpoint:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Args:
        path (Path): Checkpoint file.
        expected_kind (Optional[ModelKind]): Raise unless the file holds this kind.
        expected_digest (Optional[int]): Warn when the stored config digest differs.

    Returns:
        ModelCheckpoint: The checkpoint.

    Raises:
        CheckpointError: Bad magic, unknown or unexpected kind, malformed
            header, truncation or trailing bytes.
    """
    with open(path, "rb") as file:
        if file.read(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint")
        code, digest, header_length = _PREAMBLE.unpack(_read_exact(file, _PREAMBLE.size, path))
        if code >= len(ModelKind):
            raise CheckpointError(f"{path}: unknown model kind {code}")
        kind = list(ModelKind)[code]
        if expected_kind is not None and kind is not expected_kind:
            raise CheckpointError(f"{path}: holds a {kind.value} model, expected {expected_kind.value}")
        try:
            header = json.loads(_read_exact(file, header_length, path).decode("utf-8"))
            model = empty_model(kind, header["structure"])
        except (KeyError, TypeError, ValueError) as err:
            if isinstance(err, CheckpointError):
                raise
            raise CheckpointError(f"{path}: malformed header ({err})") from err
        _read_into(file, model.parameter_arrays(), path)

        optimizer: Optional[Optimizer] = None
        (has_optimizer,) = _FLAG.unpack(_read_exact(file, _FLAG.size, path))
        if has_optimizer:
            if header["optimizer"] is None:
                raise CheckpointError(f"{path}: optimizer state without optimizer settings")
            optimizer = make_optimizer(header["optimizer"]["kind"], model.parameter_arrays())
            state = [np.zeros_like(array) for array in optimizer.state_arrays()]
            _read_into(file, state, path)
            optimizer.load_state(header["optimizer"]["hyperparameters"], state)
        epoch, seed = _TRAILER.unpack(_read_exact(file, _TRAILER.size, path))
        if file.read(1):
            raise CheckpointError(f"{path}: trailing bytes after checkpoint payload")

    if expected_digest is not None and expected_digest != digest:
        logger.warning("%s: config digest %08x differs from expected %08x", path, digest, expected_digest)
    return ModelCheckpoint(model, optimizer, epoch, seed, header["config"])
