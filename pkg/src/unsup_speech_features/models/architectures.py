"""CAE, Triamese and CTriamese networks."""

from dataclasses import dataclass
from enum import Enum
from typing import Any
from typing import ClassVar
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np
import numpy.typing as npt

from unsup_speech_features.config import BOTTLENECK_DIM
from unsup_speech_features.config import FEATURE_DIM
from unsup_speech_features.config import HIDDEN_LAYERS
from unsup_speech_features.config import HIDDEN_UNITS
from unsup_speech_features.config import MARGIN
from unsup_speech_features.config import SPEAKER_EMBEDDING_DIM
from unsup_speech_features.config import TRIAMESE_WIDE_EMBEDDING
from unsup_speech_features.config import TRIAMESE_WIDE_HIDDEN
from unsup_speech_features.exceptions import DataError
from unsup_speech_features.neuralnet.network import LINEAR
from unsup_speech_features.neuralnet.network import RELU
from unsup_speech_features.neuralnet.network import Array
from unsup_speech_features.neuralnet.network import NetworkSpec
from unsup_speech_features.neuralnet.network import Parameters
from unsup_speech_features.neuralnet.network import forward
from unsup_speech_features.neuralnet.network import init_parameters
from unsup_speech_features.neuralnet.network import mlp_spec
from unsup_speech_features.pairing.dataset import ItemKind


DEFAULT_HIDDEN: Tuple[int, ...] = (HIDDEN_UNITS,) * HIDDEN_LAYERS
TRIAMESE_PRESETS = ("39", "100")


class ModelKind(str, Enum):
    """The three feature extractors."""

    CAE = "cae"
    TRIAMESE = "triamese"
    CTRIAMESE = "ctriamese"

    @property
    def code(self) -> int:
        """Byte code used in checkpoints."""
        return list(ModelKind).index(self)

    @property
    def item_kind(self) -> ItemKind:
        """Training items this model consumes."""
        return {
            ModelKind.CAE: ItemKind.PAIRS,
            ModelKind.TRIAMESE: ItemKind.TRIPLETS,
            ModelKind.CTRIAMESE: ItemKind.QUADRUPLETS,
        }[self]

    @property
    def optimizer(self) -> str:
        """Optimizer the model is trained with."""
        return "sgd" if self is ModelKind.TRIAMESE else "adadelta"


@dataclass
class SpeakerTable:
    """Learned per-speaker vectors fed to the decoder."""

    speakers: List[str]
    vectors: Array

    def lookup(self, speaker_ids: Sequence[str]) -> npt.NDArray[np.int64]:
        """Row indices of ``speaker_ids``.

        Raises:
            DataError: An id is not in the table.
        """
        rows = {name: idx for idx, name in enumerate(self.speakers)}
        try:
            return np.asarray([rows[name] for name in speaker_ids], dtype=np.int64)
        except KeyError as err:
            raise DataError(f"Unknown speaker {err.args[0]!r}") from None

    @classmethod
    def create(
        cls, speakers: Sequence[str], dim: int, seed: int, dtype: npt.DTypeLike = np.float32
    ) -> "SpeakerTable":
        """Glorot-uniform initial vectors."""
        rng = np.random.default_rng(seed)
        bound = np.sqrt(6.0 / (len(speakers) + dim))
        vectors = rng.uniform(-bound, bound, size=(len(speakers), dim)).astype(dtype)
        return cls(list(speakers), vectors)


@dataclass
class CaeModel:
    """Encoder to a linear bottleneck, decoder back to frame space."""

    encoder_spec: NetworkSpec
    decoder_spec: NetworkSpec
    encoder: Parameters
    decoder: Parameters
    speaker_table: Optional[SpeakerTable] = None

    kind: ClassVar[ModelKind] = ModelKind.CAE

    def __post_init__(self) -> None:
        """The decoder must take the bottleneck (plus speaker vector)."""
        extra = 0 if self.speaker_table is None else self.speaker_table.vectors.shape[1]
        if self.decoder_spec.input_dim != self.encoder_spec.output_dim + extra:
            raise ValueError(
                f"decoder input {self.decoder_spec.input_dim} != bottleneck "
                f"{self.encoder_spec.output_dim} + speaker dim {extra}"
            )

    @property
    def conditioned(self) -> bool:
        """Whether the decoder takes a speaker vector."""
        return self.speaker_table is not None

    @property
    def input_dim(self) -> int:
        """Frame width."""
        return self.encoder_spec.input_dim

    @property
    def embedding_dim(self) -> int:
        """Bottleneck width."""
        return self.encoder_spec.output_dim

    def parameter_arrays(self) -> List[Array]:
        """Encoder, decoder, then speaker vectors; views, not copies."""
        arrays = self.encoder.arrays() + self.decoder.arrays()
        if self.speaker_table is not None:
            arrays.append(self.speaker_table.vectors)
        return arrays

    def astype(self, dtype: npt.DTypeLike) -> "CaeModel":
        """Copy with parameters cast to ``dtype``."""
        table = None
        if self.speaker_table is not None:
            table = SpeakerTable(list(self.speaker_table.speakers), self.speaker_table.vectors.astype(dtype))
        return CaeModel(
            self.encoder_spec, self.decoder_spec, self.encoder.astype(dtype), self.decoder.astype(dtype), table
        )

    def embed(self, frames: Array) -> Array:
        """Bottleneck features; never uses speaker identity."""
        return forward(self.encoder, self.encoder_spec, frames)[-1]

    def decoder_input(self, embeddings: Array, speaker_rows: Optional[npt.NDArray[np.int64]]) -> Array:
        """Bottleneck output, concatenated with speaker vectors when conditioned."""
        if self.speaker_table is None:
            return embeddings
        if speaker_rows is None:
            raise DataError("speaker-conditioned CAE needs an output speaker")
        return np.concatenate([embeddings, self.speaker_table.vectors[speaker_rows]], axis=1)

    def reconstruct(self, frames: Array, speaker_rows: Optional[npt.NDArray[np.int64]] = None) -> Array:
        """Network output x-hat for input frames."""
        decoder_in = self.decoder_input(self.embed(frames), speaker_rows)
        return forward(self.decoder, self.decoder_spec, decoder_in)[-1]

    @classmethod
    def create(
        cls,
        seed: int,
        speakers: Optional[Sequence[str]] = None,
        input_dim: int = FEATURE_DIM,
        hidden: Sequence[int] = DEFAULT_HIDDEN,
        bottleneck: int = BOTTLENECK_DIM,
        speaker_dim: int = SPEAKER_EMBEDDING_DIM,
        dtype: npt.DTypeLike = np.float32,
    ) -> "CaeModel":
        """Fresh CAE; pass ``speakers`` to enable speaker conditioning.

        Args:
            seed (int): Initialisation seed.
            speakers (Optional[Sequence[str]]): Speaker vocabulary, or None.
            input_dim (int): Frame width.
            hidden (Sequence[int]): Hidden widths of the encoder (mirrored in
                the decoder).
            bottleneck (int): Bottleneck width.
            speaker_dim (int): Speaker vector width.
            dtype (npt.DTypeLike): Parameter dtype.

        Returns:
            CaeModel: The model.
        """
        extra = speaker_dim if speakers is not None else 0
        encoder_spec = mlp_spec(input_dim, hidden, bottleneck, LINEAR, seed)
        decoder_spec = mlp_spec(bottleneck + extra, list(reversed(hidden)), input_dim, LINEAR, seed + 1)
        table = None if speakers is None else SpeakerTable.create(speakers, speaker_dim, seed + 2, dtype)
        return cls(
            encoder_spec,
            decoder_spec,
            init_parameters(encoder_spec, dtype),
            init_parameters(decoder_spec, dtype),
            table,
        )


@dataclass
class TriameseModel:
    """One weight-tied branch ending in a ReLU embedding layer."""

    branch_spec: NetworkSpec
    branch: Parameters
    margin: float = MARGIN

    kind: ClassVar[ModelKind] = ModelKind.TRIAMESE

    def __post_init__(self) -> None:
        """The margin must lie in (0, 2)."""
        if not 0.0 < self.margin < 2.0:
            raise ValueError(f"margin must lie in (0, 2), got {self.margin}")

    @property
    def input_dim(self) -> int:
        """Frame width."""
        return self.branch_spec.input_dim

    @property
    def embedding_dim(self) -> int:
        """Embedding width."""
        return self.branch_spec.output_dim

    def parameter_arrays(self) -> List[Array]:
        """Branch parameters; views, not copies."""
        return self.branch.arrays()

    def branches(self) -> Tuple[Parameters, Parameters, Parameters]:
        """The three branches, which share one parameter set."""
        return (self.branch, self.branch, self.branch)

    def astype(self, dtype: npt.DTypeLike) -> "TriameseModel":
        """Copy with parameters cast to ``dtype``."""
        return TriameseModel(self.branch_spec, self.branch.astype(dtype), self.margin)

    def embed(self, frames: Array) -> Array:
        """Branch output."""
        return forward(self.branch, self.branch_spec, frames)[-1]

    @classmethod
    def create(
        cls,
        seed: int,
        preset: str = "39",
        margin: float = MARGIN,
        input_dim: int = FEATURE_DIM,
        hidden: Optional[Sequence[int]] = None,
        embedding: Optional[int] = None,
        dtype: npt.DTypeLike = np.float32,
    ) -> "TriameseModel":
        """Fresh Triamese network.

        Args:
            seed (int): Initialisation seed.
            preset (str): ``39`` (six 100-unit layers, 39-unit embedding) or
                ``100`` (four 1000-unit layers, 100-unit embedding).
            margin (float): Hinge margin m.
            input_dim (int): Frame width.
            hidden (Optional[Sequence[int]]): Overrides the preset's hidden widths.
            embedding (Optional[int]): Overrides the preset's embedding width.
            dtype (npt.DTypeLike): Parameter dtype.

        Returns:
            TriameseModel: The model.
        """
        if preset not in TRIAMESE_PRESETS:
            raise ValueError(f"Unknown Triamese preset {preset!r}; expected one of {TRIAMESE_PRESETS}")
        if preset == "100":
            preset_hidden, preset_embedding = TRIAMESE_WIDE_HIDDEN, TRIAMESE_WIDE_EMBEDDING
        else:
            preset_hidden, preset_embedding = DEFAULT_HIDDEN, BOTTLENECK_DIM
        spec = mlp_spec(
            input_dim,
            preset_hidden if hidden is None else hidden,
            preset_embedding if embedding is None else embedding,
            RELU,
            seed,
        )
        return cls(spec, init_parameters(spec, dtype), margin)


@dataclass
class CTriameseModel:
    """Three weight-tied CAE branches with a triplet loss on the bottlenecks."""

    cae: CaeModel
    margin: float = MARGIN

    kind: ClassVar[ModelKind] = ModelKind.CTRIAMESE

    def __post_init__(self) -> None:
        """The margin must lie in (0, 2)."""
        if not 0.0 < self.margin < 2.0:
            raise ValueError(f"margin must lie in (0, 2), got {self.margin}")

    @property
    def input_dim(self) -> int:
        """Frame width."""
        return self.cae.input_dim

    @property
    def embedding_dim(self) -> int:
        """Bottleneck width."""
        return self.cae.embedding_dim

    def parameter_arrays(self) -> List[Array]:
        """The shared CAE's parameters."""
        return self.cae.parameter_arrays()

    def branches(self) -> Tuple[CaeModel, CaeModel, CaeModel]:
        """The three branches, which are one CAE."""
        return (self.cae, self.cae, self.cae)

    def astype(self, dtype: npt.DTypeLike) -> "CTriameseModel":
        """Copy with parameters cast to ``dtype``."""
        return CTriameseModel(self.cae.astype(dtype), self.margin)

    def embed(self, frames: Array) -> Array:
        """Bottleneck features of the shared CAE."""
        return self.cae.embed(frames)

    @classmethod
    def create(
        cls, seed: int, speakers: Optional[Sequence[str]] = None, margin: float = MARGIN, **cae_options: Any
    ) -> "CTriameseModel":
        """Fresh CTriamese network; options are forwarded to :meth:`CaeModel.create`."""
        return cls(CaeModel.create(seed, speakers, **cae_options), margin)


Model = Union[CaeModel, TriameseModel, CTriameseModel]
