"""Feature extraction with a trained network."""

import logging
from functools import partial
from typing import List
from typing import Sequence
from typing import Union

import numpy as np

from unsup_speech_features.exceptions import DataError
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.models.architectures import Model
from unsup_speech_features.models.checkpoint import ModelCheckpoint
from unsup_speech_features.utils import parallel_map


logger = logging.getLogger(__name__)


def extract_features(source: Union[Model, ModelCheckpoint], seq: FeatureSequence) -> FeatureSequence:
    """Map every frame through the encoder (CAE, CTriamese) or branch (Triamese).

    Speaker identity is never used.

    Raises:
        DataError: The frames do not have the model's input width.
    """
    model = source.model if isinstance(source, ModelCheckpoint) else source
    if seq.dim != model.input_dim:
        raise DataError(f"{seq.utterance_id}: frames have dim {seq.dim}, model expects {model.input_dim}")
    dtype = model.parameter_arrays()[0].dtype
    return seq.with_frames(model.embed(np.asarray(seq.frames, dtype=dtype)))


def extract_archive(
    source: Union[Model, ModelCheckpoint], sequences: Sequence[FeatureSequence], threads: int = 1
) -> List[FeatureSequence]:
    """:func:`extract_features` over many utterances, order preserved."""
    model = source.model if isinstance(source, ModelCheckpoint) else source
    extracted = parallel_map(partial(extract_features, model), sequences, threads)
    logger.info("Extracted %d-dim features for %d utterances", model.embedding_dim, len(extracted))
    return extracted
