"""Finite-difference checks of the three training objectives on small networks."""

import logging
from typing import Any
from typing import Dict
from typing import Optional
from typing import Sequence

import numpy as np
import numpy.typing as npt

from unsup_speech_features.config import GRADCHECK_EPSILON
from unsup_speech_features.config import GRADCHECK_TOLERANCE
from unsup_speech_features.models.architectures import CaeModel
from unsup_speech_features.models.architectures import CTriameseModel
from unsup_speech_features.models.architectures import Model
from unsup_speech_features.models.architectures import ModelKind
from unsup_speech_features.models.architectures import TriameseModel
from unsup_speech_features.models.losses import BatchObjective
from unsup_speech_features.neuralnet.gradcheck import GradientCheckResult
from unsup_speech_features.neuralnet.gradcheck import gradient_check
from unsup_speech_features.pairing.dataset import TrainingSet


logger = logging.getLogger(__name__)

TOY_DIM = 6
TOY_HIDDEN = (5, 5)
TOY_EMBEDDING = 4
TOY_SPEAKER_DIM = 3
TOY_SPEAKERS = ("s0", "s1", "s2")


def toy_dataset(kind: ModelKind, n_items: int = 4, seed: int = 0) -> TrainingSet:
    """Random items of the kind ``kind`` trains on."""
    rng = np.random.default_rng(seed)
    columns = kind.item_kind.n_frame_blocks

    def frames() -> npt.NDArray[Any]:
        return rng.normal(size=(n_items, TOY_DIM)).astype(np.float32)

    def speakers() -> npt.NDArray[Any]:
        return rng.integers(0, len(TOY_SPEAKERS), size=n_items).astype(np.int64)

    dataset = TrainingSet(kind.item_kind, list(TOY_SPEAKERS), frames(), frames(), speakers(), speakers())
    if columns >= 3:
        dataset.x_neg, dataset.speaker_neg = frames(), speakers()
    if columns == 4:
        dataset.x_neg_b, dataset.speaker_neg_b = frames(), speakers()
    return dataset


def toy_model(kind: ModelKind, seed: int = 0, speaker_conditioning: bool = True) -> Model:
    """A float64 model of ``kind`` with tiny layers."""
    speakers: Optional[Sequence[str]] = TOY_SPEAKERS if speaker_conditioning else None
    if kind is ModelKind.TRIAMESE:
        return TriameseModel.create(
            seed, input_dim=TOY_DIM, hidden=TOY_HIDDEN, embedding=TOY_EMBEDDING, dtype=np.float64
        )
    cae = CaeModel.create(seed, speakers, TOY_DIM, TOY_HIDDEN, TOY_EMBEDDING, TOY_SPEAKER_DIM, np.float64)
    return cae if kind is ModelKind.CAE else CTriameseModel(cae)


def check_gradients(
    kind: ModelKind,
    seed: int = 0,
    speaker_conditioning: bool = True,
    epsilon: float = GRADCHECK_EPSILON,
    tolerance: float = GRADCHECK_TOLERANCE,
) -> GradientCheckResult:
    """Gradient check of one model's batch objective."""
    conditioned = speaker_conditioning and kind is not ModelKind.TRIAMESE
    model = toy_model(kind, seed, conditioned)
    result = gradient_check(BatchObjective(model, toy_dataset(kind, seed=seed)), epsilon, tolerance)
    logger.info(
        "%s: max relative error %.3e (%d checked, %d skipped)",
        kind.value,
        result.max_relative_error,
        result.n_checked,
        result.n_skipped,
    )
    return result


def check_all_gradients(seed: int = 0, tolerance: float = GRADCHECK_TOLERANCE) -> Dict[str, GradientCheckResult]:
    """Gradient checks of every model kind, conditioned where it applies."""
    return {kind.value: check_gradients(kind, seed, tolerance=tolerance) for kind in ModelKind}
