"""Training loops with optional pretraining and validation-AP early stopping."""

import copy
import logging
import time
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Dict
from typing import List
from typing import Mapping
from typing import Optional
from typing import Sequence

import numpy as np
from tqdm import tqdm

from unsup_speech_features.config import BATCH_SIZE
from unsup_speech_features.config import MARGIN
from unsup_speech_features.config import PATIENCE
from unsup_speech_features.exceptions import DataError
from unsup_speech_features.exceptions import NumericError
from unsup_speech_features.evaluation.items import LabeledWord
from unsup_speech_features.evaluation.report import EvalConfig
from unsup_speech_features.evaluation.samediff import same_different_ap
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.models.architectures import TRIAMESE_PRESETS
from unsup_speech_features.models.architectures import CaeModel
from unsup_speech_features.models.architectures import CTriameseModel
from unsup_speech_features.models.architectures import Model
from unsup_speech_features.models.architectures import ModelKind
from unsup_speech_features.models.architectures import TriameseModel
from unsup_speech_features.models.checkpoint import ModelCheckpoint
from unsup_speech_features.models.losses import batch_objective
from unsup_speech_features.models.losses import cae_batch
from unsup_speech_features.neuralnet.optimizers import Optimizer
from unsup_speech_features.neuralnet.optimizers import make_optimizer
from unsup_speech_features.pairing.dataset import TrainingSet
from unsup_speech_features.utils import config_digest


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Settings of one training run."""

    model: ModelKind
    epochs: int = 10
    batch_size: int = BATCH_SIZE
    seed: int = 0
    margin: float = MARGIN
    speaker_conditioning: bool = False
    patience: int = PATIENCE
    triamese_preset: str = "39"
    pretrain_epochs: int = 0
    learning_rate: Optional[float] = None

    def __post_init__(self) -> None:
        """Validate ranges."""
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be positive")
        if not 0.0 < self.margin < 2.0:
            raise ValueError(f"margin must lie in (0, 2), got {self.margin}")
        if self.patience < 1:
            raise ValueError("patience must be positive")
        if self.pretrain_epochs < 0:
            raise ValueError("pretrain_epochs must be >= 0")
        if self.triamese_preset not in TRIAMESE_PRESETS:
            raise ValueError(f"Unknown Triamese preset {self.triamese_preset!r}")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.speaker_conditioning and self.model is ModelKind.TRIAMESE:
            raise ValueError("speaker conditioning needs a decoder (cae or ctriamese)")

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly view."""
        return {
            "model": self.model.value,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "margin": self.margin,
            "speaker_conditioning": self.speaker_conditioning,
            "patience": self.patience,
            "triamese_preset": self.triamese_preset,
            "pretrain_epochs": self.pretrain_epochs,
            "learning_rate": self.learning_rate,
        }

    @property
    def digest(self) -> str:
        """Stable hash of all settings."""
        return config_digest(self.to_dict())


@dataclass(frozen=True)
class EpochRecord:
    """Mean training loss and validation AP after one epoch."""

    epoch: int
    loss: float
    val_ap: Optional[float] = None


@dataclass
class TrainingResult:
    """The retained checkpoint and the per-epoch history."""

    checkpoint: ModelCheckpoint
    history: List[EpochRecord] = field(default_factory=list)
    stopped_early: bool = False

    @property
    def best_epoch(self) -> int:
        """Epoch of the retained checkpoint."""
        return self.checkpoint.epoch


@dataclass
class ValidationSet:
    """Words scored by same-different AP after each epoch."""

    words: Sequence[LabeledWord]
    features: Mapping[str, FeatureSequence]
    config: EvalConfig = EvalConfig()

    def score(self, model: Model) -> float:
        """AP of the model's features on the validation words."""
        needed = {word.segment.utterance_id for word in self.words}
        dtype = model.parameter_arrays()[0].dtype
        extracted = {
            uid: seq.with_frames(model.embed(seq.frames.astype(dtype)))
            for uid, seq in self.features.items()
            if uid in needed
        }
        report = same_different_ap(self.words, extracted, self.config)
        assert report.ap is not None
        return report.ap


def build_model(config: TrainConfig, speakers: Sequence[str], input_dim: int) -> Model:
    """Freshly initialised model for ``config``."""
    table = list(speakers) if config.speaker_conditioning else None
    if config.model is ModelKind.CAE:
        return CaeModel.create(config.seed, table, input_dim=input_dim)
    if config.model is ModelKind.TRIAMESE:
        return TriameseModel.create(config.seed, config.triamese_preset, config.margin, input_dim)
    return CTriameseModel.create(config.seed, table, config.margin, input_dim=input_dim)


def build_optimizer(config: TrainConfig, model: Model) -> Optimizer:
    """Adadelta for CAE and CTriamese, SGD for Triamese."""
    optimizer = make_optimizer(config.model.optimizer, model.parameter_arrays())
    if config.learning_rate is not None:
        optimizer.learning_rate = config.learning_rate
    return optimizer


def _cae_of(model: Model) -> Optional[CaeModel]:
    if isinstance(model, CaeModel):
        return model
    if isinstance(model, CTriameseModel):
        return model.cae
    return None


def pretrain(
    model: Model, dataset: TrainingSet, config: TrainConfig, rng: np.random.Generator
) -> List[float]:
    """Train the CAE to reconstruct every training frame from itself.

    Returns:
        List[float]: Mean loss per pretraining epoch.
    """
    cae = _cae_of(model)
    if cae is None:
        logger.warning("Pretraining applies to CAE-based models only; skipping")
        return []
    frames = np.concatenate(dataset.frame_blocks()).astype(cae.encoder.weights[0].dtype)
    speakers = np.concatenate(dataset.speaker_blocks())
    optimizer = build_optimizer(config, model)
    params = cae.parameter_arrays()
    losses = []
    for epoch in range(1, config.pretrain_epochs + 1):
        order = rng.permutation(frames.shape[0])
        total = 0.0
        for start in tqdm(
            range(0, order.shape[0], config.batch_size), desc=f"pretrain {epoch}", disable=None, leave=False
        ):
            index = order[start : start + config.batch_size]
            rows = speakers[index] if cae.conditioned else None
            result = cae_batch(cae, frames[index], frames[index], rows)
            optimizer.step(params, result.gradients)
            total += result.loss * index.shape[0]
        losses.append(total / frames.shape[0])
        logger.info("Pretraining epoch %d: loss %.6f", epoch, losses[-1])
    return losses


def _check_speakers(model: Model, dataset: TrainingSet) -> None:
    cae = _cae_of(model)
    if cae is not None and cae.speaker_table is not None and cae.speaker_table.speakers != dataset.speakers:
        raise DataError("model speaker table does not match the dataset speakers")


def train(
    dataset: TrainingSet,
    config: TrainConfig,
    validation: Optional[ValidationSet] = None,
    model: Optional[Model] = None,
) -> TrainingResult:
    """Train a model on frame items.

    Each epoch visits every item once in a seeded random order. With a
    validation set the checkpoint with the best AP is kept and training stops
    after ``config.patience`` epochs without improvement; otherwise the model
    after the last epoch is kept.

    Args:
        dataset (TrainingSet): Pairs, triplets or quadruplets matching the model.
        config (TrainConfig): Run settings.
        validation (Optional[ValidationSet]): Words for early stopping.
        model (Optional[Model]): Start from this model instead of a fresh one.

    Returns:
        TrainingResult: Retained checkpoint and per-epoch history.

    Raises:
        DataError: Empty dataset, or items that do not match the model kind.
        NumericError: The loss became non-finite.
    """
    if len(dataset) == 0:
        raise DataError(f"empty training set: no {dataset.kind.value} to train on")
    if dataset.kind is not config.model.item_kind:
        raise DataError(
            f"{config.model.value} trains on {config.model.item_kind.value}, dataset holds {dataset.kind.value}"
        )
    if model is None:
        model = build_model(config, dataset.speakers, dataset.dim)
    _check_speakers(model, dataset)

    rng = np.random.default_rng(config.seed)
    if config.pretrain_epochs:
        pretrain(model, dataset, config, rng)
    optimizer = build_optimizer(config, model)
    params = model.parameter_arrays()
    logger.debug("Training config %s (digest %s)", config.to_dict(), config.digest)

    history: List[EpochRecord] = []
    best: Optional[ModelCheckpoint] = None
    best_ap = -np.inf
    since_best = 0
    stopped_early = False
    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(len(dataset))
        total = 0.0
        for start in tqdm(
            range(0, len(dataset), config.batch_size), desc=f"epoch {epoch}", disable=None, leave=False
        ):
            batch = dataset.take(order[start : start + config.batch_size])
            result = batch_objective(model, batch)
            optimizer.step(params, result.gradients)
            total += result.loss * len(batch)
        loss = total / len(dataset)
        if not np.isfinite(loss):
            raise NumericError(f"epoch {epoch}: training loss is not finite")

        val_ap = validation.score(model) if validation is not None else None
        history.append(EpochRecord(epoch, loss, val_ap))
        logger.info(
            "Epoch %d: loss %.6f%s", epoch, loss, "" if val_ap is None else f", validation AP {val_ap:.4f}"
        )
        logger.debug("Epoch %d took %.2fs", epoch, time.perf_counter() - started)

        if val_ap is None or val_ap > best_ap:
            best = ModelCheckpoint(
                copy.deepcopy(model), copy.deepcopy(optimizer), epoch, config.seed, config.to_dict()
            )
            best_ap = -np.inf if val_ap is None else val_ap
            since_best = 0
            continue
        since_best += 1
        if since_best >= config.patience:
            logger.warning(
                "Early stop after epoch %d: no AP gain for %d epochs (best epoch %d)",
                epoch,
                since_best,
                best.epoch if best else 0,
            )
            stopped_early = True
            break

    assert best is not None
    return TrainingResult(best, history, stopped_early)
