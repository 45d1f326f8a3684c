"""CAE, Triamese and CTriamese models."""
from unsup_speech_features.models.architectures import CaeModel
from unsup_speech_features.models.architectures import CTriameseModel
from unsup_speech_features.models.architectures import Model
from unsup_speech_features.models.architectures import ModelKind
from unsup_speech_features.models.architectures import SpeakerTable
from unsup_speech_features.models.architectures import TriameseModel
from unsup_speech_features.models.checkpoint import ModelCheckpoint
from unsup_speech_features.models.checkpoint import load_checkpoint
from unsup_speech_features.models.checkpoint import save_checkpoint
from unsup_speech_features.models.extraction import extract_archive
from unsup_speech_features.models.extraction import extract_features
from unsup_speech_features.models.losses import cae_loss
from unsup_speech_features.models.losses import cosine_distance
from unsup_speech_features.models.losses import ctriamese_loss
from unsup_speech_features.models.losses import triplet_loss
from unsup_speech_features.models.training import TrainConfig
from unsup_speech_features.models.training import TrainingResult
from unsup_speech_features.models.training import ValidationSet
from unsup_speech_features.models.training import train


__all__ = [
    "CTriameseModel",
    "CaeModel",
    "Model",
    "ModelCheckpoint",
    "ModelKind",
    "SpeakerTable",
    "TrainConfig",
    "TrainingResult",
    "TriameseModel",
    "ValidationSet",
    "cae_loss",
    "cosine_distance",
    "ctriamese_loss",
    "extract_archive",
    "extract_features",
    "load_checkpoint",
    "save_checkpoint",
    "train",
    "triplet_loss",
]
