"""Acoustic front end: MFCCs, CMVN, deltas and the feature archive."""
from unsup_speech_features.features.archive import read_archive
from unsup_speech_features.features.archive import write_archive
from unsup_speech_features.features.mfcc import compute_mfcc
from unsup_speech_features.features.normalization import add_deltas
from unsup_speech_features.features.normalization import apply_cmvn
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.features.sequence import SpeakerMap


__all__ = [
    "FeatureSequence",
    "SpeakerMap",
    "add_deltas",
    "apply_cmvn",
    "compute_mfcc",
    "read_archive",
    "write_archive",
]
