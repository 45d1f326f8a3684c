"""Discovered pairs, frame-level training items and the synthetic corpus."""
from unsup_speech_features.pairing.dataset import ItemKind
from unsup_speech_features.pairing.dataset import TrainingSet
from unsup_speech_features.pairing.frames import DropSummary
from unsup_speech_features.pairing.frames import FramePair
from unsup_speech_features.pairing.frames import FrameQuadruplet
from unsup_speech_features.pairing.frames import FrameTriplet
from unsup_speech_features.pairing.frames import build_frame_pairs
from unsup_speech_features.pairing.frames import sample_quadruplets
from unsup_speech_features.pairing.frames import sample_triplets
from unsup_speech_features.pairing.segments import DiscoveredPair
from unsup_speech_features.pairing.segments import WordSegment
from unsup_speech_features.pairing.segments import load_pair_list


__all__ = [
    "DiscoveredPair",
    "DropSummary",
    "FramePair",
    "FrameQuadruplet",
    "FrameTriplet",
    "ItemKind",
    "TrainingSet",
    "WordSegment",
    "build_frame_pairs",
    "load_pair_list",
    "sample_quadruplets",
    "sample_triplets",
]
