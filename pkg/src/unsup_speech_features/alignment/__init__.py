"""Dynamic time warping."""
from unsup_speech_features.alignment.dtw import AlignmentPath
from unsup_speech_features.alignment.dtw import dtw_align
from unsup_speech_features.alignment.dtw import dtw_distance
from unsup_speech_features.alignment.dtw import local_distances


__all__ = ["AlignmentPath", "dtw_align", "dtw_distance", "local_distances"]
