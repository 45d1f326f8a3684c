"""Cepstral mean and variance normalisation and regression deltas."""

import logging
from collections import defaultdict
from typing import Dict
from typing import List
from typing import Sequence

import numpy as np
import numpy.typing as npt

from unsup_speech_features.config import CMVN_VARIANCE_FLOOR
from unsup_speech_features.config import DELTA_WINDOW
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.features.sequence import SpeakerMap


logger = logging.getLogger(__name__)

CMVN_MODES = ("speaker", "utterance")


def apply_cmvn(
    sequences: Sequence[FeatureSequence],
    speakers: SpeakerMap,
    mode: str = "speaker",
) -> List[FeatureSequence]:
    """Normalise every dimension to zero mean and unit variance.

    Statistics are pooled over all frames of a speaker's utterances (or of a
    single utterance in ``utterance`` mode). Variances are floored at 1e-8
    before division, so a constant dimension maps to zeros.

    Args:
        sequences (Sequence[FeatureSequence]): Input sequences.
        speakers (SpeakerMap): Utterance-to-speaker map; must cover every input.
        mode (str): ``speaker`` or ``utterance``.

    Returns:
        List[FeatureSequence]: Normalised sequences in input order.

    Raises:
        ValueError: Unknown mode.
    """
    if mode not in CMVN_MODES:
        raise ValueError(f"Unknown CMVN mode {mode!r}; expected one of {CMVN_MODES}")

    groups: Dict[str, List[int]] = defaultdict(list)
    for idx, seq in enumerate(sequences):
        # Raises DataError naming the utterance when the entry is missing
        speaker = speakers[seq.utterance_id]
        key = speaker if mode == "speaker" else seq.utterance_id
        groups[key].append(idx)

    normalised: List[FeatureSequence] = list(sequences)
    for key, members in groups.items():
        pooled = np.concatenate(
            [sequences[idx].frames.astype(np.float64) for idx in members], axis=0
        )
        mean = pooled.mean(axis=0)
        std = np.sqrt(np.maximum(pooled.var(axis=0), CMVN_VARIANCE_FLOOR))
        logger.debug("CMVN group %s: %d frames", key, pooled.shape[0])
        for idx in members:
            frames = (sequences[idx].frames.astype(np.float64) - mean) / std
            normalised[idx] = sequences[idx].with_frames(frames)
    return normalised


def _regression_deltas(
    frames: npt.NDArray[np.float64], window: int = DELTA_WINDOW
) -> npt.NDArray[np.float64]:
    n_frames = frames.shape[0]
    padded = np.concatenate(
        [np.repeat(frames[:1], window, axis=0), frames, np.repeat(frames[-1:], window, axis=0)]
    )
    denominator = 2.0 * sum(n * n for n in range(1, window + 1))
    deltas = np.zeros_like(frames)
    for n in range(1, window + 1):
        ahead = padded[window + n : window + n + n_frames]
        behind = padded[window - n : window - n + n_frames]
        deltas += n * (ahead - behind)
    return deltas / denominator


def add_deltas(seq: FeatureSequence) -> FeatureSequence:
    """Append first- and second-order regression deltas.

    Uses a +/-2 frame regression window with edge frames replicated; the
    second-order term is the same regression applied to the first-order one.

    Args:
        seq (FeatureSequence): A (T, D) sequence.

    Returns:
        FeatureSequence: A (T, 3D) sequence ``static | delta | delta-delta``.
    """
    static = seq.frames.astype(np.float64)
    delta = _regression_deltas(static)
    delta_delta = _regression_deltas(delta)
    return seq.with_frames(np.concatenate([static, delta, delta_delta], axis=1))
