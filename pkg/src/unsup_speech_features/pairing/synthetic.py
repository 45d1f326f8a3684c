"""Synthetic multi-speaker word corpus for desk-scale experiments.

Each word type is a smooth random trajectory in a small class subspace. A
token is a time-warped copy of its type's trajectory plus a constant
channel offset in the remaining dimensions, drawn afresh for every token.
Speakers leak the class trajectory into those dimensions through their own
random map and apply a per-dimension affine distortion; a seeded rotation
mixes all dimensions so that no single feature isolates the class subspace.
Training speakers supply the discovered pairs; held-out speakers supply the
evaluation word and ABX lists.
"""

import itertools
import logging
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np
import numpy.typing as npt
from scipy.interpolate import CubicSpline
from scipy.stats import ortho_group

from unsup_speech_features.config import FEATURE_DIM
from unsup_speech_features.evaluation.items import AbxItem
from unsup_speech_features.evaluation.items import LabeledWord
from unsup_speech_features.evaluation.items import save_abx_list
from unsup_speech_features.evaluation.items import save_word_list
from unsup_speech_features.features.archive import write_archive
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.features.sequence import SpeakerMap
from unsup_speech_features.pairing.segments import DiscoveredPair
from unsup_speech_features.pairing.segments import WordSegment
from unsup_speech_features.pairing.segments import save_pair_list


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic corpus."""

    n_types: int = 5
    n_speakers: int = 4
    n_eval_speakers: int = 2
    words_per_speaker_per_type: int = 4
    frames_range: Tuple[int, int] = (20, 35)
    dim: int = FEATURE_DIM
    speaker_distortion: float = 0.4
    noise_sigma: float = 0.15
    class_dims: int = 4
    nuisance_sigma: float = 0.6
    seed: int = 0
    pair_corruption: float = 0.0
    time_warp: bool = True
    words_per_utterance: int = 5
    n_knots: int = 6
    max_pairs: Optional[int] = None

    def __post_init__(self) -> None:
        """Reject degenerate values."""
        if self.n_types < 2:
            raise ValueError(f"n_types must be at least 2, got {self.n_types}")
        if self.n_speakers < 1:
            raise ValueError(f"n_speakers must be at least 1, got {self.n_speakers}")
        if self.n_eval_speakers < 0:
            raise ValueError("n_eval_speakers must be non-negative")
        if self.words_per_speaker_per_type < 1:
            raise ValueError("words_per_speaker_per_type must be at least 1")
        low, high = self.frames_range
        if not 2 <= low <= high:
            raise ValueError(f"frames_range must satisfy 2 <= low <= high, got {self.frames_range}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not 0.0 <= self.speaker_distortion < 1.0:
            raise ValueError("speaker_distortion must lie in [0, 1)")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")
        if not 1 <= self.class_dims <= self.dim:
            raise ValueError(f"class_dims must lie in [1, {self.dim}], got {self.class_dims}")
        if self.nuisance_sigma < 0.0:
            raise ValueError("nuisance_sigma must be non-negative")
        if not 0.0 <= self.pair_corruption <= 1.0:
            raise ValueError("pair_corruption must lie in [0, 1]")
        if self.words_per_utterance < 1 or self.n_knots < 2:
            raise ValueError("words_per_utterance must be >= 1 and n_knots >= 2")
        if self.max_pairs is not None and self.max_pairs < 1:
            raise ValueError("max_pairs must be positive when given")

    def to_dict(self) -> Dict[str, Any]:
        """Plain-dict view."""
        values = asdict(self)
        values["frames_range"] = list(self.frames_range)
        return values


@dataclass
class SyntheticCorpus:
    """Generated features, labels and pair lists."""

    features: List[FeatureSequence]
    speakers: SpeakerMap
    segments: List[WordSegment]
    pairs: List[DiscoveredPair]
    eval_words: List[LabeledWord]
    abx_items: List[AbxItem]
    train_speakers: List[str] = field(default_factory=list)
    eval_speakers: List[str] = field(default_factory=list)

    def gold_labels(self) -> Dict[str, str]:
        """Word label of every token, keyed by segment interval."""
        return {seg.key: word_label(seg.cluster_id) for seg in self.segments}

    def mismatched_pairs(self) -> int:
        """Number of pairs whose two tokens have different true types."""
        gold = self.gold_labels()
        return sum(gold[p.first.key] != gold[p.second.key] for p in self.pairs)


def word_label(type_id: int) -> str:
    """Gold label of a synthetic type."""
    return f"w{type_id:02d}"


def triphone_label(type_id: int) -> str:
    """Triphone of a synthetic type; all types share their outer phones."""
    return f"k-a{type_id}-t"


def _rotation(dim: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
    if dim == 1:
        return np.ones((1, 1))
    return np.asarray(ortho_group.rvs(dim, random_state=rng), dtype=np.float64)


def _token_frames(
    prototype: CubicSpline,
    n_frames: int,
    warp: bool,
    rng: np.random.Generator,
) -> npt.NDArray[np.float64]:
    if warp and n_frames > 1:
        increments = rng.uniform(0.5, 1.5, size=n_frames - 1)
        times = np.concatenate([[0.0], np.cumsum(increments)])
        times /= times[-1]
    else:
        times = np.linspace(0.0, 1.0, n_frames)
    return np.asarray(prototype(times))


def generate_synthetic_corpus(config: SynthConfig) -> SyntheticCorpus:
    """Generate a corpus and its discovered-pair list.

    Gold pairs are all same-type token pairs among training speakers; a
    ``pair_corruption`` fraction of them has its second token replaced by a
    token of another type, as an imperfect term discovery system would.

    Args:
        config (SynthConfig): Generator parameters.

    Returns:
        SyntheticCorpus: The corpus; bit-identical for a fixed config.
    """
    rng = np.random.default_rng(config.seed)
    low, high = config.frames_range

    n_nuisance = config.dim - config.class_dims
    knot_times = np.linspace(0.0, 1.0, config.n_knots)
    prototypes = [
        CubicSpline(knot_times, rng.normal(size=(config.n_knots, config.class_dims)), axis=0)
        for _ in range(config.n_types)
    ]
    base_lengths = rng.integers(low, high + 1, size=config.n_types)
    mixing = _rotation(config.dim, rng)

    train_speakers = [f"s{idx:02d}" for idx in range(config.n_speakers)]
    eval_speakers = [f"e{idx:02d}" for idx in range(config.n_eval_speakers)]
    if config.n_speakers == 1:
        logger.warning(
            "Single training speaker: pairs are same-speaker only, so Triamese/CTriamese "
            "negatives come from one speaker and no cross-speaker supervision exists"
        )

    features: List[FeatureSequence] = []
    speaker_entries: Dict[str, str] = {}
    segments: List[WordSegment] = []
    segments_by_speaker: Dict[str, List[WordSegment]] = {}

    for speaker in train_speakers + eval_speakers:
        scale = rng.uniform(1.0 - config.speaker_distortion, 1.0 + config.speaker_distortion, size=config.dim)
        offset = config.speaker_distortion * rng.normal(size=config.dim)
        # leaked energy is speaker_distortion**2 times the class energy
        leakage = rng.normal(size=(config.class_dims, n_nuisance))
        leakage *= config.speaker_distortion / np.sqrt(max(n_nuisance, 1))

        tokens: List[Tuple[int, npt.NDArray[np.float64]]] = []
        for type_id in range(config.n_types):
            for _ in range(config.words_per_speaker_per_type):
                n_frames = int(rng.integers(low, high + 1)) if config.time_warp else int(base_lengths[type_id])
                clean = _token_frames(prototypes[type_id], n_frames, config.time_warp, rng)
                channel = config.nuisance_sigma * rng.normal(size=n_nuisance)
                latent = np.concatenate([clean, clean @ leakage + channel], axis=1)
                noise = config.noise_sigma * rng.normal(size=latent.shape)
                tokens.append((type_id, (latent @ mixing) * scale + offset + noise))

        order = rng.permutation(len(tokens))
        speaker_segments: List[WordSegment] = []
        for utt_idx, start in enumerate(range(0, len(order), config.words_per_utterance)):
            utterance_id = f"{speaker}_u{utt_idx:03d}"
            chunks = []
            cursor = 0
            for token_idx in order[start : start + config.words_per_utterance]:
                type_id, frames = tokens[int(token_idx)]
                chunks.append(frames)
                speaker_segments.append(
                    WordSegment(utterance_id, cursor, cursor + frames.shape[0], speaker, type_id)
                )
                cursor += frames.shape[0]
            features.append(FeatureSequence(utterance_id, np.concatenate(chunks).astype(np.float32)))
            speaker_entries[utterance_id] = speaker
        segments.extend(speaker_segments)
        segments_by_speaker[speaker] = speaker_segments

    train_tokens = [seg for spk in train_speakers for seg in segments_by_speaker[spk]]
    pairs = _gold_pairs(train_tokens, config, rng)

    eval_source = eval_speakers or train_speakers
    eval_tokens = [seg for spk in eval_source for seg in segments_by_speaker[spk]]
    eval_words = [LabeledWord(seg, word_label(seg.cluster_id)) for seg in eval_tokens]
    abx_items = [AbxItem(seg, triphone_label(seg.cluster_id), seg.speaker_id) for seg in eval_tokens]

    corpus = SyntheticCorpus(
        features,
        SpeakerMap(speaker_entries),
        segments,
        pairs,
        eval_words,
        abx_items,
        train_speakers,
        eval_speakers,
    )
    logger.info(
        "Generated %d utterances, %d tokens, %d pairs (%d mismatched)",
        len(features),
        len(segments),
        len(pairs),
        corpus.mismatched_pairs(),
    )
    return corpus


def _gold_pairs(
    tokens: List[WordSegment], config: SynthConfig, rng: np.random.Generator
) -> List[DiscoveredPair]:
    by_type: Dict[int, List[WordSegment]] = {}
    for seg in tokens:
        by_type.setdefault(seg.cluster_id, []).append(seg)

    pairs = [
        DiscoveredPair(first, second)
        for type_id in sorted(by_type)
        for first, second in itertools.combinations(by_type[type_id], 2)
    ]
    if config.max_pairs is not None and len(pairs) > config.max_pairs:
        keep = np.sort(rng.choice(len(pairs), size=config.max_pairs, replace=False))
        pairs = [pairs[int(idx)] for idx in keep]

    n_corrupt = int(round(config.pair_corruption * len(pairs)))
    if n_corrupt == 0:
        return pairs
    for idx in np.sort(rng.choice(len(pairs), size=n_corrupt, replace=False)):
        first = pairs[int(idx)].first
        others = [seg for seg in tokens if seg.cluster_id != first.cluster_id]
        wrong = others[int(rng.integers(len(others)))]
        relabelled = WordSegment(
            wrong.utterance_id, wrong.start_frame, wrong.end_frame, wrong.speaker_id, first.cluster_id
        )
        pairs[int(idx)] = DiscoveredPair(first, relabelled)
    return pairs


def write_corpus(corpus: SyntheticCorpus, out_dir: Path) -> Dict[str, Path]:
    """Write archive, speaker map, pair list, word list and ABX list.

    Args:
        corpus (SyntheticCorpus): Generated corpus.
        out_dir (Path): Output directory, created if missing.

    Returns:
        Dict[str, Path]: Written files by role.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "archive": out_dir / "features.zrf",
        "speakers": out_dir / "speakers.tsv",
        "pairs": out_dir / "pairs.tsv",
        "words": out_dir / "words.tsv",
        "abx": out_dir / "abx.tsv",
    }
    write_archive(corpus.features, paths["archive"])
    corpus.speakers.save(paths["speakers"])
    save_pair_list(corpus.pairs, paths["pairs"])
    save_word_list(corpus.eval_words, paths["words"])
    save_abx_list(corpus.abx_items, paths["abx"], corpus.gold_labels())
    return paths
