"""MFCC extraction from 16-bit PCM audio."""

import logging
from dataclasses import asdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any
from typing import Dict
from typing import Tuple

import numpy as np
import numpy.typing as npt
from scipy import fft
from scipy.io import wavfile

from unsup_speech_features.config import HOP_SECONDS
from unsup_speech_features.config import LOG_FLOOR
from unsup_speech_features.config import MIN_SAMPLE_RATE_HZ
from unsup_speech_features.config import N_CEPSTRA
from unsup_speech_features.config import N_MEL_FILTERS
from unsup_speech_features.config import PRE_EMPHASIS
from unsup_speech_features.config import WINDOW_SECONDS
from unsup_speech_features.exceptions import DataError
from unsup_speech_features.features.sequence import FeatureSequence


logger = logging.getLogger(__name__)

Float64Array = npt.NDArray[np.float64]


@dataclass(frozen=True)
class MfccConfig:
    """Fixed MFCC parameterisation."""

    window_seconds: float = WINDOW_SECONDS
    hop_seconds: float = HOP_SECONDS
    pre_emphasis: float = PRE_EMPHASIS
    n_filters: int = N_MEL_FILTERS
    n_cepstra: int = N_CEPSTRA
    log_floor: float = LOG_FLOOR

    def window_samples(self, sample_rate_hz: int) -> int:
        """Analysis window length W in samples."""
        return int(round(self.window_seconds * sample_rate_hz))

    def hop_samples(self, sample_rate_hz: int) -> int:
        """Frame shift H in samples."""
        return int(round(self.hop_seconds * sample_rate_hz))

    def to_dict(self) -> Dict[str, Any]:
        """Plain-dict view."""
        return asdict(self)


def hz_to_mel(hz: npt.ArrayLike) -> Float64Array:
    """HTK mel scale."""
    return np.asarray(2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0))


def mel_to_hz(mel: npt.ArrayLike) -> Float64Array:
    """Inverse of :func:`hz_to_mel`."""
    return np.asarray(700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0))


def fft_size(window_samples: int) -> int:
    """Smallest power of two not below the window length."""
    return 1 << (window_samples - 1).bit_length()


def mel_edge_frequencies(sample_rate_hz: int, n_filters: int = N_MEL_FILTERS) -> Float64Array:
    """The n_filters + 2 equally mel-spaced edges from 0 Hz to Nyquist."""
    mels = np.linspace(0.0, float(hz_to_mel(sample_rate_hz / 2.0)), n_filters + 2)
    return mel_to_hz(mels)


def mel_center_frequencies(sample_rate_hz: int, n_filters: int = N_MEL_FILTERS) -> Float64Array:
    """Center frequency in Hz of each triangular filter."""
    return mel_edge_frequencies(sample_rate_hz, n_filters)[1:-1]


def mel_filterbank(
    sample_rate_hz: int, n_fft: int, n_filters: int = N_MEL_FILTERS
) -> Float64Array:
    """Triangular mel filters over the one-sided spectrum.

    Args:
        sample_rate_hz (int): Sampling rate.
        n_fft (int): FFT length.
        n_filters (int): Number of filters.

    Returns:
        Float64Array: Weights of shape (n_filters, n_fft // 2 + 1).
    """
    edges = mel_edge_frequencies(sample_rate_hz, n_filters)
    bins = np.arange(n_fft // 2 + 1) * sample_rate_hz / n_fft
    left = edges[:-2, None]
    center = edges[1:-1, None]
    right = edges[2:, None]
    rising = (bins[None, :] - left) / (center - left)
    falling = (right - bins[None, :]) / (right - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def _validate_samples(samples: npt.ArrayLike, sample_rate_hz: int, window: int) -> Float64Array:
    signal = np.asarray(samples)
    if signal.ndim != 1:
        raise DataError(f"expected mono audio, got array of shape {signal.shape}")
    if sample_rate_hz < MIN_SAMPLE_RATE_HZ:
        raise DataError(f"sample rate {sample_rate_hz} Hz below {MIN_SAMPLE_RATE_HZ} Hz")
    if signal.dtype == np.int16:
        signal = signal.astype(np.float64) / 32768.0
    else:
        signal = signal.astype(np.float64)
    if not np.all(np.isfinite(signal)):
        raise DataError("non-finite audio samples")
    if signal.shape[0] < window:
        raise DataError(
            f"utterance too short: {signal.shape[0]} samples, window is {window}"
        )
    return signal


def log_mel_energies(
    samples: npt.ArrayLike, sample_rate_hz: int, config: MfccConfig = MfccConfig()
) -> Float64Array:
    """Floored log filterbank energies, one row per frame.

    Args:
        samples (npt.ArrayLike): Mono PCM audio, int16 or float.
        sample_rate_hz (int): Sampling rate.
        config (MfccConfig): Front-end parameters.

    Returns:
        Float64Array: Array of shape (T, n_filters).
    """
    window = config.window_samples(sample_rate_hz)
    hop = config.hop_samples(sample_rate_hz)
    signal = _validate_samples(samples, sample_rate_hz, window)

    emphasized = np.append(signal[0], signal[1:] - config.pre_emphasis * signal[:-1])

    n_frames = (emphasized.shape[0] - window) // hop + 1
    index = np.arange(window)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = emphasized[index] * np.hamming(window)[None, :]

    n_fft = fft_size(window)
    power = np.abs(fft.rfft(frames, n=n_fft, axis=1)) ** 2
    energies = power @ mel_filterbank(sample_rate_hz, n_fft, config.n_filters).T
    return np.log(np.maximum(energies, config.log_floor))


def compute_mfcc(
    samples: npt.ArrayLike,
    sample_rate_hz: int,
    utterance_id: str = "utterance",
    config: MfccConfig = MfccConfig(),
) -> FeatureSequence:
    """Compute c0..c12 cepstra at a 10 ms hop.

    Frame count is floor((N - W) / H) + 1.

    Args:
        samples (npt.ArrayLike): Mono PCM audio, int16 or float.
        sample_rate_hz (int): Sampling rate, at least 8 kHz.
        utterance_id (str): Id stored on the returned sequence.
        config (MfccConfig): Front-end parameters.

    Returns:
        FeatureSequence: A (T, 13) sequence at 100 frames per second.
    """
    log_energies = log_mel_energies(samples, sample_rate_hz, config)
    cepstra = fft.dct(log_energies, type=2, norm="ortho", axis=1)[:, : config.n_cepstra]
    return FeatureSequence(
        utterance_id, cepstra.astype(np.float32), 1.0 / config.hop_seconds
    )


def read_wav(path: Path) -> Tuple[npt.NDArray[np.int16], int]:
    """Read a 16-bit PCM mono WAV file.

    Args:
        path (Path): WAV file.

    Returns:
        Tuple[npt.NDArray[np.int16], int]: Samples and sampling rate.

    Raises:
        DataError: The file is stereo or not 16-bit PCM.
    """
    sample_rate_hz, samples = wavfile.read(path)
    if samples.ndim != 1:
        raise DataError(f"{path}: stereo audio is not supported ({samples.shape[1]} channels)")
    if samples.dtype != np.int16:
        raise DataError(f"{path}: expected 16-bit PCM, got {samples.dtype}")
    logger.debug("Read %s: %d samples at %d Hz", path, samples.shape[0], sample_rate_hz)
    return samples, int(sample_rate_hz)
