"""Dynamic time warping over frame sequences."""

from dataclasses import dataclass
from typing import Any
from typing import List
from typing import Tuple
from typing import Union

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist

from unsup_speech_features.config import METRICS
from unsup_speech_features.config import ZERO_NORM_EPS
from unsup_speech_features.exceptions import DataError
from unsup_speech_features.features.sequence import FeatureSequence


Frames = Union[FeatureSequence, npt.NDArray[np.floating[Any]]]
Step = Tuple[int, int]


@dataclass(frozen=True)
class AlignmentPath:
    """A monotonic warping path and its accumulated local cost."""

    steps: Tuple[Step, ...]
    cost: float

    def __len__(self) -> int:
        """Path length L."""
        return len(self.steps)

    def partners_of(self, i: int) -> List[int]:
        """Indices in the second sequence aligned to frame ``i`` of the first."""
        return [b for a, b in self.steps if a == i]

    def first_partner_of(self, i: int) -> int:
        """First path step touching frame ``i`` of the first sequence."""
        for a, b in self.steps:
            if a == i:
                return b
        raise IndexError(f"frame {i} is not on the path")


def _as_matrix(frames: Frames) -> npt.NDArray[np.float64]:
    array = frames.frames if isinstance(frames, FeatureSequence) else frames
    matrix = np.asarray(array, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise DataError(f"expected a non-empty (T, D) matrix, got shape {matrix.shape}")
    return matrix


def local_distances(
    a: Frames, b: Frames, metric: str = "cosine"
) -> npt.NDArray[np.float64]:
    """Pairwise frame distances between two sequences.

    Cosine distance is defined as 0 when either frame has norm below 1e-12.

    Args:
        a (Frames): First sequence, (T_a, D).
        b (Frames): Second sequence, (T_b, D).
        metric (str): ``cosine`` or ``euclidean``.

    Returns:
        npt.NDArray[np.float64]: Matrix of shape (T_a, T_b).

    Raises:
        DataError: The sequences differ in dimensionality.
        ValueError: Unknown metric.
    """
    left = _as_matrix(a)
    right = _as_matrix(b)
    if left.shape[1] != right.shape[1]:
        raise DataError(f"dimension mismatch: {left.shape[1]} vs {right.shape[1]}")
    if metric == "euclidean":
        return np.asarray(cdist(left, right, metric="euclidean"))
    if metric != "cosine":
        raise ValueError(f"Unknown metric {metric!r}; expected one of {METRICS}")

    norm_left = np.linalg.norm(left, axis=1)
    norm_right = np.linalg.norm(right, axis=1)
    valid = (norm_left[:, None] >= ZERO_NORM_EPS) & (norm_right[None, :] >= ZERO_NORM_EPS)
    denominator = np.where(valid, norm_left[:, None] * norm_right[None, :], 1.0)
    distances = 1.0 - (left @ right.T) / denominator
    return np.where(valid, np.maximum(distances, 0.0), 0.0)


def dtw_align(a: Frames, b: Frames, metric: str = "cosine") -> AlignmentPath:
    """Minimum-cost alignment under the steps (1,0), (0,1) and (1,1).

    No band constraint is applied. When backtracking, ties prefer the
    diagonal predecessor, then the vertical one (i - 1), then the
    horizontal one (j - 1).

    Args:
        a (Frames): First sequence.
        b (Frames): Second sequence.
        metric (str): ``cosine`` or ``euclidean`` local distance.

    Returns:
        AlignmentPath: Path from (0, 0) to (T_a - 1, T_b - 1).
    """
    local = local_distances(a, b, metric).tolist()
    n_rows = len(local)
    n_cols = len(local[0])

    acc: List[List[float]] = [[0.0] * n_cols for _ in range(n_rows)]
    for i in range(n_rows):
        row = local[i]
        acc_row = acc[i]
        if i == 0:
            running = 0.0
            for j in range(n_cols):
                running += row[j]
                acc_row[j] = running
            continue
        above = acc[i - 1]
        acc_row[0] = above[0] + row[0]
        for j in range(1, n_cols):
            best = above[j - 1]
            if above[j] < best:
                best = above[j]
            if acc_row[j - 1] < best:
                best = acc_row[j - 1]
            acc_row[j] = best + row[j]

    steps: List[Step] = [(n_rows - 1, n_cols - 1)]
    i, j = n_rows - 1, n_cols - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diagonal = acc[i - 1][j - 1]
            vertical = acc[i - 1][j]
            horizontal = acc[i][j - 1]
            if diagonal <= vertical and diagonal <= horizontal:
                i, j = i - 1, j - 1
            elif vertical <= horizontal:
                i -= 1
            else:
                j -= 1
        steps.append((i, j))
    steps.reverse()
    return AlignmentPath(tuple(steps), acc[n_rows - 1][n_cols - 1])


def dtw_distance(a: Frames, b: Frames, metric: str = "cosine") -> float:
    """Alignment cost divided by path length."""
    path = dtw_align(a, b, metric)
    return path.cost / len(path)
