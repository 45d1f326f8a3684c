"""Central finite-difference checks of analytic gradients."""

import logging
from dataclasses import dataclass
from typing import List
from typing import Protocol
from typing import Tuple

import numpy as np

from unsup_speech_features.config import GRADCHECK_EPSILON
from unsup_speech_features.config import GRADCHECK_TOLERANCE
from unsup_speech_features.neuralnet.network import Array


logger = logging.getLogger(__name__)

# Below this magnitude a gradient entry is compared in absolute terms
_SCALE_FLOOR = 1e-3


class Objective(Protocol):
    """A scalar loss over a list of mutable float64 parameter arrays."""

    def parameters(self) -> List[Array]:
        """Arrays perturbed in place by the checker."""

    def loss(self) -> Tuple[float, bytes]:
        """Loss value and a signature of every kink the loss passes through."""

    def loss_and_gradients(self) -> Tuple[float, List[Array]]:
        """Loss value and analytic gradients aligned with :meth:`parameters`."""


@dataclass(frozen=True)
class GradientCheckResult:
    """Outcome of one gradient check."""

    max_relative_error: float
    n_checked: int
    n_skipped: int
    tolerance: float

    @property
    def passed(self) -> bool:
        """Whether the worst error is within tolerance."""
        return self.max_relative_error < self.tolerance


def relative_error(analytic: float, numeric: float) -> float:
    """|a - n| scaled by max(|a|, |n|), floored at 1e-3."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), _SCALE_FLOOR)


def gradient_check(
    objective: Objective,
    epsilon: float = GRADCHECK_EPSILON,
    tolerance: float = GRADCHECK_TOLERANCE,
) -> GradientCheckResult:
    """Compare analytic gradients with central differences.

    Coordinates whose +/- epsilon perturbation changes the kink signature
    (a ReLU switching state or the hinge switching on or off) are skipped,
    since the loss is not differentiable across them.

    Args:
        objective (Objective): Loss over float64 parameters.
        epsilon (float): Finite-difference step.
        tolerance (float): Pass threshold for the worst relative error.

    Returns:
        GradientCheckResult: Worst error and coordinate counts.
    """
    _, analytic = objective.loss_and_gradients()
    _, base_signature = objective.loss()

    worst = 0.0
    checked = 0
    skipped = 0
    for param, grad in zip(objective.parameters(), analytic):
        if param.dtype != np.float64:
            raise ValueError("gradient checks need float64 parameters")
        flat = param.reshape(-1)
        flat_grad = grad.reshape(-1)
        for idx in range(flat.shape[0]):
            original = flat[idx]
            flat[idx] = original + epsilon
            plus, plus_signature = objective.loss()
            flat[idx] = original - epsilon
            minus, minus_signature = objective.loss()
            flat[idx] = original
            if plus_signature != base_signature or minus_signature != base_signature:
                skipped += 1
                continue
            numeric = (plus - minus) / (2.0 * epsilon)
            worst = max(worst, relative_error(float(flat_grad[idx]), numeric))
            checked += 1

    result = GradientCheckResult(worst, checked, skipped, tolerance)
    logger.debug(
        "Gradient check: max relative error %.3e over %d coordinates (%d skipped at kinks)",
        worst,
        checked,
        skipped,
    )
    return result
