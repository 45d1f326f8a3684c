"""Adadelta and decaying-rate SGD over lists of parameter arrays."""

import abc
import logging
from typing import Any
from typing import Dict
from typing import List
from typing import Sequence

import numpy as np

from unsup_speech_features.config import ADADELTA_EPS
from unsup_speech_features.config import ADADELTA_LR
from unsup_speech_features.config import ADADELTA_RHO
from unsup_speech_features.config import SGD_DECAY
from unsup_speech_features.config import SGD_LR
from unsup_speech_features.neuralnet.network import Array


logger = logging.getLogger(__name__)


def _check_pairs(params: Sequence[Array], grads: Sequence[Array]) -> None:
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} parameter arrays but {len(grads)} gradients")
    for param, grad in zip(params, grads):
        if param.shape != grad.shape:
            raise ValueError(f"gradient shape {grad.shape} != parameter shape {param.shape}")


class Optimizer(abc.ABC):
    """Updates parameter arrays in place."""

    kind: str = ""
    learning_rate: float

    @abc.abstractmethod
    def step(self, params: Sequence[Array], grads: Sequence[Array]) -> None:
        """Apply one update to ``params`` given ``grads``."""

    @abc.abstractmethod
    def hyperparameters(self) -> Dict[str, Any]:
        """Scalar settings and counters, JSON-friendly."""

    @abc.abstractmethod
    def state_arrays(self) -> List[Array]:
        """Array-valued state in a fixed order (may be empty)."""

    @abc.abstractmethod
    def load_state(self, scalars: Dict[str, Any], arrays: Sequence[Array]) -> None:
        """Restore state saved with :meth:`hyperparameters` and :meth:`state_arrays`."""


class Adadelta(Optimizer):
    """Adadelta with a global learning-rate multiplier.

    E[g^2] <- rho E[g^2] + (1 - rho) g^2
    dx = -lr * sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
    E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
    """

    kind = "adadelta"

    def __init__(
        self,
        params: Sequence[Array],
        learning_rate: float = ADADELTA_LR,
        rho: float = ADADELTA_RHO,
        epsilon: float = ADADELTA_EPS,
    ) -> None:
        """Allocate zeroed accumulators shaped like ``params``."""
        self.learning_rate = learning_rate
        self.rho = rho
        self.epsilon = epsilon
        self.accumulated_grads: List[Array] = [np.zeros_like(p) for p in params]
        self.accumulated_updates: List[Array] = [np.zeros_like(p) for p in params]

    def step(self, params: Sequence[Array], grads: Sequence[Array]) -> None:
        """Apply one Adadelta update in place."""
        _check_pairs(params, grads)
        rho = self.rho
        for param, grad, acc_grad, acc_update in zip(
            params, grads, self.accumulated_grads, self.accumulated_updates
        ):
            acc_grad *= rho
            acc_grad += (1.0 - rho) * grad * grad
            update = -self.learning_rate * np.sqrt(acc_update + self.epsilon) / np.sqrt(acc_grad + self.epsilon) * grad
            acc_update *= rho
            acc_update += (1.0 - rho) * update * update
            param += update.astype(param.dtype)

    def hyperparameters(self) -> Dict[str, Any]:
        """Learning rate, rho and epsilon."""
        return {
            "learning_rate": self.learning_rate,
            "rho": self.rho,
            "epsilon": self.epsilon,
        }

    def state_arrays(self) -> List[Array]:
        """Both accumulators, gradient ones first."""
        return self.accumulated_grads + self.accumulated_updates

    def load_state(self, scalars: Dict[str, Any], arrays: Sequence[Array]) -> None:
        """Restore hyperparameters and accumulators."""
        half = len(self.accumulated_grads)
        if len(arrays) != 2 * half:
            raise ValueError(f"expected {2 * half} accumulator arrays, got {len(arrays)}")
        self.learning_rate = float(scalars["learning_rate"])
        self.rho = float(scalars["rho"])
        self.epsilon = float(scalars["epsilon"])
        self.accumulated_grads = [np.array(a) for a in arrays[:half]]
        self.accumulated_updates = [np.array(a) for a in arrays[half:]]


class Sgd(Optimizer):
    """Plain SGD with inverse per-step decay lr_t = lr0 / (1 + decay * t)."""

    kind = "sgd"

    def __init__(
        self,
        params: Sequence[Array],
        learning_rate: float = SGD_LR,
        decay: float = SGD_DECAY,
    ) -> None:
        """Start at step 0; ``params`` is unused but kept for a uniform signature."""
        self.learning_rate = learning_rate
        self.decay = decay
        self.iterations = 0

    def current_rate(self) -> float:
        """Learning rate for the next step."""
        return self.learning_rate / (1.0 + self.decay * self.iterations)

    def step(self, params: Sequence[Array], grads: Sequence[Array]) -> None:
        """Apply one SGD update in place and advance the step counter."""
        _check_pairs(params, grads)
        rate = self.current_rate()
        for param, grad in zip(params, grads):
            param -= (rate * grad).astype(param.dtype)
        self.iterations += 1

    def hyperparameters(self) -> Dict[str, Any]:
        """Initial rate, decay and the step counter."""
        return {
            "learning_rate": self.learning_rate,
            "decay": self.decay,
            "iterations": self.iterations,
        }

    def state_arrays(self) -> List[Array]:
        """SGD keeps no array state."""
        return []

    def load_state(self, scalars: Dict[str, Any], arrays: Sequence[Array]) -> None:
        """Restore the rate, decay and step counter."""
        self.learning_rate = float(scalars["learning_rate"])
        self.decay = float(scalars["decay"])
        self.iterations = int(scalars["iterations"])


def make_optimizer(kind: str, params: Sequence[Array]) -> Optimizer:
    """Build an optimizer by name with its default settings."""
    if kind == Adadelta.kind:
        return Adadelta(params)
    if kind == Sgd.kind:
        return Sgd(params)
    raise ValueError(f"Unknown optimizer {kind!r}")
