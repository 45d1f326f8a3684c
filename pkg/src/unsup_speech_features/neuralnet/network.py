"""Dense feed-forward networks with exact backpropagation."""

from dataclasses import dataclass
from typing import Any
from typing import Dict
from typing import List
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt


Array = npt.NDArray[np.floating[Any]]

RELU = "relu"
LINEAR = "linear"
ACTIVATIONS = (RELU, LINEAR)


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths (input first) and one activation per weight layer."""

    layer_sizes: Tuple[int, ...]
    activations: Tuple[str, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate sizes and activations."""
        if len(self.layer_sizes) < 2:
            raise ValueError("a network needs an input size and at least one layer")
        if any(size < 1 for size in self.layer_sizes):
            raise ValueError(f"layer sizes must be positive: {self.layer_sizes}")
        if len(self.activations) != len(self.layer_sizes) - 1:
            raise ValueError(
                f"{len(self.layer_sizes) - 1} layers but {len(self.activations)} activations"
            )
        unknown = set(self.activations) - set(ACTIVATIONS)
        if unknown:
            raise ValueError(f"unknown activations {sorted(unknown)}")

    @property
    def input_dim(self) -> int:
        """Width of the input."""
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        """Width of the last layer."""
        return self.layer_sizes[-1]

    @property
    def n_layers(self) -> int:
        """Number of weight layers."""
        return len(self.activations)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly view."""
        return {
            "layer_sizes": list(self.layer_sizes),
            "activations": list(self.activations),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "NetworkSpec":
        """Inverse of :meth:`to_dict`."""
        return cls(
            tuple(int(size) for size in values["layer_sizes"]),
            tuple(str(act) for act in values["activations"]),
            int(values["seed"]),
        )


def mlp_spec(
    input_dim: int,
    hidden: Sequence[int],
    output_dim: int,
    output_activation: str,
    seed: int = 0,
) -> NetworkSpec:
    """ReLU hidden layers followed by one output layer."""
    return NetworkSpec(
        (input_dim, *hidden, output_dim),
        tuple([RELU] * len(hidden) + [output_activation]),
        seed,
    )


@dataclass
class Parameters:
    """Per-layer weights (out x in) and biases (out)."""

    weights: List[Array]
    biases: List[Array]

    def arrays(self) -> List[Array]:
        """Weights and biases interleaved in layer order; views, not copies."""
        flat: List[Array] = []
        for weight, bias in zip(self.weights, self.biases):
            flat.extend([weight, bias])
        return flat

    def copy(self) -> "Parameters":
        """Deep copy."""
        return Parameters([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def astype(self, dtype: npt.DTypeLike) -> "Parameters":
        """Copy cast to ``dtype``."""
        return Parameters(
            [w.astype(dtype) for w in self.weights], [b.astype(dtype) for b in self.biases]
        )

    @classmethod
    def zeros_like(cls, other: "Parameters") -> "Parameters":
        """Zero-filled parameters of the same shapes."""
        return cls([np.zeros_like(w) for w in other.weights], [np.zeros_like(b) for b in other.biases])


def init_parameters(spec: NetworkSpec, dtype: npt.DTypeLike = np.float32) -> Parameters:
    """Glorot-uniform weights and zero biases, seeded by ``spec.seed``.

    Args:
        spec (NetworkSpec): Architecture.
        dtype (npt.DTypeLike): Parameter dtype.

    Returns:
        Parameters: Fresh parameters.
    """
    rng = np.random.default_rng(spec.seed)
    weights: List[Array] = []
    biases: List[Array] = []
    for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))
    return Parameters(weights, biases)


def _check_shapes(params: Parameters, spec: NetworkSpec) -> None:
    if len(params.weights) != spec.n_layers or len(params.biases) != spec.n_layers:
        raise ValueError(f"expected {spec.n_layers} layers, got {len(params.weights)}")
    for idx, (weight, bias) in enumerate(zip(params.weights, params.biases)):
        expected = (spec.layer_sizes[idx + 1], spec.layer_sizes[idx])
        if weight.shape != expected or bias.shape != (expected[0],):
            raise ValueError(f"layer {idx}: weight {weight.shape}, bias {bias.shape}, expected {expected}")


def forward(params: Parameters, spec: NetworkSpec, batch: Array) -> List[Array]:
    """Run the network and keep every layer's activation.

    Args:
        params (Parameters): Network parameters.
        spec (NetworkSpec): Architecture.
        batch (Array): Inputs of shape (B, input_dim).

    Returns:
        List[Array]: ``[a0 = batch, a1, ..., aL]``.

    Raises:
        ValueError: Input width or parameter shapes do not match the architecture.
    """
    _check_shapes(params, spec)
    if batch.ndim != 2 or batch.shape[1] != spec.input_dim:
        raise ValueError(f"expected input of width {spec.input_dim}, got shape {batch.shape}")
    activations = [batch]
    for weight, bias, activation in zip(params.weights, params.biases, spec.activations):
        pre = activations[-1] @ weight.T + bias
        activations.append(np.maximum(pre, 0) if activation == RELU else pre)
    return activations


def backward(
    params: Parameters,
    spec: NetworkSpec,
    activations: List[Array],
    output_gradient: Array,
) -> Tuple[Parameters, Array]:
    """Reverse-mode gradients of a scalar loss through the network.

    The ReLU derivative is taken as 0 where the unit's output is 0.

    Args:
        params (Parameters): Parameters used in the forward pass.
        spec (NetworkSpec): Architecture.
        activations (List[Array]): Output of :func:`forward`.
        output_gradient (Array): dLoss/dOutput, shape (B, output_dim).

    Returns:
        Tuple[Parameters, Array]: Parameter gradients and dLoss/dInput.

    Raises:
        ValueError: Shapes do not match.
    """
    _check_shapes(params, spec)
    if len(activations) != spec.n_layers + 1:
        raise ValueError("activations do not come from a matching forward pass")
    if output_gradient.shape != activations[-1].shape:
        raise ValueError(
            f"output gradient shape {output_gradient.shape} != output {activations[-1].shape}"
        )

    grad_weights: List[Array] = [np.empty(0)] * spec.n_layers
    grad_biases: List[Array] = [np.empty(0)] * spec.n_layers
    delta = output_gradient
    for layer in reversed(range(spec.n_layers)):
        if spec.activations[layer] == RELU:
            delta = delta * (activations[layer + 1] > 0)
        grad_weights[layer] = delta.T @ activations[layer]
        grad_biases[layer] = delta.sum(axis=0)
        delta = delta @ params.weights[layer]
    return Parameters(grad_weights, grad_biases), delta


def relu_pattern(spec: NetworkSpec, activations: List[Array]) -> npt.NDArray[np.bool_]:
    """Flattened on/off state of every ReLU unit, for kink detection."""
    masks = [
        (activations[layer + 1] > 0).ravel()
        for layer in range(spec.n_layers)
        if spec.activations[layer] == RELU
    ]
    return np.concatenate(masks) if masks else np.zeros(0, dtype=bool)
