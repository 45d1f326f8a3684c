"""Reconstruction and triplet losses with exact batch gradients.

Batch objectives return the mean loss over the items in a batch, gradients
aligned with ``model.parameter_arrays()`` and a kink signature (ReLU states
plus hinge activity) used by the gradient checker.
"""

from dataclasses import dataclass
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import numpy.typing as npt

from unsup_speech_features.config import ZERO_NORM_EPS
from unsup_speech_features.exceptions import DataError
from unsup_speech_features.models.architectures import CaeModel
from unsup_speech_features.models.architectures import CTriameseModel
from unsup_speech_features.models.architectures import Model
from unsup_speech_features.models.architectures import TriameseModel
from unsup_speech_features.neuralnet.network import Array
from unsup_speech_features.neuralnet.network import backward
from unsup_speech_features.neuralnet.network import forward
from unsup_speech_features.neuralnet.network import relu_pattern
from unsup_speech_features.pairing.dataset import TrainingSet
from unsup_speech_features.pairing.frames import FrameQuadruplet


Rows = Optional[npt.NDArray[np.int64]]


@dataclass
class LossResult:
    """Mean batch loss, its gradients and the kink signature."""

    loss: float
    gradients: List[Array]
    signature: bytes


def _cosine_rows(u: Array, v: Array) -> Tuple[Array, Array, Array]:
    """Row-wise cosine distance and its gradients w.r.t. both rows."""
    norm_u = np.linalg.norm(u, axis=1)
    norm_v = np.linalg.norm(v, axis=1)
    valid = (norm_u >= ZERO_NORM_EPS) & (norm_v >= ZERO_NORM_EPS)
    safe_u = np.where(valid, norm_u, 1.0)[:, None]
    safe_v = np.where(valid, norm_v, 1.0)[:, None]
    cos = np.where(valid, np.sum(u * v, axis=1) / (safe_u[:, 0] * safe_v[:, 0]), 1.0)
    grad_u = -(v / (safe_u * safe_v) - cos[:, None] * u / safe_u**2)
    grad_v = -(u / (safe_u * safe_v) - cos[:, None] * v / safe_v**2)
    mask = valid[:, None]
    return 1.0 - cos, np.where(mask, grad_u, 0.0), np.where(mask, grad_v, 0.0)


def cosine_distance(u: npt.ArrayLike, v: npt.ArrayLike) -> float:
    """1 - cos(u, v); 0 when either vector has (near) zero norm."""
    left = np.asarray(u, dtype=np.float64).reshape(1, -1)
    right = np.asarray(v, dtype=np.float64).reshape(1, -1)
    return float(_cosine_rows(left, right)[0][0])


def _triplet_rows(
    e_a: Array, e_b: Array, e_neg: Array, margin: float
) -> Tuple[Array, npt.NDArray[np.bool_], Array, Array, Array]:
    """Per-row hinge losses, activity and gradients w.r.t. the three embeddings."""
    d_pos, grad_a_pos, grad_b = _cosine_rows(e_a, e_b)
    d_neg, grad_a_neg, grad_n = _cosine_rows(e_a, e_neg)
    raw = margin + d_pos - d_neg
    active = raw > 0
    weight = active.astype(e_a.dtype)[:, None]
    return (
        np.where(active, raw, 0.0),
        active,
        weight * (grad_a_pos - grad_a_neg),
        weight * grad_b,
        -weight * grad_n,
    )


def triplet_loss(e_a: npt.ArrayLike, e_b: npt.ArrayLike, e_neg: npt.ArrayLike, margin: float) -> float:
    """max(0, m + d_cos(e_a, e_b) - d_cos(e_a, e_neg))."""
    return max(0.0, margin + cosine_distance(e_a, e_b) - cosine_distance(e_a, e_neg))


def _rows_for(model: CaeModel, speaker: Optional[str]) -> Rows:
    if model.speaker_table is None:
        return None
    if speaker is None:
        raise DataError("speaker-conditioned CAE needs an output speaker")
    return model.speaker_table.lookup([speaker])


def cae_loss(
    model: CaeModel, x_a: npt.ArrayLike, x_b: npt.ArrayLike, out_speaker: Optional[str] = None
) -> float:
    """||x-hat - x_b||^2 where x-hat reconstructs from x_a.

    Args:
        model (CaeModel): The autoencoder.
        x_a (npt.ArrayLike): Input frame.
        x_b (npt.ArrayLike): Target frame.
        out_speaker (Optional[str]): Speaker of ``x_b``; required when the
            model is speaker-conditioned, ignored otherwise.

    Returns:
        float: Squared reconstruction error.

    Raises:
        DataError: Missing or unknown speaker on a conditioned model.
    """
    dtype = model.encoder.weights[0].dtype
    source = np.asarray(x_a, dtype=dtype).reshape(1, -1)
    target = np.asarray(x_b, dtype=dtype).reshape(1, -1)
    output = model.reconstruct(source, _rows_for(model, out_speaker))
    return float(np.sum((output - target) ** 2))


def ctriamese_loss(model: CTriameseModel, quad: FrameQuadruplet) -> float:
    """Three CAE reconstructions plus the triplet loss on their bottlenecks.

    Branches map x_a to x_b, x_b to x_a and x'_a to x'_b; the output speakers
    are the speakers of those targets.
    """
    cae = model.cae
    pair = quad.pair
    total = cae_loss(cae, pair.x_a, pair.x_b, pair.speaker_b if cae.conditioned else None)
    total += cae_loss(cae, pair.x_b, pair.x_a, pair.speaker_a if cae.conditioned else None)
    total += cae_loss(cae, quad.x_neg, quad.x_neg_b, quad.neg_b_speaker if cae.conditioned else None)
    dtype = cae.encoder.weights[0].dtype
    e_a, e_b, e_neg = (
        cae.embed(np.asarray(x, dtype=dtype).reshape(1, -1))[0] for x in (pair.x_a, pair.x_b, quad.x_neg)
    )
    return total + triplet_loss(e_a, e_b, e_neg, model.margin)


@dataclass
class _CaePass:
    encoder_activations: List[Array]
    decoder_activations: List[Array]
    speaker_rows: Rows

    @property
    def embeddings(self) -> Array:
        return self.encoder_activations[-1]

    @property
    def output(self) -> Array:
        return self.decoder_activations[-1]


def _cae_forward(model: CaeModel, inputs: Array, speaker_rows: Rows) -> _CaePass:
    encoder_activations = forward(model.encoder, model.encoder_spec, inputs)
    decoder_in = model.decoder_input(encoder_activations[-1], speaker_rows)
    decoder_activations = forward(model.decoder, model.decoder_spec, decoder_in)
    return _CaePass(encoder_activations, decoder_activations, speaker_rows)


def _cae_backward(
    model: CaeModel, trace: _CaePass, output_gradient: Array, embedding_gradient: Optional[Array] = None
) -> List[Array]:
    decoder_grads, decoder_in_grad = backward(
        model.decoder, model.decoder_spec, trace.decoder_activations, output_gradient
    )
    bottleneck = model.embedding_dim
    grad_embeddings = decoder_in_grad[:, :bottleneck]
    if embedding_gradient is not None:
        grad_embeddings = grad_embeddings + embedding_gradient
    encoder_grads, _ = backward(model.encoder, model.encoder_spec, trace.encoder_activations, grad_embeddings)
    gradients = encoder_grads.arrays() + decoder_grads.arrays()
    if model.speaker_table is not None:
        table_grad = np.zeros_like(model.speaker_table.vectors)
        np.add.at(table_grad, trace.speaker_rows, decoder_in_grad[:, bottleneck:])
        gradients.append(table_grad)
    return gradients


def _cae_signature(model: CaeModel, trace: _CaePass) -> List[npt.NDArray[np.bool_]]:
    return [
        relu_pattern(model.encoder_spec, trace.encoder_activations),
        relu_pattern(model.decoder_spec, trace.decoder_activations),
    ]


def _pack(patterns: Sequence[npt.NDArray[np.bool_]]) -> bytes:
    return np.packbits(np.concatenate([p.ravel() for p in patterns])).tobytes()


def cae_batch(model: CaeModel, x_in: Array, x_out: Array, speaker_rows: Rows = None) -> LossResult:
    """Mean reconstruction loss of ``x_out`` from ``x_in`` over a batch.

    Args:
        model (CaeModel): The autoencoder.
        x_in (Array): Inputs, (B, D).
        x_out (Array): Targets, (B, D).
        speaker_rows (Rows): Speaker-table rows of the targets, when conditioned.

    Returns:
        LossResult: Loss, gradients and kink signature.
    """
    if x_in.shape != x_out.shape or x_in.shape[0] == 0:
        raise ValueError(f"input {x_in.shape} and target {x_out.shape} must be equal, non-empty batches")
    n_items = x_in.shape[0]
    trace = _cae_forward(model, x_in, speaker_rows)
    residual = trace.output - x_out
    loss = float(np.sum(residual**2)) / n_items
    gradients = _cae_backward(model, trace, 2.0 * residual / n_items)
    return LossResult(loss, gradients, _pack(_cae_signature(model, trace)))


def triamese_batch(model: TriameseModel, x_a: Array, x_b: Array, x_neg: Array) -> LossResult:
    """Mean triplet loss with the three branches run as one stacked batch."""
    n_items = x_a.shape[0]
    if n_items == 0:
        raise ValueError("empty batch")
    activations = forward(model.branch, model.branch_spec, np.concatenate([x_a, x_b, x_neg]))
    e_a, e_b, e_neg = np.split(activations[-1], 3)
    losses, active, grad_a, grad_b, grad_neg = _triplet_rows(e_a, e_b, e_neg, model.margin)
    output_gradient = np.concatenate([grad_a, grad_b, grad_neg]) / n_items
    grads, _ = backward(model.branch, model.branch_spec, activations, output_gradient.astype(e_a.dtype))
    signature = _pack([relu_pattern(model.branch_spec, activations), active])
    return LossResult(float(np.sum(losses)) / n_items, grads.arrays(), signature)


def ctriamese_batch(
    model: CTriameseModel,
    x_a: Array,
    x_b: Array,
    x_neg: Array,
    x_neg_b: Array,
    speaker_rows: Optional[Tuple[npt.NDArray[np.int64], npt.NDArray[np.int64], npt.NDArray[np.int64]]] = None,
) -> LossResult:
    """Mean CTriamese loss over a batch of quadruplets.

    Args:
        model (CTriameseModel): The network.
        x_a (Array): Anchor frames.
        x_b (Array): Frames aligned to the anchors.
        x_neg (Array): Negative frames.
        x_neg_b (Array): Frames aligned to the negatives.
        speaker_rows: Speaker-table rows of ``x_a``, ``x_b`` and ``x_neg_b``;
            required when the CAE is speaker-conditioned.

    Returns:
        LossResult: Loss, gradients and kink signature.
    """
    n_items = x_a.shape[0]
    if n_items == 0:
        raise ValueError("empty batch")
    cae = model.cae
    rows: Rows = None
    if cae.conditioned:
        if speaker_rows is None:
            raise DataError("speaker-conditioned CTriamese needs speaker rows")
        rows_a, rows_b, rows_neg_b = speaker_rows
        rows = np.concatenate([rows_b, rows_a, rows_neg_b])
    inputs = np.concatenate([x_a, x_b, x_neg])
    targets = np.concatenate([x_b, x_a, x_neg_b])
    trace = _cae_forward(cae, inputs, rows)
    residual = trace.output - targets
    e_a, e_b, e_neg = np.split(trace.embeddings, 3)
    losses, active, grad_a, grad_b, grad_neg = _triplet_rows(e_a, e_b, e_neg, model.margin)
    loss = (float(np.sum(residual**2)) + float(np.sum(losses))) / n_items
    embedding_gradient = (np.concatenate([grad_a, grad_b, grad_neg]) / n_items).astype(e_a.dtype)
    gradients = _cae_backward(cae, trace, 2.0 * residual / n_items, embedding_gradient)
    signature = _pack(_cae_signature(cae, trace) + [active])
    return LossResult(loss, gradients, signature)


def batch_objective(model: Model, batch: TrainingSet) -> LossResult:
    """Dispatch a training batch to the objective of ``model``.

    Raises:
        DataError: The batch holds the wrong item kind.
    """
    if batch.kind is not model.kind.item_kind:
        raise DataError(f"{model.kind.value} trains on {model.kind.item_kind.value}, got {batch.kind.value}")
    dtype = model.parameter_arrays()[0].dtype
    x_a = batch.x_a.astype(dtype)
    x_b = batch.x_b.astype(dtype)
    if isinstance(model, CaeModel):
        # Pairs are already directed, so each item is one reconstruction
        return cae_batch(model, x_a, x_b, batch.speaker_b if model.conditioned else None)
    assert batch.x_neg is not None
    x_neg = batch.x_neg.astype(dtype)
    if isinstance(model, TriameseModel):
        return triamese_batch(model, x_a, x_b, x_neg)
    assert batch.x_neg_b is not None and batch.speaker_neg_b is not None
    rows = (batch.speaker_a, batch.speaker_b, batch.speaker_neg_b) if model.cae.conditioned else None
    return ctriamese_batch(model, x_a, x_b, x_neg, batch.x_neg_b.astype(dtype), rows)


class BatchObjective:
    """Gradient-checker adapter binding a float64 model to a fixed batch."""

    def __init__(self, model: Model, batch: TrainingSet) -> None:
        """Keep references; the checker perturbs the model's arrays in place."""
        self.model = model
        self.batch = batch

    def parameters(self) -> List[Array]:
        """The model's parameter arrays."""
        return self.model.parameter_arrays()

    def loss(self) -> Tuple[float, bytes]:
        """Batch loss and kink signature."""
        result = batch_objective(self.model, self.batch)
        return result.loss, result.signature

    def loss_and_gradients(self) -> Tuple[float, List[Array]]:
        """Batch loss and analytic gradients."""
        result = batch_objective(self.model, self.batch)
        return result.loss, result.gradients
