"""
The four Forget-MI losses and their weighted total.

Forget losses push the unlearned model's embeddings of clean forget samples
away from the original model's embeddings of their noisy counterparts;
retain losses pull both models together on retain samples. The original
model is frozen, so gradients reach only the unlearned model.
"""
from typing import Sequence, Tuple, Union

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.config import LossWeights
from src.data.samples import Batch
from src.errors import ContractError, InvalidInputError
from src.model.network import EmbeddingBundle, Model, require_same_architecture

LossTuple = Tuple[float, float, float, float]


def _check_pair(ul: EmbeddingBundle, og: EmbeddingBundle):
    if ul.img_emb.shape[0] != og.img_emb.shape[0]:
        raise ContractError(
            f"batch sizes differ: {ul.img_emb.shape[0]} (unlearned) vs {og.img_emb.shape[0]} (original)"
        )


def mean_distance(a: Tensor, b: Tensor) -> Tensor:
    return ops.mean(ops.euclidean_distance(a, b))


def unimodal_forget_loss(ul: EmbeddingBundle, og_noisy: EmbeddingBundle) -> Tensor:
    _check_pair(ul, og_noisy)
    return ops.scale(mean_distance(ul.unimodal(), og_noisy.unimodal()), -1.0)


def multimodal_forget_loss(ul: EmbeddingBundle, og_noisy: EmbeddingBundle) -> Tensor:
    _check_pair(ul, og_noisy)
    return ops.scale(mean_distance(ul.joint_emb, og_noisy.joint_emb), -1.0)


def unimodal_retain_loss(ul: EmbeddingBundle, og: EmbeddingBundle) -> Tensor:
    _check_pair(ul, og)
    return mean_distance(ul.unimodal(), og.unimodal())


def multimodal_retain_loss(ul: EmbeddingBundle, og: EmbeddingBundle) -> Tensor:
    _check_pair(ul, og)
    return mean_distance(ul.joint_emb, og.joint_emb)


def _paired(ul: Model, og: Model, batch: Batch, other: Batch) -> Tuple[EmbeddingBundle, EmbeddingBundle]:
    require_same_architecture(ul, og, "unlearned/original")
    if len(batch) != len(other):
        raise ContractError(f"batch sizes differ: {len(batch)} vs {len(other)}")
    return ul.forward(batch), og.forward(other)


def loss_uu(ul: Model, og: Model, forget_batch: Batch, noisy_batch: Batch) -> Tensor:
    """-mean |[ul(I_f), ul(T_f)] - [og(noisy I_f), og(noisy T_f)]| over 64-d concatenations."""
    return unimodal_forget_loss(*_paired(ul, og, forget_batch, noisy_batch))


def loss_mu(ul: Model, og: Model, forget_batch: Batch, noisy_batch: Batch) -> Tensor:
    """-mean |ul(I_f, T_f) - og(noisy I_f, noisy T_f)| over joint embeddings."""
    return multimodal_forget_loss(*_paired(ul, og, forget_batch, noisy_batch))


def loss_ur(ul: Model, og: Model, retain_batch: Batch) -> Tensor:
    """+mean unimodal-concatenation distance on clean retain samples."""
    return unimodal_retain_loss(*_paired(ul, og, retain_batch, retain_batch))


def loss_mr(ul: Model, og: Model, retain_batch: Batch) -> Tensor:
    """+mean joint-embedding distance on clean retain samples."""
    return multimodal_retain_loss(*_paired(ul, og, retain_batch, retain_batch))


def _as_weights(weights: Union[LossWeights, Sequence[float]]) -> LossTuple:
    if isinstance(weights, LossWeights):
        return weights.as_tuple()
    values = tuple(float(w) for w in weights)
    if len(values) != 4 or any(w < 0 for w in values) or abs(sum(values) - 1.0) > 1e-9:
        raise InvalidInputError(f"loss weights must be 4 non-negative values summing to 1, got {values}")
    return values


def total_loss(
    weights: Union[LossWeights, Sequence[float]],
    l_uu: Tensor,
    l_ur: Tensor,
    l_mu: Tensor,
    l_mr: Tensor,
) -> Tensor:
    """
    w_uu*L_UU + w_ur*L_UR + w_mu*L_MU + w_mr*L_MR.

    Raises:
        InvalidInputError: If plain weights do not sum to 1
    """
    w_uu, w_ur, w_mu, w_mr = _as_weights(weights)
    total = ops.add(ops.scale(l_uu, w_uu), ops.scale(l_ur, w_ur))
    total = ops.add(total, ops.scale(l_mu, w_mu))
    return ops.add(total, ops.scale(l_mr, w_mr))
