"""
Multimodal classifier: image encoder, text encoder, adaptation-gate fusion and a 4-class head.

The fusion keeps the visual embedding dominant: the text contributes a gated
shift whose norm is bounded by beta times the image embedding's norm.
"""
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor, get_default_dtype
from src.data.samples import IMAGE_SIZE, N_CLASSES, Batch
from src.errors import ContractError, InvalidInputError, ShapeError
from src.model.tokenizer import Tokenizer

HIDDEN_DIM = 64
EMBED_DIM = 32
TOKEN_DIM = 16
DEFAULT_BETA = 0.5
SHIFT_EPS = 1e-6

# Freezing order used by the k-layer baselines
LAYER_GROUPS: Tuple[Tuple[str, Tuple[str, ...]], ...] = (
    ("image_layer1", ("img_w1", "img_b1")),
    ("image_layer2", ("img_w2", "img_b2")),
    ("text_encoder", ("tok_emb", "txt_w", "txt_b")),
    ("fusion_gate", ("gate_w", "gate_b", "shift_w", "shift_b")),
    ("head", ("head_w", "head_b")),
)
PARAM_NAMES: Tuple[str, ...] = tuple(n for _, names in LAYER_GROUPS for n in names)


def param_shapes(vocab_size: int) -> Dict[str, Tuple[int, ...]]:
    return {
        "img_w1": (IMAGE_SIZE, HIDDEN_DIM),
        "img_b1": (HIDDEN_DIM,),
        "img_w2": (HIDDEN_DIM, EMBED_DIM),
        "img_b2": (EMBED_DIM,),
        "tok_emb": (vocab_size, TOKEN_DIM),
        "txt_w": (TOKEN_DIM, EMBED_DIM),
        "txt_b": (EMBED_DIM,),
        "gate_w": (2 * EMBED_DIM, EMBED_DIM),
        "gate_b": (EMBED_DIM,),
        "shift_w": (EMBED_DIM, EMBED_DIM),
        "shift_b": (EMBED_DIM,),
        "head_w": (EMBED_DIM, N_CLASSES),
        "head_b": (N_CLASSES,),
    }


def init_tensor(shape: Tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)) for matrices; zeros for biases."""
    if len(shape) == 1:
        return np.zeros(shape)
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape)


class ModelParams:
    """All learnable tensors of the classifier plus the fusion scale beta."""

    def __init__(self, tensors: Mapping[str, Tensor], beta: float = DEFAULT_BETA):
        missing = [n for n in PARAM_NAMES if n not in tensors]
        if missing:
            raise ContractError(f"missing parameter tensors {missing}")
        self.tensors: Dict[str, Tensor] = OrderedDict((n, tensors[n]) for n in PARAM_NAMES)
        self.beta = float(beta)

    @classmethod
    def init(cls, vocab_size: int, seed: int, beta: float = DEFAULT_BETA) -> "ModelParams":
        if vocab_size < 1:
            raise InvalidInputError(f"vocab_size must be positive, got {vocab_size}")
        rng = np.random.default_rng(seed)
        return cls(
            {name: Tensor(init_tensor(shape, rng), name=name) for name, shape in param_shapes(vocab_size).items()},
            beta=beta,
        )

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self):
        return iter(self.tensors.items())

    @property
    def vocab_size(self) -> int:
        return self.tensors["tok_emb"].shape[0]

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {n: t.shape for n, t in self.tensors.items()}

    def copy(self, track_grad: Union[bool, Sequence[str]] = False) -> "ModelParams":
        """Deep copy; `track_grad` is a flag for all tensors or the names to track."""
        def tracked(name):
            return track_grad if isinstance(track_grad, bool) else name in track_grad

        return ModelParams(
            {n: Tensor(t.data.copy(), track_grad=tracked(n), name=n) for n, t in self.tensors.items()},
            beta=self.beta,
        )

    def trainable(self) -> Dict[str, Tensor]:
        return OrderedDict((n, t) for n, t in self.tensors.items() if t.track_grad)

    def zero_grad(self):
        for t in self.tensors.values():
            t.zero_grad()

    def equals(self, other: "ModelParams") -> bool:
        """Bit-exact comparison of every tensor."""
        return self.beta == other.beta and all(
            self.tensors[n].data.shape == other.tensors[n].data.shape
            and np.array_equal(self.tensors[n].data, other.tensors[n].data)
            for n in PARAM_NAMES
        )


@dataclass
class EmbeddingBundle:
    img_emb: Tensor
    txt_emb: Tensor
    joint_emb: Tensor
    logits: Tensor

    def unimodal(self) -> Tensor:
        """64-d concatenation of the image and text embeddings."""
        return ops.concat([self.img_emb, self.txt_emb], axis=-1)


def encode_image(params: ModelParams, images) -> Tensor:
    """
    Image embeddings of a [B x 256] batch: affine, relu, affine.

    Raises:
        ShapeError: If the batch is not B x 256
    """
    x = images if isinstance(images, Tensor) else Tensor(np.asarray(images, dtype=get_default_dtype()))
    if x.ndim != 2 or x.shape[1] != IMAGE_SIZE:
        raise ShapeError(f"encode_image: expected B x {IMAGE_SIZE} images, got {x.shape}")
    hidden = ops.relu(ops.add(ops.matmul(x, params["img_w1"]), params["img_b1"]))
    return ops.add(ops.matmul(hidden, params["img_w2"]), params["img_b2"])


def encode_text(params: ModelParams, tokenizer: Tokenizer, texts: Sequence[Sequence[str]]) -> Tensor:
    """
    Text embeddings: mean of token embeddings, then affine and relu.

    Raises:
        InvalidInputError: If any text has no words
    """
    ids: List[List[int]] = []
    for i, words in enumerate(texts):
        if len(words) == 0:
            raise InvalidInputError(f"encode_text: text {i} of the batch is empty")
        ids.append(tokenizer.encode(words))
    if max((max(row) for row in ids), default=0) >= params.vocab_size:
        raise ContractError(f"tokenizer has ids beyond the embedding table of {params.vocab_size} rows")
    pooled = ops.embedding_bag_mean(params["tok_emb"], ids)
    return ops.relu(ops.add(ops.matmul(pooled, params["txt_w"]), params["txt_b"]))


def fuse(params: ModelParams, img_emb: Tensor, txt_emb: Tensor) -> Tensor:
    """
    Adaptation-gate fusion.

    g = relu(W_g [img; txt] + b_g), shift = g * (W_t txt + b_t),
    alpha = beta * min(1, |img| / (|shift| + 1e-6)) per sample,
    joint = img + alpha * shift.

    Raises:
        ShapeError: If the embeddings are not both B x 32
    """
    if img_emb.shape != txt_emb.shape or img_emb.ndim != 2 or img_emb.shape[1] != EMBED_DIM:
        raise ShapeError(f"fuse: img {img_emb.shape} and txt {txt_emb.shape} must both be B x {EMBED_DIM}")
    both = ops.concat([img_emb, txt_emb], axis=-1)
    gate = ops.relu(ops.add(ops.matmul(both, params["gate_w"]), params["gate_b"]))
    shift = ops.multiply(gate, ops.add(ops.matmul(txt_emb, params["shift_w"]), params["shift_b"]))
    img_norm = ops.l2_norm(img_emb, axis=-1, keepdims=True)
    shift_norm = ops.l2_norm(shift, axis=-1, keepdims=True)
    ratio = ops.divide(img_norm, ops.add(shift_norm, SHIFT_EPS))
    alpha = ops.scale(ops.clamp_max(ratio, 1.0), params.beta)
    return ops.add(img_emb, ops.multiply(alpha, shift))


def classify(params: ModelParams, joint_emb: Tensor) -> Tensor:
    return ops.add(ops.matmul(joint_emb, params["head_w"]), params["head_b"])


def forward(params: ModelParams, tokenizer: Tokenizer, batch: Batch) -> EmbeddingBundle:
    """Run both encoders, the fusion and the head on a batch."""
    img = encode_image(params, batch.images)
    txt = encode_text(params, tokenizer, batch.texts)
    if img.shape[0] != txt.shape[0]:
        raise ContractError(f"batch has {img.shape[0]} images but {txt.shape[0]} texts")
    joint = fuse(params, img, txt)
    return EmbeddingBundle(img_emb=img, txt_emb=txt, joint_emb=joint, logits=classify(params, joint))


@dataclass
class Model:
    """Parameters together with the tokenizer they were trained against."""

    params: ModelParams
    tokenizer: Tokenizer

    @classmethod
    def init(cls, tokenizer: Tokenizer, seed: int, beta: float = DEFAULT_BETA) -> "Model":
        return cls(ModelParams.init(len(tokenizer), seed, beta), tokenizer)

    def forward(self, batch: Batch) -> EmbeddingBundle:
        return forward(self.params, self.tokenizer, batch)

    def copy(self, track_grad: Union[bool, Sequence[str]] = False) -> "Model":
        return Model(self.params.copy(track_grad), self.tokenizer)

    def same_architecture(self, other: "Model") -> bool:
        return self.params.shapes() == other.params.shapes() and self.tokenizer == other.tokenizer

    def probabilities(self, batch: Batch) -> np.ndarray:
        return ops.softmax(self.forward(batch).logits.data.astype(np.float64))

    def predict(self, batch: Batch) -> np.ndarray:
        return self.forward(batch).logits.data.argmax(axis=1)


def require_same_architecture(a: Model, b: Model, what: Optional[str] = None):
    if not a.same_architecture(b):
        raise ContractError(f"{what or 'models'}: architectures differ ({a.params.shapes()} vs {b.params.shapes()})")
