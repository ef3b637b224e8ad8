"""
"FMCK" checkpoint format.

Layout: b"FMCK", version byte (1), uint32 little-endian header length, UTF-8
JSON header, then every tensor as little-endian float32 in header order.
The header lists {name, shape, offset, nbytes} per tensor (offsets are
relative to the start of the tensor section) and a `meta` object holding the
fusion scale and the tokenizer vocabulary.
"""
import json
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.autodiff.tensor import Tensor
from src.errors import CheckpointError
from src.model.network import PARAM_NAMES, Model, ModelParams
from src.model.tokenizer import Tokenizer
from src.utils.io import atomic_write_bytes

logger = logging.getLogger(__name__)

MAGIC = b"FMCK"
VERSION = 1
_DTYPE = np.dtype("<f4")


def checkpoint_bytes(model: Model) -> bytes:
    entries = []
    blobs = []
    offset = 0
    for name, tensor in model.params:
        blob = np.ascontiguousarray(tensor.data, dtype=_DTYPE).tobytes()
        entries.append({"name": name, "shape": list(tensor.shape), "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = {
        "tensors": entries,
        "meta": {"beta": model.params.beta, "vocab": model.tokenizer.to_list()},
    }
    header_bytes = json.dumps(header, separators=(",", ":")).encode("utf-8")
    return MAGIC + bytes([VERSION]) + struct.pack("<I", len(header_bytes)) + header_bytes + b"".join(blobs)


def save_checkpoint(model: Model, path: Union[str, Path]) -> Path:
    path = atomic_write_bytes(path, checkpoint_bytes(model))
    logger.info(f"Saved checkpoint {path}")
    return path


def parse_checkpoint(payload: bytes) -> Model:
    """
    Decode checkpoint bytes.

    Raises:
        CheckpointError: On a bad magic, unsupported version, malformed header
            or truncated tensor section
    """
    if payload[:4] != MAGIC:
        raise CheckpointError("not an FMCK checkpoint (bad magic bytes)")
    if len(payload) < 9:
        raise CheckpointError("truncated checkpoint header")
    if payload[4] != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {payload[4]}")
    (header_len,) = struct.unpack("<I", payload[5:9])
    body_start = 9 + header_len
    if len(payload) < body_start:
        raise CheckpointError("truncated checkpoint header")
    try:
        header = json.loads(payload[9:body_start].decode("utf-8"))
        entries = header["tensors"]
        meta = header["meta"]
        tokenizer = Tokenizer.from_list(meta["vocab"])
        beta = float(meta["beta"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"malformed checkpoint header: {e}") from e

    body = payload[body_start:]
    tensors = {}
    for entry in entries:
        name, shape = entry["name"], tuple(entry["shape"])
        start, nbytes = entry["offset"], entry["nbytes"]
        if nbytes != int(np.prod(shape, dtype=np.int64)) * _DTYPE.itemsize or start + nbytes > len(body):
            raise CheckpointError(f"tensor {name!r}: byte range does not match shape {shape}")
        data = np.frombuffer(body, dtype=_DTYPE, count=nbytes // _DTYPE.itemsize, offset=start)
        tensors[name] = Tensor(data.reshape(shape).astype(np.float32), name=name, dtype=np.float32)
    unknown = set(tensors) - set(PARAM_NAMES)
    if unknown:
        raise CheckpointError(f"unexpected tensors {sorted(unknown)}")
    try:
        params = ModelParams(tensors, beta=beta)
    except ValueError as e:
        raise CheckpointError(str(e)) from e
    if params.vocab_size != len(tokenizer):
        raise CheckpointError(f"embedding table has {params.vocab_size} rows but vocabulary has {len(tokenizer)} words")
    return Model(params, tokenizer)


def load_checkpoint(path: Union[str, Path]) -> Model:
    """
    Raises:
        FileNotFoundError: If the checkpoint doesn't exist
        CheckpointError: If it is malformed
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    return parse_checkpoint(path.read_bytes())
