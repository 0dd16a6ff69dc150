"""
Binary checkpoints.

Layout (little-endian):

    b"SHNF" | u32 version | u32 header length | JSON header | raw tensor blobs

The header carries the config echo, iteration, view count, bounding box, numpy RNG state
and a shape table [{name, dtype, shape}, ...]; blobs follow in table order. Parameters,
Adam moments and the torch generator state all travel as blobs.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np
import torch
from loguru import logger

from deblurgrid.config.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from deblurgrid.config.train_config import TrainConfig
from deblurgrid.errors import (
    CheckpointFormatError,
    CheckpointShapeError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    ConfigError,
)

from .state import TrainState, build_state

PREAMBLE = struct.Struct("<4sII")
TORCH_RNG = "rng.torch"
ADAM_SLOTS = ("exp_avg", "exp_avg_sq", "step")

DTYPES: dict[str, tuple[np.dtype, torch.dtype]] = {
    "float32": (np.dtype("<f4"), torch.float32),
    "float64": (np.dtype("<f8"), torch.float64),
    "uint8": (np.dtype("u1"), torch.uint8),
    "int64": (np.dtype("<i8"), torch.int64),
}
TORCH_NAMES = {torch_dtype: name for name, (_, torch_dtype) in DTYPES.items()}


def _collect(state: TrainState) -> dict[str, torch.Tensor]:
    """Every tensor that goes to disk, in declared order."""
    tensors: dict[str, torch.Tensor] = {}
    for prefix, module in state.modules().items():
        for name, value in module.state_dict().items():
            tensors[f"{prefix}.{name}"] = value
    for name, param in state.named_parameters():
        slots = state.optimizer.state.get(param)
        if not slots:
            continue
        for slot in ADAM_SLOTS:
            tensors[f"optim.{name}.{slot}"] = torch.as_tensor(slots[slot])
    tensors[TORCH_RNG] = state.generator.get_state()
    return tensors


def save_checkpoint(state: TrainState, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tensors = _collect(state)
    table, blobs = [], []
    for name, tensor in tensors.items():
        dtype_name = TORCH_NAMES.get(tensor.dtype)
        if dtype_name is None:
            raise CheckpointFormatError(f"cannot store '{name}' of dtype {tensor.dtype}")
        array = tensor.detach().cpu().numpy().astype(DTYPES[dtype_name][0], copy=False)
        table.append({"name": name, "dtype": dtype_name, "shape": list(tensor.shape)})
        blobs.append(np.ascontiguousarray(array).tobytes())
    header = {
        "config": state.config.echo(),
        "iteration": state.iteration,
        "n_views": state.n_views,
        "aabb": state.aabb.detach().cpu().tolist(),
        "rng": state.rng.bit_generator.state,
        "tensors": table,
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with path.open("wb") as f:
        f.write(PREAMBLE.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(header_bytes)))
        f.write(header_bytes)
        for blob in blobs:
            f.write(blob)
    logger.info(f"Checkpoint saved at iteration {state.iteration} → {path}")


def read_header(data: bytes) -> tuple[dict[str, Any], int]:
    """Validate the preamble; returns (header, offset of the first blob)."""
    if len(data) < PREAMBLE.size:
        raise CheckpointTruncatedError(f"file is {len(data)} bytes, shorter than the preamble")
    magic, version, header_len = PREAMBLE.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(f"bad magic {magic!r}, expected {CHECKPOINT_MAGIC!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint version {version}, this build reads version {CHECKPOINT_VERSION}"
        )
    end = PREAMBLE.size + header_len
    if len(data) < end:
        raise CheckpointTruncatedError("header extends past the end of the file")
    try:
        header = json.loads(data[PREAMBLE.size : end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"unreadable header: {e}") from e
    return header, end


def _expected_shapes(state: TrainState) -> dict[str, tuple[str, tuple[int, ...]]]:
    expected = {
        name: (TORCH_NAMES[t.dtype], tuple(t.shape)) for name, t in _collect(state).items()
    }
    for name, param in state.named_parameters():
        dtype_name = TORCH_NAMES[param.dtype]
        expected[f"optim.{name}.exp_avg"] = (dtype_name, tuple(param.shape))
        expected[f"optim.{name}.exp_avg_sq"] = (dtype_name, tuple(param.shape))
        expected[f"optim.{name}.step"] = ("", ())
    return expected


def load_checkpoint(path: Path) -> TrainState:
    """Rebuild the state described by the header and fill it from the blobs."""
    path = Path(path)
    if not path.exists():
        raise CheckpointFormatError(f"checkpoint not found: {path}")
    data = path.read_bytes()
    header, offset = read_header(data)
    try:
        config = TrainConfig.build(header["config"])
        state = build_state(config, int(header["n_views"]), np.asarray(header["aabb"]))
        table = header["tensors"]
    except (KeyError, ConfigError) as e:
        raise CheckpointFormatError(f"header is missing or has invalid fields: {e}") from e

    expected = _expected_shapes(state)
    loaded: dict[str, torch.Tensor] = {}
    for entry in table:
        name, dtype_name, shape = entry["name"], entry["dtype"], tuple(entry["shape"])
        if name not in expected:
            raise CheckpointShapeError(f"unexpected tensor '{name}' for this configuration")
        want_dtype, want_shape = expected[name]
        if shape != want_shape or (want_dtype and dtype_name != want_dtype):
            raise CheckpointShapeError(
                f"'{name}' is {dtype_name}{list(shape)}, expected {want_dtype}{list(want_shape)}"
            )
        np_dtype, _ = DTYPES[dtype_name]
        size = int(np.prod(shape, dtype=np.int64)) * np_dtype.itemsize
        if offset + size > len(data):
            raise CheckpointTruncatedError(f"file ends inside tensor '{name}'")
        array = np.frombuffer(data, dtype=np_dtype, count=size // np_dtype.itemsize, offset=offset)
        loaded[name] = torch.from_numpy(array.reshape(shape).copy())
        offset += size

    missing = [n for n in expected if not n.startswith("optim.") and n not in loaded]
    if missing:
        raise CheckpointTruncatedError(f"checkpoint lacks tensors {missing}")

    with torch.no_grad():
        for prefix, module in state.modules().items():
            module.load_state_dict(
                {k[len(prefix) + 1 :]: v for k, v in loaded.items() if k.startswith(prefix + ".")}
            )
    for name, param in state.named_parameters():
        key = f"optim.{name}"
        if f"{key}.exp_avg" in loaded:
            state.optimizer.state[param] = {slot: loaded[f"{key}.{slot}"] for slot in ADAM_SLOTS}
    state.generator.set_state(loaded[TORCH_RNG])
    state.rng.bit_generator.state = header["rng"]
    state.iteration = int(header["iteration"])
    logger.info(f"Checkpoint loaded from {path} at iteration {state.iteration}")
    return state
