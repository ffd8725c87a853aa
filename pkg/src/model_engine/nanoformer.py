"""
Nanoformer - A tiny seeded bidirectional transformer with a partial KV-cache forward
"""

import hashlib
import json
import logging
import math
import threading
from dataclasses import asdict, dataclass, field, fields
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F

from config import TRANSFORMER_DEFAULTS
from src.core_engine import ArgumentError, CacheInvalidError, Categorical, MaskState

logger = logging.getLogger(__name__)

DTYPES = {"float64": torch.float64, "float32": torch.float32}
NUMPY_DTYPES = {"float64": "<f8", "float32": "<f4"}


@dataclass(frozen=True)
class TransformerConfig:
    """Hyper-parameters of the nanoformer; vocabulary is alphabet_size + 1 (mask last)."""

    layers: int = TRANSFORMER_DEFAULTS["layers"]
    d_model: int = TRANSFORMER_DEFAULTS["d_model"]
    d_k: int = TRANSFORMER_DEFAULTS["d_k"]
    d_ff: int = TRANSFORMER_DEFAULTS["d_ff"]
    heads: int = TRANSFORMER_DEFAULTS["heads"]
    alphabet_size: int = TRANSFORMER_DEFAULTS["alphabet_size"]
    seq_len: int = TRANSFORMER_DEFAULTS["seq_len"]
    positional: bool = TRANSFORMER_DEFAULTS["positional"]
    dtype: str = TRANSFORMER_DEFAULTS["dtype"]
    init_scale: float = TRANSFORMER_DEFAULTS["init_scale"]
    token_prior: float = TRANSFORMER_DEFAULTS["token_prior"]

    def __post_init__(self):
        dims = {f: getattr(self, f) for f in ("layers", "d_model", "d_k", "d_ff", "heads", "alphabet_size", "seq_len")}
        small = [name for name, value in dims.items() if value < 1]
        if small:
            raise ArgumentError(f"transformer dims must be >= 1: {small}")
        if self.dtype not in DTYPES:
            raise ArgumentError(f"dtype must be one of {sorted(DTYPES)}, got {self.dtype!r}")

    @classmethod
    def from_dict(cls, values: Mapping) -> "TransformerConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ArgumentError(f"unknown transformer fields: {unknown}")
        return cls(**values)

    @property
    def vocab_size(self) -> int:
        return self.alphabet_size + 1

    @property
    def mask_id(self) -> int:
        return self.alphabet_size

    @property
    def torch_dtype(self) -> torch.dtype:
        return DTYPES[self.dtype]


@dataclass(eq=False)
class TransformerParams:
    """Weights of the nanoformer keyed by name; a deterministic function of (seed, config)."""

    config: TransformerConfig
    seed: int
    tensors: Dict[str, torch.Tensor] = field(default_factory=dict)

    def __getitem__(self, name: str) -> torch.Tensor:
        return self.tensors[name]

    def layer(self, index: int, name: str) -> torch.Tensor:
        return self.tensors[f"layers.{index}.{name}"]

    @cached_property
    def checksum(self) -> str:
        digest = hashlib.sha1()
        for name in sorted(self.tensors):
            digest.update(name.encode("ascii"))
            digest.update(self.tensors[name].detach().cpu().numpy().tobytes())
        return digest.hexdigest()


@dataclass
class FlopCounter:
    """
    Multiply-add counts of forward passes, split into attention and dense work.

    One counter may be shared by replications running on worker threads;
    every update goes through ``add`` under the counter's lock.
    """

    attention: int = 0
    dense: int = 0
    full_passes: int = 0
    partial_passes: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, attention: int, dense: int, partial: bool) -> None:
        with self._lock:
            self.attention += attention
            self.dense += dense
            if partial:
                self.partial_passes += 1
            else:
                self.full_passes += 1

    def reset(self) -> None:
        with self._lock:
            self.attention = self.dense = self.full_passes = self.partial_passes = 0


@dataclass
class KVCache:
    """
    Per-layer keys and values of all D positions from one full forward.

    Valid only for the state whose fingerprint it carries and for the
    params whose checksum it carries.
    """

    fingerprint: str
    params_checksum: str
    state: MaskState
    keys: List[torch.Tensor] = field(default_factory=list)
    values: List[torch.Tensor] = field(default_factory=list)
    logits: Optional[torch.Tensor] = None


def init_params(seed: int, config: Optional[TransformerConfig] = None) -> TransformerParams:
    """
    Draw nanoformer weights from a seeded scaled-uniform scheme.

    Matrices are U(-a, a) with a = init_scale / sqrt(fan_in), drawn in double
    precision then cast, so both precisions share the same weights. Layer norms
    start at identity. The output bias is the Zipf prior -token_prior log(rank).

    Args:
        seed: Generator seed
        config: Hyper-parameters (defaults when omitted)

    Returns:
        TransformerParams
    """
    config = config or TransformerConfig()
    generator = torch.Generator().manual_seed(int(seed))

    def uniform(*shape: int) -> torch.Tensor:
        bound = config.init_scale / math.sqrt(shape[0])
        draw = torch.rand(shape, generator=generator, dtype=torch.float64)
        return ((2.0 * draw - 1.0) * bound).to(config.torch_dtype)

    def constant(value: float, *shape: int) -> torch.Tensor:
        return torch.full(shape, value, dtype=config.torch_dtype)

    d, h = config.d_model, config.heads * config.d_k
    tensors: Dict[str, torch.Tensor] = {
        "embed": uniform(config.vocab_size, d) * math.sqrt(config.vocab_size),
        "pos": uniform(config.seq_len, d) * math.sqrt(config.seq_len) if config.positional else constant(0.0, config.seq_len, d),
    }
    for index in range(config.layers):
        prefix = f"layers.{index}."
        tensors.update(
            {
                prefix + "ln1.weight": constant(1.0, d),
                prefix + "ln1.bias": constant(0.0, d),
                prefix + "wq": uniform(d, h),
                prefix + "wk": uniform(d, h),
                prefix + "wv": uniform(d, h),
                prefix + "wo": uniform(h, d),
                prefix + "ln2.weight": constant(1.0, d),
                prefix + "ln2.bias": constant(0.0, d),
                prefix + "w1": uniform(d, config.d_ff),
                prefix + "b1": constant(0.0, config.d_ff),
                prefix + "w2": uniform(config.d_ff, d),
                prefix + "b2": constant(0.0, d),
            }
        )
    ranks = torch.arange(1, config.alphabet_size + 1, dtype=torch.float64)
    tensors.update(
        {
            "ln_f.weight": constant(1.0, d),
            "ln_f.bias": constant(0.0, d),
            "unembed": uniform(d, config.alphabet_size),
            "out_bias": (-config.token_prior * torch.log(ranks)).to(config.torch_dtype),
        }
    )
    logger.debug(f"nanoformer params seed={seed} L={config.layers} d_model={d} dtype={config.dtype}")
    return TransformerParams(config, int(seed), tensors)


def _check_state(params: TransformerParams, state: MaskState) -> None:
    if state.length != params.config.seq_len:
        raise ArgumentError(f"state length {state.length} does not match seq_len {params.config.seq_len}")


def _embed(params: TransformerParams, token_ids: torch.Tensor, positions: torch.Tensor) -> torch.Tensor:
    return params["embed"][token_ids] + params["pos"][positions]


def _project(params: TransformerParams, index: int, hidden: torch.Tensor):
    """Queries, keys and values shaped (heads, n, d_k)."""
    config = params.config

    def split(name: str) -> torch.Tensor:
        return (hidden @ params.layer(index, name)).reshape(-1, config.heads, config.d_k).transpose(0, 1)

    return split("wq"), split("wk"), split("wv")


def _attend(params: TransformerParams, index: int, q: torch.Tensor, keys: torch.Tensor, values: torch.Tensor) -> torch.Tensor:
    config = params.config
    weights = torch.softmax(q @ keys.transpose(-1, -2) / math.sqrt(config.d_k), dim=-1)
    mixed = (weights @ values).transpose(0, 1).reshape(-1, config.heads * config.d_k)
    return mixed @ params.layer(index, "wo")


def _feed_forward(params: TransformerParams, index: int, x: torch.Tensor) -> torch.Tensor:
    d = params.config.d_model
    hidden = F.layer_norm(x, (d,), params.layer(index, "ln2.weight"), params.layer(index, "ln2.bias"))
    inner = F.gelu(hidden @ params.layer(index, "w1") + params.layer(index, "b1"))
    return inner @ params.layer(index, "w2") + params.layer(index, "b2")


def _readout(params: TransformerParams, x: torch.Tensor) -> torch.Tensor:
    d = params.config.d_model
    hidden = F.layer_norm(x, (d,), params["ln_f.weight"], params["ln_f.bias"])
    return hidden @ params["unembed"] + params["out_bias"]


def _count(counter: Optional[FlopCounter], params: TransformerParams, queries: int, partial: bool) -> None:
    if counter is None:
        return
    c = params.config
    h = c.heads * c.d_k
    per_layer_attention = 2 * c.heads * queries * c.seq_len * c.d_k
    per_layer_dense = queries * (3 * c.d_model * h + h * c.d_model + 2 * c.d_model * c.d_ff)
    readout = queries * c.d_model * c.alphabet_size
    counter.add(c.layers * per_layer_attention, c.layers * per_layer_dense + readout, partial)


def full_logits(
    params: TransformerParams,
    state: MaskState,
    counter: Optional[FlopCounter] = None,
) -> Tuple[torch.Tensor, KVCache]:
    """
    Run every layer on all D positions and keep each layer's keys and values.

    Returns:
        (logits of shape (D, |S|), KVCache tagged with the state fingerprint)
    """
    _check_state(params, state)
    config = params.config
    token_ids = torch.as_tensor(state.as_array(config.mask_id))
    x = _embed(params, token_ids, torch.arange(config.seq_len))
    cache = KVCache(state.fingerprint(), params.checksum, state)
    for index in range(config.layers):
        hidden = F.layer_norm(
            x, (config.d_model,), params.layer(index, "ln1.weight"), params.layer(index, "ln1.bias")
        )
        q, k, v = _project(params, index, hidden)
        cache.keys.append(k)
        cache.values.append(v)
        x = x + _attend(params, index, q, k, v)
        x = x + _feed_forward(params, index, x)
    logits = _readout(params, x)
    cache.logits = logits
    _count(counter, params, config.seq_len, partial=False)
    return logits, cache


def _to_categorical(logits: torch.Tensor) -> Categorical:
    return Categorical(torch.softmax(logits.to(torch.float64), dim=-1).numpy())


def full_forward(
    params: TransformerParams,
    state: MaskState,
    counter: Optional[FlopCounter] = None,
) -> Tuple[Dict[int, Categorical], KVCache]:
    """Conditionals at every position plus the KV cache of the pass."""
    logits, cache = full_logits(params, state, counter)
    return {i: _to_categorical(logits[i]) for i in range(state.length)}, cache


def partial_logits(
    params: TransformerParams,
    cache: KVCache,
    positions: Sequence[int],
    committed: Mapping[int, int],
    state: Optional[MaskState] = None,
    counter: Optional[FlopCounter] = None,
) -> torch.Tensor:
    """
    Recompute the transformer only at ``positions`` with ``committed`` tokens filled in.

    At every layer queries exist only for I; keys and values at positions
    outside I come from the cache and those inside I are recomputed. Layer
    outputs at positions outside I stay frozen at the cached pass.

    Args:
        params: Weights the cache was computed with
        cache: KV cache of the last full forward
        positions: Index set I (masked in the cached state)
        committed: Tokens on A, a subset of I
        state: State the caller believes the cache belongs to

    Returns:
        Logits of shape (|I|, |S|) in the order of ``positions``

    Raises:
        CacheInvalidError: stale fingerprint or different params
        ArgumentError: A not inside I, or I touching unmasked positions
    """
    if cache.params_checksum != params.checksum:
        raise CacheInvalidError("KV cache was computed with different params")
    if state is not None and state.fingerprint() != cache.fingerprint:
        raise CacheInvalidError("KV cache fingerprint does not match the current state")
    positions = [int(i) for i in positions]
    if len(set(positions)) != len(positions) or not positions:
        raise ArgumentError(f"partial forward needs distinct positions, got {positions}")
    outside = sorted(set(committed) - set(positions))
    if outside:
        raise ArgumentError(f"committed positions {outside} are not in I")
    unmasked = [i for i in positions if not cache.state.is_masked(i)]
    if unmasked:
        raise ArgumentError(f"positions {unmasked} are already unmasked in the cached state")

    config = params.config
    index_tensor = torch.as_tensor(positions)
    token_ids = torch.as_tensor([committed.get(i, config.mask_id) for i in positions])
    x = _embed(params, token_ids, index_tensor)
    for index in range(config.layers):
        hidden = F.layer_norm(
            x, (config.d_model,), params.layer(index, "ln1.weight"), params.layer(index, "ln1.bias")
        )
        q, k, v = _project(params, index, hidden)
        keys = cache.keys[index].clone()
        values = cache.values[index].clone()
        keys[:, index_tensor] = k
        values[:, index_tensor] = v
        x = x + _attend(params, index, q, keys, values)
        x = x + _feed_forward(params, index, x)
    _count(counter, params, len(positions), partial=True)
    return _readout(params, x)


def partial_forward(
    params: TransformerParams,
    cache: KVCache,
    positions: Sequence[int],
    committed: Mapping[int, int],
    state: Optional[MaskState] = None,
    counter: Optional[FlopCounter] = None,
) -> Dict[int, Categorical]:
    """Refreshed conditionals on B = I \\ A from a partial forward over I."""
    logits = partial_logits(params, cache, positions, committed, state, counter)
    return {i: _to_categorical(logits[row]) for row, i in enumerate(positions) if i not in committed}


def save_params(params: TransformerParams, path: Union[str, Path]) -> None:
    """
    Write params as an 8-byte little-endian header length, a JSON header and a flat blob.

    The header records config, seed, dtype and each tensor's name, shape and offset.
    """
    np_dtype = NUMPY_DTYPES[params.config.dtype]
    entries, chunks, offset = [], [], 0
    for name in sorted(params.tensors):
        array = params.tensors[name].detach().cpu().numpy().astype(np_dtype)
        entries.append({"name": name, "shape": list(array.shape), "offset": offset, "count": int(array.size)})
        chunks.append(array.tobytes())
        offset += array.size
    header = json.dumps(
        {"seed": params.seed, "dtype": params.config.dtype, "config": asdict(params.config), "tensors": entries},
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(len(header).to_bytes(8, "little"))
        handle.write(header)
        handle.write(b"".join(chunks))
    logger.info(f"Saved nanoformer params ({len(entries)} tensors) to {path}")


def load_params(path: Union[str, Path]) -> TransformerParams:
    """Inverse of save_params."""
    raw = Path(path).read_bytes()
    size = int.from_bytes(raw[:8], "little")
    header = json.loads(raw[8 : 8 + size].decode("utf-8"))
    config = TransformerConfig.from_dict(header["config"])
    blob = np.frombuffer(raw[8 + size :], dtype=NUMPY_DTYPES[header["dtype"]])
    tensors = {
        entry["name"]: torch.from_numpy(
            blob[entry["offset"] : entry["offset"] + entry["count"]].reshape(entry["shape"]).astype(np.float64)
        ).to(config.torch_dtype)
        for entry in header["tensors"]
    }
    return TransformerParams(config, int(header["seed"]), tensors)
