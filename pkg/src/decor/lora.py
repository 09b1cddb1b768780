"""Toy cross-attention key/value layer with low-rank adapter factors.

Single head, no query path or softmax: the routing under study only touches
how the key and value projections consume text embeddings. The adapter update
is delta = a @ b with x @ a @ b ordering (a: d x r, b: r x d_attn); the file
header records this factor order. In dual-path routing the frozen base weight
sees the original embedding while the adapter factors see the projected one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import binio
from .linalg import as_matrix

FACTOR_ORDER = ("w_k", "w_v", "a_k", "b_k", "a_v", "b_v")


@dataclass(frozen=True)
class LoraAttentionWeights:
    """Base key/value weights plus low-rank factors; immutable after construction."""

    w_k: np.ndarray
    w_v: np.ndarray
    a_k: np.ndarray
    b_k: np.ndarray
    a_v: np.ndarray
    b_v: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        for field in FACTOR_ORDER:
            arr = as_matrix(getattr(self, field), name=field)
            object.__setattr__(self, field, arr)
            arr.setflags(write=False)
        d, d_attn = self.w_k.shape
        r = self.a_k.shape[1]
        if self.w_v.shape != (d, d_attn):
            raise ValueError(f"w_v shape {self.w_v.shape} != w_k shape {(d, d_attn)}")
        for name, arr, want in (
            ("a_k", self.a_k, (d, r)),
            ("a_v", self.a_v, (d, r)),
            ("b_k", self.b_k, (r, d_attn)),
            ("b_v", self.b_v, (r, d_attn)),
        ):
            if arr.shape != want:
                raise ValueError(f"{name} shape {arr.shape}, expected {want}")
        if not 1 <= r <= min(d, d_attn):
            raise ValueError(f"rank must be in [1, {min(d, d_attn)}], got {r}")

    @property
    def dim(self) -> int:
        return self.w_k.shape[0]

    @property
    def dim_attn(self) -> int:
        return self.w_k.shape[1]

    @property
    def rank(self) -> int:
        return self.a_k.shape[1]

    def delta_k(self) -> np.ndarray:
        return self.a_k @ self.b_k

    def delta_v(self) -> np.ndarray:
        return self.a_v @ self.b_v


@dataclass(frozen=True)
class AttentionOutput:
    keys: np.ndarray
    values: np.ndarray


def _lora_term(x_prime: np.ndarray, a: np.ndarray, b: np.ndarray, scale: float) -> np.ndarray:
    return scale * ((x_prime @ a) @ b)


def forward_decor(x, x_prime, w: LoraAttentionWeights) -> AttentionOutput:
    """Dual-path forward: base weights consume x, adapter factors consume x_prime."""
    x = as_matrix(x, name="embedding")
    x_prime = as_matrix(x_prime, name="projected embedding")
    if x.shape != x_prime.shape:
        raise ValueError(
            f"embedding {x.shape} and projected embedding {x_prime.shape} differ"
        )
    if x.shape[1] != w.dim:
        raise ValueError(f"embedding has {x.shape[1]} columns, weights expect {w.dim}")
    keys = x @ w.w_k + _lora_term(x_prime, w.a_k, w.b_k, w.scale)
    values = x @ w.w_v + _lora_term(x_prime, w.a_v, w.b_v, w.scale)
    return AttentionOutput(keys=keys, values=values)


def forward_standard(x, w: LoraAttentionWeights) -> AttentionOutput:
    """Conventional forward: both paths consume the same embedding."""
    return forward_decor(x, x, w)


def forward_decor_mixed(
    x, x_prime_a, w_a: LoraAttentionWeights, x_prime_b, w_b: LoraAttentionWeights
) -> AttentionOutput:
    """Two adapters on one frozen base: each adapter gets its own projected embedding.

    The base path is evaluated once with w_a's base weights (the shared frozen
    weight); w_b's base matrices are ignored and must only agree in shape.
    """
    if (w_a.dim, w_a.dim_attn) != (w_b.dim, w_b.dim_attn):
        raise ValueError(
            f"adapters disagree on dims: {(w_a.dim, w_a.dim_attn)} vs "
            f"{(w_b.dim, w_b.dim_attn)}"
        )
    first = forward_decor(x, x_prime_a, w_a)
    x_prime_b = as_matrix(x_prime_b, name="second projected embedding")
    if x_prime_b.shape != (first.keys.shape[0], w_b.dim):
        raise ValueError(
            f"second projected embedding {x_prime_b.shape} does not match "
            f"({first.keys.shape[0]}, {w_b.dim})"
        )
    return AttentionOutput(
        keys=first.keys + _lora_term(x_prime_b, w_b.a_k, w_b.b_k, w_b.scale),
        values=first.values + _lora_term(x_prime_b, w_b.a_v, w_b.b_v, w_b.scale),
    )


def random_lora(
    seed: int,
    d: int,
    d_attn: int,
    rank: int,
    scale: float = 1.0,
    b_init: str = "zero",
) -> LoraAttentionWeights:
    """Deterministic random weights: base and `a` factors are spherical normal
    (base scaled by 1/sqrt(d)), `b` factors start at zero unless b_init="spherical"."""
    if b_init not in ("zero", "spherical"):
        raise ValueError(f"b_init must be 'zero' or 'spherical', got {b_init!r}")
    if not 1 <= rank <= min(d, d_attn):
        raise ValueError(f"rank must be in [1, {min(d, d_attn)}], got {rank}")
    rng = np.random.default_rng(seed)
    w_k = rng.standard_normal((d, d_attn)) / np.sqrt(d)
    w_v = rng.standard_normal((d, d_attn)) / np.sqrt(d)
    a_k = rng.standard_normal((d, rank))
    a_v = rng.standard_normal((d, rank))
    if b_init == "spherical":
        b_k = rng.standard_normal((rank, d_attn))
        b_v = rng.standard_normal((rank, d_attn))
    else:
        b_k = np.zeros((rank, d_attn))
        b_v = np.zeros((rank, d_attn))
    return LoraAttentionWeights(
        w_k=w_k, w_v=w_v, a_k=a_k, b_k=b_k, a_v=a_v, b_v=b_v, scale=scale
    )


def save_lora(w: LoraAttentionWeights, path, header_path=None) -> None:
    header_path = header_path or binio.header_path_for(path)
    flat = np.concatenate([getattr(w, f).ravel() for f in FACTOR_ORDER])
    binio.write_payload(path, flat.reshape(1, -1))
    binio.write_header(
        header_path,
        {
            "d": w.dim,
            "d_attn": w.dim_attn,
            "r": w.rank,
            "scale": w.scale,
            "factors": list(FACTOR_ORDER),
            "delta": "a @ b, applied as x @ a @ b",
        },
    )


def load_lora(path, header_path=None) -> LoraAttentionWeights:
    header_path = header_path or binio.header_path_for(path)
    header = binio.read_header(header_path)
    d = binio.require_int(header, "d", header_path)
    d_attn = binio.require_int(header, "d_attn", header_path)
    r = binio.require_int(header, "r", header_path)
    scale = float(header.get("scale", 1.0))
    if header.get("factors") is not None and tuple(header["factors"]) != FACTOR_ORDER:
        raise ValueError(f"{header_path}: unsupported factor order {header['factors']}")
    shapes = {
        "w_k": (d, d_attn),
        "w_v": (d, d_attn),
        "a_k": (d, r),
        "b_k": (r, d_attn),
        "a_v": (d, r),
        "b_v": (r, d_attn),
    }
    total = sum(rows * cols for rows, cols in shapes.values())
    flat = binio.read_payload(path, 1, total).ravel()
    parts = {}
    offset = 0
    for field in FACTOR_ORDER:
        rows, cols = shapes[field]
        parts[field] = flat[offset : offset + rows * cols].reshape(rows, cols)
        offset += rows * cols
    return LoraAttentionWeights(scale=scale, **parts)
