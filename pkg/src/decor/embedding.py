"""Token-embedding matrices: the word/pad row partition, file I/O, and a synthetic generator.

An embedding matrix holds one prompt's l token vectors of dimension d. The
first n rows are word tokens, the remaining l-n rows are padding tokens that
filler models append to reach the fixed length; real pipelines produce these
as 32-bit tensors, so files are 32-bit while in-memory arithmetic is 64-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import binio
from .linalg import as_matrix


@dataclass(frozen=True)
class EmbeddingMatrix:
    """An l x d token embedding whose first `word_count` rows are word tokens."""

    x: np.ndarray
    word_count: int
    labels: tuple[str, ...] | None = None
    name: str | None = None

    def __post_init__(self):
        x = as_matrix(self.x, name="embedding")
        object.__setattr__(self, "x", x)
        x.setflags(write=False)
        l = x.shape[0]
        if not 1 <= self.word_count < l:
            raise ValueError(
                f"word_count must satisfy 1 <= n < l, got n={self.word_count}, l={l}"
            )
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != l:
                raise ValueError(f"expected {l} labels, got {len(labels)}")
            object.__setattr__(self, "labels", labels)

    @property
    def length(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def word_rows(self) -> np.ndarray:
        return self.x[: self.word_count]

    @property
    def pad_rows(self) -> np.ndarray:
        return self.x[self.word_count:]


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for `synthesize`. pad_coherence 1.0 makes all pad rows identical."""

    length: int
    dim: int
    word_count: int
    pad_coherence: float
    seed: int

    def __post_init__(self):
        if not self.length > self.word_count >= 1:
            raise ValueError(
                f"need length > word_count >= 1, got length={self.length}, "
                f"word_count={self.word_count}"
            )
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if not 0.0 <= self.pad_coherence <= 1.0:
            raise ValueError(f"pad_coherence must be in [0, 1], got {self.pad_coherence}")


def synthesize(spec: SyntheticSpec) -> EmbeddingMatrix:
    """Generate an embedding with near-collinear pad rows.

    Word rows are independent standard normal vectors. Each pad row mixes a
    shared random unit direction (weight pad_coherence) with its own unit
    sphere noise vector (weight 1 - pad_coherence) and is then rescaled to the
    mean word-row norm, so the pad block's mutual alignment is controlled by
    pad_coherence alone. Deterministic for a given seed.
    """
    rng = np.random.default_rng(spec.seed)
    words = rng.standard_normal((spec.word_count, spec.dim))
    shared = rng.standard_normal(spec.dim)
    shared /= np.linalg.norm(shared)
    noise = rng.standard_normal((spec.length - spec.word_count, spec.dim))
    noise /= np.linalg.norm(noise, axis=1, keepdims=True)
    pads = spec.pad_coherence * shared + (1.0 - spec.pad_coherence) * noise
    pads /= np.linalg.norm(pads, axis=1, keepdims=True)
    pads *= np.linalg.norm(words, axis=1).mean()
    labels = tuple(
        f"w{i}" if i < spec.word_count else f"p{i}" for i in range(spec.length)
    )
    name = (
        f"synth_l{spec.length}_d{spec.dim}_n{spec.word_count}"
        f"_c{spec.pad_coherence!r}_seed{spec.seed}"
    )
    return EmbeddingMatrix(
        x=np.vstack([words, pads]), word_count=spec.word_count, labels=labels, name=name
    )


def load_embedding(path, header_path=None) -> EmbeddingMatrix:
    """Load an embedding from a 32-bit payload plus its JSON header sidecar."""
    header_path = header_path or binio.header_path_for(path)
    header = binio.read_header(header_path)
    l = binio.require_int(header, "l", header_path)
    d = binio.require_int(header, "d", header_path)
    n = binio.require_int(header, "n", header_path)
    if l < 2 or d < 1:
        raise ValueError(f"{header_path}: need l >= 2 and d >= 1, got l={l}, d={d}")
    if not 1 <= n < l:
        raise ValueError(f"{header_path}: need 1 <= n < l, got n={n}, l={l}")
    labels = header.get("labels")
    if labels is not None and (
        not isinstance(labels, list) or len(labels) != l
    ):
        raise ValueError(f"{header_path}: labels must be a list of {l} strings")
    x = binio.read_payload(path, l, d)
    return EmbeddingMatrix(
        x=x,
        word_count=n,
        labels=tuple(labels) if labels is not None else None,
        name=header.get("name"),
    )


def save_embedding(emb: EmbeddingMatrix, path, header_path=None) -> None:
    """Write the 32-bit payload and JSON header; loses only 32-bit quantization."""
    header_path = header_path or binio.header_path_for(path)
    binio.write_payload(path, emb.x)
    header = {"l": emb.length, "d": emb.dim, "n": emb.word_count}
    if emb.labels is not None:
        header["labels"] = list(emb.labels)
    if emb.name is not None:
        header["name"] = emb.name
    binio.write_header(header_path, header)
