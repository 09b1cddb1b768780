"""Orthogonal projectors onto unwanted-token subspaces and projection-separation.

The suppression step is x' = x - alpha * x @ p, where p projects onto the row
space of the embedding block being suppressed (usually the word-token rows)
and alpha in [0, 1] sets how much of the projected component is removed.
Baseline suppression schemes (zeroing word rows, dropping SVD rank ranges)
live here too for comparison runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import binio
from .decompose import ComponentSelection, norm_match, reconstruct
from .embedding import EmbeddingMatrix
from .linalg import RANK_RTOL, as_matrix, gram_schmidt_basis, thin_svd

PROJECTOR_METHODS = ("svd", "gram_schmidt")


@dataclass(frozen=True)
class Projector:
    """A symmetric idempotent d x d matrix projecting onto a token subspace."""

    p: np.ndarray
    rank: int
    source_rows: int
    method: str

    def __post_init__(self):
        p = as_matrix(self.p, name="projector")
        object.__setattr__(self, "p", p)
        p.setflags(write=False)
        if p.shape[0] != p.shape[1]:
            raise ValueError(f"projector must be square, got {p.shape}")
        if self.method not in PROJECTOR_METHODS:
            raise ValueError(f"unknown projector method {self.method!r}")
        trace = float(np.trace(p))
        if abs(trace - self.rank) > 1e-6:
            raise ValueError(f"trace {trace} does not match rank {self.rank}")

    @property
    def dim(self) -> int:
        return self.p.shape[0]


@dataclass(frozen=True)
class DualPathConfig:
    """Separation strength and whether to rescale the result to the input's norm."""

    alpha: float
    resize: bool = True

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


def build_projector(x_tilde, method: str = "svd") -> Projector:
    """Projector p = b @ b.T onto the row space of x_tilde.

    The basis b comes from the thin SVD's right singular vectors above the
    effective-rank threshold, or from Gram-Schmidt; the two agree for
    full-rank inputs.
    """
    x_tilde = as_matrix(x_tilde, name="suppression target")
    if not np.any(x_tilde):
        raise ValueError("suppression target is all zero: empty subspace")
    if method == "svd":
        f = thin_svd(x_tilde)
        keep = f.sigma > RANK_RTOL * f.sigma[0]
        basis = f.v[:, keep]
    elif method == "gram_schmidt":
        basis = gram_schmidt_basis(x_tilde, RANK_RTOL)
    else:
        raise ValueError(f"unknown projector method {method!r}")
    if basis.shape[1] == 0:
        raise ValueError("suppression target spans an empty subspace")
    return Projector(
        p=basis @ basis.T,
        rank=basis.shape[1],
        source_rows=x_tilde.shape[0],
        method=method,
    )


def project_separate(x, proj: Projector, alpha: float) -> np.ndarray:
    """x - alpha * x @ p; alpha=0 returns x, alpha=1 removes the in-subspace part."""
    x = as_matrix(x, name="embedding")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if x.shape[1] != proj.dim:
        raise ValueError(
            f"embedding has {x.shape[1]} columns but projector is {proj.dim}x{proj.dim}"
        )
    return x - alpha * (x @ proj.p)


def decor_embedding(e: EmbeddingMatrix, cfg: DualPathConfig) -> np.ndarray:
    """Separate an embedding from its own word-token subspace.

    Builds the projector from the word rows, applies the separation with
    cfg.alpha, and (by default) rescales the result to the original Frobenius
    norm before it is fed to LoRA layers.
    """
    if not np.any(e.word_rows):
        raise ValueError("word-token rows are all zero: nothing to project against")
    proj = build_projector(e.word_rows, method="svd")
    x_prime = project_separate(e.x, proj, cfg.alpha)
    if cfg.resize:
        x_prime = norm_match(x_prime, e.x)
    return x_prime


def suppress_zero_words(e: EmbeddingMatrix) -> np.ndarray:
    """Copy of the embedding with the word-token rows set to zero."""
    out = e.x.copy()
    out[: e.word_count] = 0.0
    return out


def suppress_exclude_components(e: EmbeddingMatrix, lo_rank: int, hi_rank: int) -> np.ndarray:
    """Reconstruction that drops the 1-based rank range [lo_rank, hi_rank]."""
    f = thin_svd(e.x)
    if not 1 <= lo_rank <= hi_rank <= f.k:
        raise ValueError(
            f"rank range must satisfy 1 <= lo <= hi <= {f.k}, got ({lo_rank}, {hi_rank})"
        )
    keep = [i for i in range(f.k) if not lo_rank - 1 <= i <= hi_rank - 1]
    return reconstruct(f, ComponentSelection(tuple(keep)))


def remove_target(x, target, alpha: float) -> np.ndarray:
    """Separate x from the row space of an external target embedding."""
    return project_separate(x, build_projector(target, method="svd"), alpha)


def save_projector(proj: Projector, path, header_path=None, source: str = "") -> None:
    header_path = header_path or binio.header_path_for(path)
    binio.write_payload(path, proj.p)
    binio.write_header(
        header_path,
        {
            "d": proj.dim,
            "rank": proj.rank,
            "source_rows": proj.source_rows,
            "method": proj.method,
            "source": source,
        },
    )


def load_projector(path, header_path=None) -> Projector:
    """Load a projector; 32-bit storage loosens idempotence to file precision."""
    header_path = header_path or binio.header_path_for(path)
    header = binio.read_header(header_path)
    d = binio.require_int(header, "d", header_path)
    rank = binio.require_int(header, "rank", header_path)
    p = binio.read_payload(path, d, d)
    sym = np.abs(p - p.T).max()
    if sym > 1e-5 * max(np.abs(p).max(), 1e-300):
        raise ValueError(f"{path}: stored projector is not symmetric (max dev {sym:.3e})")
    return Projector(
        p=p,
        rank=rank,
        source_rows=int(header.get("source_rows", 0)),
        method=header.get("method", "svd"),
    )
