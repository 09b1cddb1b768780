"""Component analysis of embedding matrices.

The thin SVD splits an embedding into rank-one components. Fixed rank groups
(dominant component, ranks 2-9, ranks 20-54) reconstruct the pad structure,
the word content, and noise respectively; token-level cosine profiles against
the original embedding quantify what each group captures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingMatrix
from .linalg import RANK_RTOL, SvdFactorization, as_matrix, frobenius_norm, row_cosine, thin_svd

#: Default 1-based rank ranges (inclusive) for the component groups.
SUBSEQUENT_RANKS = (2, 9)
RESIDUAL_RANKS = (20, 54)


@dataclass(frozen=True)
class ComponentSelection:
    """A set of 0-based component indices into a factorization."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise ValueError(f"component indices must be non-negative, got {idx}")
        if len(set(idx)) != len(idx):
            raise ValueError(f"duplicate component indices in {idx}")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    @classmethod
    def from_ranks(cls, ranks) -> "ComponentSelection":
        """Build from 1-based ranks (the display convention)."""
        return cls(tuple(int(r) - 1 for r in ranks))

    @property
    def ranks(self) -> tuple[int, ...]:
        """1-based ranks for display."""
        return tuple(i + 1 for i in self.indices)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SpectrumReport:
    sigmas: np.ndarray
    normalized: np.ndarray
    dominance_ratio: float
    rank_deficient: bool = False

    def __post_init__(self):
        if self.sigmas[0] <= 0.0:
            raise ValueError("spectrum of a rank-0 matrix is undefined")
        if self.dominance_ratio < 1.0:
            raise ValueError(f"dominance_ratio must be >= 1, got {self.dominance_ratio}")


@dataclass(frozen=True)
class SimilarityProfile:
    per_token: np.ndarray
    word_mean: float
    pad_mean: float


def reconstruct(f: SvdFactorization, sel: ComponentSelection) -> np.ndarray:
    """Sum of the selected rank-one components sigma_i u_i v_i^T."""
    bad = [i for i in sel.indices if i >= f.k]
    if bad:
        raise ValueError(f"component index {bad[0]} out of range for k={f.k}")
    if not sel.indices:
        return np.zeros((f.u.shape[0], f.v.shape[0]))
    idx = list(sel.indices)
    return (f.u[:, idx] * f.sigma[idx]) @ f.v[:, idx].T


def component_groups(
    f: SvdFactorization,
    length: int,
    subsequent_ranks: tuple[int, int] = SUBSEQUENT_RANKS,
    residual_ranks: tuple[int, int] = RESIDUAL_RANKS,
) -> tuple[ComponentSelection, ComponentSelection, ComponentSelection]:
    """Dominant / subsequent / residual rank groups, clipped to the rank count."""
    if f.u.shape[0] != length:
        raise ValueError(f"factorization has {f.u.shape[0]} rows, expected {length}")
    k = f.k

    def clipped(lo: int, hi: int) -> ComponentSelection:
        return ComponentSelection.from_ranks(range(lo, min(hi, k) + 1))

    primary = ComponentSelection((0,))
    subsequent = clipped(*subsequent_ranks)
    residual = clipped(*residual_ranks)
    return primary, subsequent, residual


def similarity_profile(e: EmbeddingMatrix, recon) -> SimilarityProfile:
    """Per-token cosine between the embedding and a reconstruction, with word/pad means."""
    recon = as_matrix(recon, name="reconstruction")
    if recon.shape != e.x.shape:
        raise ValueError(
            f"reconstruction shape {recon.shape} does not match embedding {e.x.shape}"
        )
    cos = row_cosine(e.x, recon)
    n = e.word_count
    return SimilarityProfile(
        per_token=cos,
        word_mean=float(cos[:n].mean()),
        pad_mean=float(cos[n:].mean()),
    )


def spectrum(e: EmbeddingMatrix, top: int) -> SpectrumReport:
    """First `top` singular values of the embedding with the sigma_1/sigma_2 ratio.

    When sigma_2 falls below the effective-rank threshold the ratio is capped
    at sigma_1 / (RANK_RTOL * sigma_1) and the report is flagged rank deficient.
    """
    return spectrum_of(thin_svd(e.x), top)


def spectrum_of(f: SvdFactorization, top: int) -> SpectrumReport:
    """Spectrum report from an existing factorization (see `spectrum`)."""
    if not 1 <= top <= f.k:
        raise ValueError(f"top must be in [1, {f.k}], got {top}")
    sigma1 = float(f.sigma[0])
    if sigma1 <= 0.0:
        raise ValueError("embedding has rank 0 (all singular values are zero)")
    floor = RANK_RTOL * sigma1
    sigma2 = float(f.sigma[1]) if f.k > 1 else 0.0
    deficient = sigma2 < floor
    ratio = sigma1 / (floor if deficient else sigma2)
    sigmas = f.sigma[:top].copy()
    return SpectrumReport(
        sigmas=sigmas,
        normalized=sigmas / sigma1,
        dominance_ratio=ratio,
        rank_deficient=deficient,
    )


def norm_match(target, reference) -> np.ndarray:
    """Rescale target so its Frobenius norm equals the reference's."""
    target = as_matrix(target, name="target")
    reference = as_matrix(reference, name="reference")
    if target.shape != reference.shape:
        raise ValueError(
            f"norm_match needs equal shapes, got {target.shape} and {reference.shape}"
        )
    target_norm = frobenius_norm(target)
    if target_norm == 0.0:
        raise ValueError("cannot norm-match a zero target (scale is undefined)")
    return target * (frobenius_norm(reference) / target_norm)
