"""Text-embedding decomposition, orthogonal-subspace suppression, and dual-path attention."""

__version__ = "0.1.0"

from .decompose import (
    ComponentSelection,
    SimilarityProfile,
    SpectrumReport,
    component_groups,
    norm_match,
    reconstruct,
    similarity_profile,
    spectrum,
    spectrum_of,
)
from .embedding import (
    EmbeddingMatrix,
    SyntheticSpec,
    load_embedding,
    save_embedding,
    synthesize,
)
from .linalg import (
    SvdFactorization,
    frobenius_norm,
    gram_schmidt_basis,
    matmul,
    row_cosine,
    thin_svd,
)
from .lora import (
    AttentionOutput,
    LoraAttentionWeights,
    forward_decor,
    forward_decor_mixed,
    forward_standard,
    load_lora,
    random_lora,
    save_lora,
)
from .projection import (
    DualPathConfig,
    Projector,
    build_projector,
    decor_embedding,
    load_projector,
    project_separate,
    remove_target,
    save_projector,
    suppress_exclude_components,
    suppress_zero_words,
)

__all__ = [
    "__version__",
    "AttentionOutput",
    "ComponentSelection",
    "DualPathConfig",
    "EmbeddingMatrix",
    "LoraAttentionWeights",
    "Projector",
    "SimilarityProfile",
    "SpectrumReport",
    "SvdFactorization",
    "SyntheticSpec",
    "build_projector",
    "component_groups",
    "decor_embedding",
    "forward_decor",
    "forward_decor_mixed",
    "forward_standard",
    "frobenius_norm",
    "gram_schmidt_basis",
    "load_embedding",
    "load_lora",
    "load_projector",
    "matmul",
    "norm_match",
    "project_separate",
    "random_lora",
    "reconstruct",
    "remove_target",
    "row_cosine",
    "save_embedding",
    "save_lora",
    "save_projector",
    "similarity_profile",
    "spectrum",
    "spectrum_of",
    "suppress_exclude_components",
    "suppress_zero_words",
    "synthesize",
    "thin_svd",
]
