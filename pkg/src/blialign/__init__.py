"""Bilingual lexicon induction via contrastively tuned cross-lingual maps."""

from .contrastive import (
    NegativePool,
    TrainConfig,
    TrainingDivergedError,
    contrastive_finetune,
    infonce_grad,
    infonce_loss,
    mine_hard_negatives,
)
from .data import BilingualDictionary, PairOrigin, VocabEmbedding, l2_normalize
from .estimator import ContrastiveBliAligner, RectangularProcrustes
from .evaluation import EvalReport, evaluate, format_report, rankings_from_matrix
from .fusion import FusionMap, fuse_spaces, generalized_procrustes, interpolate
from .io import (
    BinaryFormatError,
    DictionaryFormatError,
    EmbeddingFormatError,
    load_dictionary_tsv,
    load_embeddings_text,
    read_binary,
    read_embeddings,
    write_binary,
    write_dictionary_tsv,
    write_embeddings_text,
)
from .mapping import LinearMapPair, advanced_mapping, apply_map, inverse_sqrt_psd
from .retrieval import CslsStats, compute_csls_stats, csls_topk, nn_topk
from .selflearn import (
    C1Config,
    IterationRecord,
    augment_dictionary,
    export_candidates,
    preset,
    run_c1,
)
from .synthetic import SyntheticSpec, generate, write_instance

__version__ = "0.1.0"

__all__ = [
    "BilingualDictionary",
    "BinaryFormatError",
    "C1Config",
    "ContrastiveBliAligner",
    "CslsStats",
    "DictionaryFormatError",
    "EmbeddingFormatError",
    "EvalReport",
    "FusionMap",
    "IterationRecord",
    "LinearMapPair",
    "NegativePool",
    "PairOrigin",
    "RectangularProcrustes",
    "SyntheticSpec",
    "TrainConfig",
    "TrainingDivergedError",
    "VocabEmbedding",
    "advanced_mapping",
    "apply_map",
    "augment_dictionary",
    "compute_csls_stats",
    "contrastive_finetune",
    "csls_topk",
    "evaluate",
    "export_candidates",
    "format_report",
    "fuse_spaces",
    "generalized_procrustes",
    "generate",
    "infonce_grad",
    "infonce_loss",
    "interpolate",
    "inverse_sqrt_psd",
    "l2_normalize",
    "load_dictionary_tsv",
    "load_embeddings_text",
    "mine_hard_negatives",
    "nn_topk",
    "preset",
    "rankings_from_matrix",
    "read_binary",
    "read_embeddings",
    "run_c1",
    "write_binary",
    "write_dictionary_tsv",
    "write_embeddings_text",
    "write_instance",
]
