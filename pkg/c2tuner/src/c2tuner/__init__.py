"""Contrastive fine-tuning of a multilingual encoder for word translation.

Consumes the seed dictionary, candidate, and negatives files produced by
the first-stage aligner, tunes the encoder so translation pairs attract
and hard negatives repel, and exports decontextualized word vectors in
the shared binary format for downstream fusion.
"""

from .bliv import BlivFormatError, read_bliv, write_bliv
from .config import C2Config, DEFAULT_MODEL
from .data import (
    DataFormatError,
    build_cl_dictionary,
    load_candidates_tsv,
    load_negatives_tsv,
    load_seed_tsv,
    load_vocab,
    resolve_negatives,
)
from .encoder import WordEncoder
from .export import encode_vocabulary, export_word_embeddings
from .training import (
    TrainingDivergedError,
    dataset_loss,
    finetune,
    infonce_scores_loss,
)

__version__ = "0.1.0"

__all__ = [
    "BlivFormatError",
    "C2Config",
    "DEFAULT_MODEL",
    "DataFormatError",
    "TrainingDivergedError",
    "WordEncoder",
    "build_cl_dictionary",
    "dataset_loss",
    "encode_vocabulary",
    "export_word_embeddings",
    "finetune",
    "infonce_scores_loss",
    "load_candidates_tsv",
    "load_negatives_tsv",
    "load_seed_tsv",
    "load_vocab",
    "read_bliv",
    "resolve_negatives",
    "write_bliv",
]
