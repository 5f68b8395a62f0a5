"""Multiscale neural relation classifier: config, vocabulary, network, training."""
from docnre.model.config import Aggregator, ModelConfig, ModelScope, VARIANTS, variant_config
from docnre.model.vocab import Vocabulary, load_word_vectors
from docnre.model.network import RelationClassifier, sinusoidal_encoding
from docnre.model.batching import DocumentBatch, build_batches
from docnre.model.training import (
    document_loss,
    load_checkpoint,
    predict_batches,
    predict_documents,
    save_checkpoint,
    train,
)
from docnre.model.gradcheck import grad_check

__all__ = [
    "Aggregator",
    "DocumentBatch",
    "ModelConfig",
    "ModelScope",
    "RelationClassifier",
    "VARIANTS",
    "Vocabulary",
    "build_batches",
    "document_loss",
    "grad_check",
    "load_checkpoint",
    "load_word_vectors",
    "predict_batches",
    "predict_documents",
    "save_checkpoint",
    "sinusoidal_encoding",
    "train",
    "variant_config",
]
