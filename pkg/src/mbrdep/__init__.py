"""Ensemble dependency parsing by minimum-Bayes-risk aggregation of parser outputs."""

from mbrdep.core import (
    HeadVector,
    ParserOutput,
    Sentence,
    StructureError,
    Token,
    is_projective,
    is_single_root,
    validate,
)
from mbrdep.conllu import CorpusFile, read_corpus, write_corpus
from mbrdep.mbr import aggregate_corpus, build_vote_matrix, eisner_decode

__all__ = [
    "CorpusFile",
    "HeadVector",
    "ParserOutput",
    "Sentence",
    "StructureError",
    "Token",
    "aggregate_corpus",
    "build_vote_matrix",
    "eisner_decode",
    "is_projective",
    "is_single_root",
    "read_corpus",
    "validate",
    "write_corpus",
]

__version__ = "0.1.0"
