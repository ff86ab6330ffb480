"""Corpus toolkit for text-to-SQL datasets.

Thin re-export of the compiled extension: token-budget analysis over
linearized question+schema text, usage-driven schema pruning, multilingual
merging of aligned translation variants, and exact-set-match scoring with
a difficulty breakdown.
"""

from ._core import (
    ConfigError,
    DatabaseSchema,
    Error,
    ExampleSet,
    IoError,
    ParseError,
    ResolutionError,
    SchemaCatalog,
    UsageError,
    ValidationError,
    align_translations,
    canonical_sql,
    classify_difficulty,
    classify_examples,
    count_tokens,
    emit_fit_corpus,
    evaluate,
    exact_set_match,
    extract_refs,
    linearize,
    load_examples,
    load_predictions,
    load_schema_catalog,
    merge_multilingual,
    persist_catalog,
    persist_examples,
    validate_corpus,
)

__all__ = [
    "ConfigError",
    "DatabaseSchema",
    "Error",
    "ExampleSet",
    "IoError",
    "ParseError",
    "ResolutionError",
    "SchemaCatalog",
    "UsageError",
    "ValidationError",
    "align_translations",
    "canonical_sql",
    "classify_difficulty",
    "classify_examples",
    "count_tokens",
    "emit_fit_corpus",
    "evaluate",
    "exact_set_match",
    "extract_refs",
    "linearize",
    "load_examples",
    "load_predictions",
    "load_schema_catalog",
    "merge_multilingual",
    "persist_catalog",
    "persist_examples",
    "validate_corpus",
]
