"""Context-aware target/aspect embedding refinement for TABSA."""

from ._core import (  # noqa: F401
    AspectEmbedding,
    CoefficientState,
    EmbeddingTable,
    InputError,
    NumericalDivergenceError,
    OpinionTuple,
    Polarity,
    RefinementResult,
    RefinerConfig,
    Sentence,
    SyntheticConfig,
    UndefinedMetricError,
    aspect_embedding,
    aspect_loss,
    auc,
    build_synthetic_table,
    coefficient_forward,
    generate_synthetic,
    load_sentihood,
    macro_f1,
    parse_embedding_file,
    reconstruct_target,
    refine_aspect_vector,
    refine_pair,
    refine_sentence,
    run_selfchecks,
    separation_statistic,
    step_threshold,
    strict_accuracy,
    target_loss,
    tokenize,
    validate_sentence,
    write_embedding_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
