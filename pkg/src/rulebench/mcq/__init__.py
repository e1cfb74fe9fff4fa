from .arbitration import (
    ActionDirective,
    ArbitrationError,
    SamePriorityTie,
    describe_directive,
    determine_correct_action,
    directive_consistent,
)
from .builder import (
    HUMAN_REVIEW_RATE,
    OPTION_KEYS,
    QUALITY_FLAG_THRESHOLD,
    Mcq,
    McqFormatError,
    McqProvenance,
    McqRejectedError,
    PipelineStage,
    QualityScore,
    ValidationVerdict,
    assemble_mcq,
    consensus_validate,
    dump_mcq_dataset,
    load_mcq_dataset,
    mcq_output_fields,
    mcq_to_record,
    parse_generator_output,
    quality_score,
    record_to_mcq,
    sample_for_human_review,
    validate_mcq,
)

__all__ = [
    "ActionDirective",
    "ArbitrationError",
    "SamePriorityTie",
    "describe_directive",
    "determine_correct_action",
    "directive_consistent",
    "HUMAN_REVIEW_RATE",
    "OPTION_KEYS",
    "QUALITY_FLAG_THRESHOLD",
    "Mcq",
    "McqFormatError",
    "McqProvenance",
    "McqRejectedError",
    "PipelineStage",
    "QualityScore",
    "ValidationVerdict",
    "assemble_mcq",
    "consensus_validate",
    "dump_mcq_dataset",
    "load_mcq_dataset",
    "mcq_output_fields",
    "mcq_to_record",
    "parse_generator_output",
    "quality_score",
    "record_to_mcq",
    "sample_for_human_review",
    "validate_mcq",
]
