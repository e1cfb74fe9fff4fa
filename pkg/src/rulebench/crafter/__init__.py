from .combos import (
    Coexistence,
    ComboError,
    NormRelation,
    PerceptualCombo,
    RuleCombo,
    combo_action_type,
    derive_all,
    derive_labels,
    generate_candidate_combos,
    singleton_combo,
)
from .coexistence import (
    CoexistenceOracle,
    ModelCoexistenceOracle,
    OracleReply,
    OracleVerdictError,
    TagCoexistenceOracle,
    validate_coexistence,
)
from .hierarchy import (
    HierarchicalRuleSet,
    HierarchyError,
    build_hierarchy,
    export_hierarchy,
    load_hierarchy,
)

__all__ = [
    "Coexistence",
    "ComboError",
    "NormRelation",
    "PerceptualCombo",
    "RuleCombo",
    "combo_action_type",
    "derive_all",
    "derive_labels",
    "generate_candidate_combos",
    "singleton_combo",
    "CoexistenceOracle",
    "ModelCoexistenceOracle",
    "OracleReply",
    "OracleVerdictError",
    "TagCoexistenceOracle",
    "validate_coexistence",
    "HierarchicalRuleSet",
    "HierarchyError",
    "build_hierarchy",
    "export_hierarchy",
    "load_hierarchy",
]
