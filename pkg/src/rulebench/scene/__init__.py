from .doc import (
    ACTOR_TYPES,
    BEHAVIORS,
    DEFAULT_VOCABULARY,
    EGO_ID,
    ORACLE_LATERAL,
    ORACLE_LONGITUDINAL,
    RELATIONS,
    ROAD_MARKERS,
    ROAD_TYPES,
    TIMES_OF_DAY,
    TRAFFIC_SIGNS,
    WEATHER_CONDITIONS,
    Actor,
    Environment,
    OracleSpec,
    Position,
    RoadNetworkSpec,
    SceneDoc,
    SceneVocabulary,
)
from .dsl import SceneParseError, parse_scene_doc, serialize_scene_doc
from .checks import (
    CoverageReport,
    Finding,
    RuleCoverage,
    align_check,
    load_coherence_rules,
    load_requirement_table,
    self_check,
)

__all__ = [
    "ACTOR_TYPES",
    "BEHAVIORS",
    "DEFAULT_VOCABULARY",
    "EGO_ID",
    "ORACLE_LATERAL",
    "ORACLE_LONGITUDINAL",
    "RELATIONS",
    "ROAD_MARKERS",
    "ROAD_TYPES",
    "TIMES_OF_DAY",
    "TRAFFIC_SIGNS",
    "WEATHER_CONDITIONS",
    "Actor",
    "Environment",
    "OracleSpec",
    "Position",
    "RoadNetworkSpec",
    "SceneDoc",
    "SceneVocabulary",
    "SceneParseError",
    "parse_scene_doc",
    "serialize_scene_doc",
    "CoverageReport",
    "Finding",
    "RuleCoverage",
    "align_check",
    "load_coherence_rules",
    "load_requirement_table",
    "self_check",
]
