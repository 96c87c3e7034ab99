"""Heterogeneous graph datasets from recorded traffic scenarios.

The package turns lanelet road networks with recorded vehicle
trajectories into graph samples: vehicles and lanelets become typed
nodes, their interactions and map topology become typed edges, and a
standardized feature catalog fills the attribute matrices.  Samples
persist in a self-describing binary format with a manifest, ready for
ML dataloaders.
"""

from .builders import (
    ALL_L2L_TYPES,
    L2L_TYPE_CODES,
    L2LEdge,
    build_l2l_edges,
    build_v2l_edges,
    mirror_v2l_edges,
)
from .dataset import (
    CollectorConfig,
    Dataset,
    collect_scenario,
    config_fingerprint,
    create_dataset,
    open_dataset,
)
from .drawers import V2VDrawerConfig, VTVDrawerConfig, draw_v2v, draw_vtv_pairs
from .errors import (
    ConfigError,
    DatasetError,
    ExtractionError,
    GeometryError,
    GraphInvariantError,
    MergeError,
    PipelineError,
    ScenarioParseError,
    ScenarioValidationError,
    SchemaError,
    SerializationError,
    TrafficGraphError,
)
from .extractor import (
    ExtractionConfig,
    Simulation,
    TemporalTrafficExtractor,
    TrafficExtractor,
    build_schemas,
)
from .features import (
    DEFAULT_N_PAD,
    CustomFeatureExtractor,
    FeatureContext,
    base_schema,
    register_custom_extractor,
)
from .graph import (
    EdgeStore,
    FeatureChannel,
    NodeStore,
    TemporalTrafficGraph,
    TrafficGraph,
    merge_window,
    new_graph,
    validate_graph,
)
from .pipeline import (
    Filter,
    Postprocessor,
    Preprocessor,
    ScenarioTransform,
    SegmentLanelets,
    TrafficFilter,
    TransformChain,
    apply_postprocessors,
    remove_vehicle_nodes,
)
from .scenario import (
    AdjacentRef,
    DynamicObstacle,
    Lanelet,
    Scenario,
    VehicleState,
    derive_state_derivatives,
)
from .scenario_xml import parse_scenario
from .serialize import deserialize, read_sample, serialize, write_sample

__version__ = "0.1.0"

__all__ = [
    "ALL_L2L_TYPES",
    "AdjacentRef",
    "CollectorConfig",
    "ConfigError",
    "CustomFeatureExtractor",
    "DEFAULT_N_PAD",
    "Dataset",
    "DatasetError",
    "DynamicObstacle",
    "EdgeStore",
    "ExtractionConfig",
    "ExtractionError",
    "FeatureChannel",
    "FeatureContext",
    "Filter",
    "GeometryError",
    "GraphInvariantError",
    "L2LEdge",
    "L2L_TYPE_CODES",
    "Lanelet",
    "MergeError",
    "NodeStore",
    "PipelineError",
    "Postprocessor",
    "Preprocessor",
    "Scenario",
    "ScenarioParseError",
    "ScenarioTransform",
    "ScenarioValidationError",
    "SchemaError",
    "SegmentLanelets",
    "SerializationError",
    "Simulation",
    "TemporalTrafficExtractor",
    "TemporalTrafficGraph",
    "TrafficExtractor",
    "TrafficFilter",
    "TrafficGraph",
    "TrafficGraphError",
    "TransformChain",
    "V2VDrawerConfig",
    "VTVDrawerConfig",
    "VehicleState",
    "apply_postprocessors",
    "base_schema",
    "build_l2l_edges",
    "build_schemas",
    "build_v2l_edges",
    "collect_scenario",
    "config_fingerprint",
    "create_dataset",
    "derive_state_derivatives",
    "deserialize",
    "draw_v2v",
    "draw_vtv_pairs",
    "merge_window",
    "mirror_v2l_edges",
    "new_graph",
    "open_dataset",
    "parse_scenario",
    "read_sample",
    "register_custom_extractor",
    "remove_vehicle_nodes",
    "serialize",
    "validate_graph",
    "write_sample",
]
