"""Loop-flow decomposition of DC power flows and bidding-zone splitting.

Line flows are traced to generator/load pairs with the proportional sharing
principle, each component is classified as internal (IN), import/export
(IE), transit (TR) or loop flow (LF) against a zone map, and the zone whose
internal trades cause the most loop flow is split in two.
"""

from .classify import (
    Category,
    DecompositionTable,
    ZoneRank,
    classify,
    decompose,
    decompose_line,
    loop_injections,
    rank_zones,
)
from .dcflow import FlowSolution, Scenario, ScenarioError, load_flows, load_scenarios, solve_dc
from .network import (
    IncidenceMatrices,
    Line,
    Network,
    NetworkError,
    Node,
    ZoneMap,
    build_network,
    incidence,
    load_network,
    orient_by_flow,
)
from .pipeline import (
    AveragedResult,
    PipelineConfig,
    PipelineReport,
    average_decomposition,
    evaluate_scenario,
    optimize_zones,
    run_pipeline,
)
from .splitting import NoLoopFlows, SplitResult, select_target_zone, split_zone
from .tracing import (
    TraceResult,
    TracingError,
    distribution_matrices,
    exchange_matrix,
    flow_matrix,
    g2t_l2t,
    gdf_ldf,
    throughflow,
    trace,
)

__version__ = "0.1.0"
