"""Integration-and-test risk planning.

Replays integration plans as risk profiles, compares and optimizes
conventional versus multi-cycle (adaptive) strategies, sizes DSP pipelines
and manages reusable test sets.
"""
from .budget import (
    BudgetReport,
    PipelineStage,
    ProcessorBenchmark,
    SignalContext,
    analyze_pipeline,
)
from .model import (
    Assembly,
    FaultHypothesis,
    InterfaceDef,
    ModuleDef,
    ProductModel,
    ValidationReport,
    risk_of,
    validate_model,
)
from .riskengine import (
    DesignCycle,
    IntegrationPlan,
    KpiReport,
    PlanAction,
    PlanError,
    PlanReferenceError,
    RiskProfile,
    kpis,
    simulate,
)
from .strategy import (
    ComparisonReport,
    StrategyObjective,
    build_adaptive_plan,
    build_conventional_plan,
    compare,
    optimize,
    validate_plan,
)
from .testset import TestCase, TestSetRegistry, minimal_cover, reuse_delta

__version__ = "0.1.0"


def bundled(name: str):
    """Path-like handle to a bundled example file (``mds_model.json`` etc.)."""
    from importlib import resources

    return resources.files(__name__) / "data" / name
