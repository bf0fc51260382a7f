"""Root cause analysis of performance drops on causal graphs of system metrics."""
from .anomaly_window import AnomalyWindow, DetectionConfig, NoAnomalyError, detect_window, slice_3n
from .dataset import DataError, DiagnosticInput, TimeSeriesDataset, load_csv, save_csv
from .discovery import DiscoveryConfig, discover
from .domain_knowledge import DomainKnowledgeModel, PartialGraphKnowledge, RefinementKnowledge, load_dk
from .enhancement import enhance
from .entropy import EntropyConfig, orient_pair
from .graph import CausalGraph, CycleError, GraphError
from .pipeline import Diagnosis, PipelineConfig, analyse_window, diagnose
from .refinement import AdjustedScore, RefinementConfig, adjusted_score, refine
from .simulator import GroundTruthGraph, SimRun, generate, inject_anomaly, load_fixture, simulate_run
from .subtraction import RootCauseReport, subtract

__version__ = "0.1.0"

__all__ = [
    "AdjustedScore", "AnomalyWindow", "CausalGraph", "CycleError", "DataError", "DetectionConfig",
    "Diagnosis", "DiagnosticInput", "DiscoveryConfig", "DomainKnowledgeModel", "EntropyConfig",
    "GraphError", "GroundTruthGraph", "NoAnomalyError", "PartialGraphKnowledge", "PipelineConfig",
    "RefinementConfig", "RefinementKnowledge", "RootCauseReport", "SimRun", "TimeSeriesDataset",
    "adjusted_score", "analyse_window", "detect_window", "diagnose", "discover", "enhance",
    "generate", "inject_anomaly", "load_csv", "load_dk", "load_fixture", "orient_pair", "refine",
    "save_csv", "simulate_run", "slice_3n", "subtract",
]
