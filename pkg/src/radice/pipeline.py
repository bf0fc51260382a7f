"""End-to-end diagnosis: window, discovery, enhancement, refinement, subtraction."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Any, Mapping

from .anomaly_window import AnomalyWindow, DetectionConfig, detect_window, slice_3n
from .dataset import DiagnosticInput
from .discovery import DiscoveryConfig, discover
from .domain_knowledge import DomainKnowledgeModel
from .enhancement import EnhancementLog, enhance
from .entropy import EntropyConfig
from .graph import CausalGraph
from .refinement import RefinementConfig, refine
from .subtraction import RootCauseReport, subtract

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    discovery: DiscoveryConfig = field(default_factory=DiscoveryConfig)
    entropy: EntropyConfig = field(default_factory=EntropyConfig)
    refinement: RefinementConfig = field(default_factory=RefinementConfig)

    # flat option name -> (section, field)
    FLAT = {
        "z_threshold": ("detection", "z_threshold"),
        "filter_width": ("detection", "filter_width"),
        "max_gap": ("detection", "max_gap"),
        "tau_max": ("discovery", "tau_max"),
        "alpha": ("discovery", "alpha"),
        "alpha_grid": ("discovery", "alpha_grid"),
        "ci_test": ("discovery", "ci_test"),
        "entropy_bins": ("entropy", "bins"),
        "entropy_min_gap": ("entropy", "min_gap"),
        "min_sim": ("refinement", "min_sim"),
        "max_shift": ("refinement", "max_shift"),
        "max_width": ("refinement", "max_width"),
        "shift_penalty": ("refinement", "shift_penalty"),
        "smooth_penalty": ("refinement", "smooth_penalty"),
    }

    def updated(self, options: Mapping[str, Any]) -> "PipelineConfig":
        """New config with flat ``options`` applied (``None`` values ignored)."""
        sections: dict[str, dict[str, Any]] = {}
        for key, value in options.items():
            if value is None:
                continue
            key = key.replace("-", "_")
            if key not in self.FLAT:
                raise KeyError(f"unknown option {key!r}")
            section, name = self.FLAT[key]
            if name == "alpha_grid":
                value = tuple(float(a) for a in value)
            sections.setdefault(section, {})[name] = value
        return dataclasses.replace(self, **{
            s: dataclasses.replace(getattr(self, s), **vals) for s, vals in sections.items()})


@dataclass
class Diagnosis:
    report: RootCauseReport
    window_input: DiagnosticInput
    discovered: CausalGraph
    enhanced: CausalGraph
    enhancement_log: EnhancementLog


def analyse_window(inp: DiagnosticInput, dk: DomainKnowledgeModel, config: PipelineConfig,
                   discovered: CausalGraph | None = None) -> Diagnosis:
    """Run the four graph stages on an already sliced 3n-sample input."""
    if discovered is None:
        discovered = discover(inp, config.discovery)
    elog = EnhancementLog()
    enhanced = enhance(discovered, dk.partial, inp, config.entropy, elog)
    refined = refine(inp, dk, config.refinement)
    report = subtract(enhanced, refined.root_causes, inp.target, dk.partial)
    report.below_min_sim = refined.below_min_sim
    report.sign_rule = refined.sign_rule
    return Diagnosis(report, inp, discovered, enhanced, elog)


def diagnose(inp: DiagnosticInput, dk: DomainKnowledgeModel | None = None,
             config: PipelineConfig | None = None, window: AnomalyWindow | None = None) -> Diagnosis:
    """Full diagnosis of the performance drop in ``inp``.

    Raises :class:`~radice.anomaly_window.NoAnomalyError` when no drop is found
    and ``window`` is not given.
    """
    dk = dk or DomainKnowledgeModel.empty()
    config = config or PipelineConfig()
    dk.validate_metrics(inp.dataset.metric_names)
    if window is None:
        window = detect_window(inp.target_series, config.detection)
    sliced = slice_3n(inp, window)
    result = analyse_window(sliced, dk, config)
    result.report.window = window
    return result
