"""
Diagnosing a drop in an advertising metric
==========================================

The bundled data set is a synthetic stand-in for an advertising system: three
days of hourly rates from a demand-side platform (``dsp_*``) and an ad
exchange (``adx_*``), plus ``exposure_rate``, the share of ads shown to users.
An incident is planted around hour 20, where the DSP fail rate goes up.

This script walks through the pipeline one stage at a time.
"""

import json
from importlib import resources

from radice.anomaly_window import detect_window, slice_3n
from radice.dataset import load_csv
from radice.discovery import discover
from radice.domain_knowledge import DomainKnowledgeModel
from radice.enhancement import EnhancementLog, enhance
from radice.pipeline import PipelineConfig
from radice.refinement import refine
from radice.subtraction import subtract

data = resources.files("radice") / "data"
inp = load_csv(data / "ads_standin.csv", "exposure_rate")
dk = DomainKnowledgeModel.from_dict(json.loads((data / "ads_standin_dk.json").read_text()))
config = PipelineConfig()
print(f"{len(inp.candidates)} candidate metrics, {inp.dataset.length} samples")

###############################################################################
# Find the drop and cut out a window three times its length, centred on it.

window = detect_window(inp.target_series, config.detection)
sliced = slice_3n(inp, window)
print(f"anomaly window {window.start}-{window.end}, analysing {sliced.dataset.length} samples")

###############################################################################
# Causal discovery on the window alone.  With this few samples many
# contemporaneous edges stay undirected.

discovered = discover(sliced, config.discovery)
print(f"discovered: {len(discovered.directed_edges)} directed, {len(discovered.undirected_edges)} undirected edges")

###############################################################################
# Enhancement adds the expert edges, drops edges that point from a higher
# level to a lower one and orients what is left.

elog = EnhancementLog()
enhanced = enhance(discovered, dk.partial, sliced, config.entropy, elog)
print(f"enhanced: {len(enhanced.directed_edges)} directed edges")
print(f"  level violations dropped: {len(elog.level_violations)}")
print(f"  oriented upwards by level: {len(elog.level_oriented)}")
if elog.entropy is not None:
    print(f"  oriented by entropy: {len(elog.entropy.inserted)}, inconclusive: {len(elog.entropy.inconclusive)}")

###############################################################################
# Refinement scores every candidate against ``exposure_rate`` and applies the
# sign rules, e.g. a fail rate must move against the performance metric.

refined = refine(sliced, dk, config.refinement)
for name, sc in sorted(refined.scores.items(), key=lambda kv: -kv[1].score)[:8]:
    print(f"  {name:<20} score {sc.score:.3f} corr {sc.corr:+.3f}")
print("filtered by sign rule:", ", ".join(refined.sign_rule) or "none")

###############################################################################
# Subtraction keeps the candidates with a causal path to the target and the
# metrics on those paths.

report = subtract(enhanced, refined.root_causes, "exposure_rate", dk.partial)
print("root causes:", ", ".join(report.root_causes))
print("intermediates:", ", ".join(report.intermediates) or "none")
print(report.to_dot())
