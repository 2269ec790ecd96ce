#pragma once

#include <string>
#include <vector>

#include "fan/runner.hpp"

namespace fan {

/// Metrics CSV, schema:
/// run,model,epoch,train_mse,id_mse,ood_mse,train_mae,id_mae,ood_mae,
/// params_exact,flops_exact,wall_ms
/// Fixed 9-significant-digit formatting, '\n' endings. wall_ms is written as 0
/// so re-emission is byte-identical; live timings go to the console.
void emit_csv(const std::vector<RunResult>& results, const std::string& path);

enum class PlotKind { FitCurve, LossCurve, Sweep };

/// Standalone SVG. FitCurve: target vs. per-model prediction over the test
/// interval, train interval shaded (1-D tasks only). LossCurve: log10 MSE vs.
/// epoch, train solid / OOD dashed. Sweep: final losses vs. each run's
/// dp_ratio.
void emit_svg_plot(const std::vector<RunResult>& results, PlotKind kind, const std::string& path);

enum class Scale { Desk, Paper };

struct PresetInfo {
    std::string name;
    std::string description;
};

std::vector<PresetInfo> list_presets();

/// Base config used by a preset's first run; starting point for config files.
ExperimentConfig preset_base_config(const std::string& name, Scale scale, std::uint64_t seed);

struct PresetOutcome {
    bool ok = true;                      // false iff some run diverged
    std::string out_dir;
    std::vector<std::string> files;      // emitted artifacts, relative to out_dir
    std::vector<std::string> diverged;   // names of diverged runs
};

/// Executes a preset and writes CSVs, SVGs, and resolved-config echoes into
/// <out_root>/<name>-s<seed>/. Pure function of (preset, scale, seed): re-runs
/// overwrite with byte-identical files.
PresetOutcome run_preset(const std::string& name, Scale scale, std::uint64_t seed,
                         const std::string& out_root);

}  // namespace fan
