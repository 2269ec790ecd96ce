#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fan/datagen.hpp"
#include "fan/layers.hpp"
#include "fan/optim.hpp"

namespace fan {

enum class OptimizerKind { AdamW, Sgdm };

const char* to_string(OptimizerKind k);

/// Model shape independent of task dimensions; the network spec is derived
/// when the task is known.
struct ModelSpec {
    LayerKind kind = LayerKind::Fan;
    int n_hidden = 2;             // hidden layers before the linear head
    std::size_t hidden = 256;
    double dp_ratio = 0.25;
    Activation act = Activation::Gelu;
    bool residual = false;
    std::size_t fsnn_terms = 0;
    std::int64_t match_params = 0;  // if set, pick hidden width to match this count

    NetworkSpec build(std::size_t d_in, std::size_t d_out) const;
    std::string label() const { return to_string(kind); }
};

/// Everything that determines a run.
struct ExperimentConfig {
    std::string name;  // defaults to the model label
    ModelSpec model;
    TaskSpec task;
    SplitSpec split;
    OptimizerKind opt = OptimizerKind::AdamW;
    double lr = 1e-3;
    double weight_decay = 0.0;
    double momentum = 0.9;
    int epochs = 2000;
    int eval_every = 50;
    std::size_t batch_size = 0;  // 0 = full batch
    bool cosine_lr = false;      // cosine decay of lr to 0 over the run
    std::uint64_t seed = 42;
    std::size_t symbolic_train = 600;  // sample counts for symbolic tasks
    std::size_t symbolic_test = 200;

    void validate() const;
    std::string display_name() const { return name.empty() ? model.label() : name; }
};

/// Key=value dump of a fully resolved config; also hashed into RunResult.
std::string describe(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct MetricsRecord {
    int epoch = 0;
    double train_mse = 0, id_mse = 0, ood_mse = 0;
    double train_mae = 0, id_mae = 0, ood_mae = 0;
    double wall_ms = 0;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<MetricsRecord> history;
    CostReport cost;
    Network net;
    bool diverged = false;
    int diverged_epoch = -1;
    std::uint64_t hash = 0;

    const MetricsRecord& final_record() const { return history.back(); }
};

/// Full-batch training for the configured epoch budget; deterministic in the
/// config. A non-finite loss aborts the run and sets the diverged flag,
/// keeping the last finite records.
RunResult train(const ExperimentConfig& cfg);

/// (mse, mae) over the points carrying the given tag.
std::pair<double, double> evaluate(Network& net, const Dataset& ds, Region region);

struct ComparisonResult {
    std::vector<RunResult> runs;       // in config order
    std::vector<std::size_t> ranking;  // indices sorted by final OOD mse
};

/// Trains every config (all must share task and split) and ranks by OOD mse.
ComparisonResult compare(const std::vector<ExperimentConfig>& configs);

struct SweepRow {
    double ratio = 0;
    std::size_t d_p = 0;
    MetricsRecord final_metrics;
    std::int64_t exact_params = 0;
    bool diverged = false;
};

/// One run per d_p ratio; ratios above 0.5 are rejected.
std::vector<SweepRow> sweep_dp(const ExperimentConfig& base, const std::vector<double>& ratios,
                               std::vector<RunResult>* runs_out = nullptr);

struct DepthRow {
    int depth = 0;
    double best_train_mse = 0;
    double best_ood_mse = 0;
    MetricsRecord final_metrics;
    std::int64_t exact_params = 0;
    bool diverged = false;
};

std::vector<DepthRow> depth_study(const ExperimentConfig& base, const std::vector<int>& depths,
                                  bool residual, std::vector<RunResult>* runs_out = nullptr);

struct BenchRow {
    std::size_t d_in = 0, d_out = 0;
    std::int64_t fan_flops = 0, mlp_flops = 0;          // exact per-forward counts, batch 1
    std::int64_t fan_table_flops = 0, mlp_table_flops = 0;
    double fan_ms = 0, mlp_ms = 0;                      // median forward wall time
};

/// Median wall time over `passes` forward evaluations per layer kind per dim.
std::vector<BenchRow> bench_runtime(const std::vector<std::pair<std::size_t, std::size_t>>& dims,
                                    int passes = 100);

}  // namespace fan
