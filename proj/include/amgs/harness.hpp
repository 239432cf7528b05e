// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "amgs/config.hpp"
#include "amgs/corpus.hpp"
#include "amgs/episode.hpp"
#include "amgs/meta.hpp"

namespace amgs {

struct EpochRecord {
    int epoch = 0;
    double train_acc = 0.0;  // fresh train-split episodes (seen classes)
    double val_acc = 0.0;    // validation episodes (unseen classes)
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    double best_val_acc = 0.0;
    double test_mean = 0.0;
    std::vector<double> test_accuracies;
    ModelParams best_psi;

    /// Seen minus unseen accuracy at the best epoch.
    double generalization_gap() const;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<SeedResult> seeds;
    double mean_acc = 0.0;
    double std_acc = 0.0;    // sample standard deviation across seeds
};

/// Tracks the best validation score; `update` returns true on a strict
/// improvement. should_stop() once `patience` epochs pass without one.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    bool update(int epoch, double score);
    bool should_stop() const noexcept { return since_best_ >= patience_; }
    int best_epoch() const noexcept { return best_epoch_; }
    double best_score() const noexcept { return best_; }

private:
    int patience_;
    int best_epoch_ = 0;
    int since_best_ = 0;
    double best_ = -1.0;
    bool seen_ = false;
};

/// Called once per meta step with (seed, epoch, report).
using StepObserver = std::function<void(std::uint64_t, int, const StepReport&)>;

/// Meta-trains one model per seed with early stopping on validation
/// accuracy, restores the best initialization and evaluates it on
/// `test_episodes` test-split episodes.
RunResult run_training(const ExperimentConfig& cfg, const Corpus& corpus, const ClassSplit& split,
                       const StepObserver& observer = {});

SeedResult train_seed(const ExperimentConfig& cfg, const Corpus& corpus, const ClassSplit& split,
                      std::uint64_t seed, const StepObserver& observer = {});

/// Mean meta-test accuracy of psi over `count` episodes of `part`.
std::vector<double> evaluate(const ExperimentConfig& cfg, const ModelParams& psi, const Corpus& corpus,
                             const ClassSplit& split, SplitPart part, int count, std::uint64_t stream_seed);

/// Loads corpus and split from the config's paths.
std::pair<Corpus, ClassSplit> load_data(const ExperimentConfig& cfg);

ModelDims model_dims(const ExperimentConfig& cfg, const Corpus& corpus);

/// Named grid: ordered (config key, values) pairs.
using Grid = std::vector<std::pair<std::string, std::vector<nlohmann::json>>>;

Grid parse_grid(const std::string& json_text);
/// table2 (meta-learner strategies), table3 (MTP train/test), table4
/// (masking), table5 (rho). Throws ValidationError for other names.
Grid grid_preset(const std::string& name);

struct AblationRow {
    std::vector<nlohmann::json> point;  // one value per grid key
    RunResult result;
};

struct AblationResult {
    std::vector<std::string> keys;
    std::vector<AblationRow> rows;
};

/// Expands the Cartesian product of the grid (first key varies slowest),
/// validating every point before the first run.
std::vector<std::pair<std::vector<nlohmann::json>, ExperimentConfig>> expand_grid(const ExperimentConfig& base,
                                                                                   const Grid& grid);

AblationResult run_ablation(const ExperimentConfig& base, const Grid& grid, const Corpus& corpus,
                            const ClassSplit& split, const StepObserver& observer = {});

// Output files.
std::string format_double(double x);
void write_step_jsonl(std::ostream& out, std::uint64_t seed, int epoch, const StepReport& report);
void write_epochs_csv(std::ostream& out, const RunResult& run);
void write_summary_header(std::ostream& out, const std::vector<std::string>& grid_keys = {});
void write_summary_row(std::ostream& out, const RunResult& run, const std::vector<nlohmann::json>& point = {});
void write_ablation_csv(std::ostream& out, const AblationResult& ablation);

struct SyntheticSpec {
    int num_classes = 45;
    int docs_per_class = 40;
    int tokens_per_class = 40;
    double overlap = 0.5;
    int min_len = 6;
    int max_len = 16;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Writes a JSONL corpus in which class k draws each token from a shared
/// pool with probability `overlap` and from its own private pool otherwise.
void gen_synthetic(const SyntheticSpec& spec, std::ostream& out);
void gen_synthetic(const SyntheticSpec& spec, const std::filesystem::path& path);
std::string synthetic_class_name(int k);

/// Split file with the first `train` classes for training, the next `val`
/// for validation and the next `test` for testing.
void write_split_file(const std::filesystem::path& path, const std::vector<std::string>& train,
                      const std::vector<std::string>& val, const std::vector<std::string>& test);

/// CSV rows (rep_0..rep_{d-1}, local_label, class_name) for every query
/// example, encoded at psi after meta-test fine-tuning on the support set.
void export_embeddings(const ModelParams& psi, const Episode& episode, const Corpus& corpus, int fine_tune_steps,
                       bool use_mtp, double alpha, double rho, const MaskingConfig& masking, Rng& rng,
                       std::ostream& out);

}  // namespace amgs
