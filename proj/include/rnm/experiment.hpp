#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rnm/checkpoint.hpp"
#include "rnm/dataset.hpp"
#include "rnm/kb.hpp"
#include "rnm/train.hpp"

namespace rnm::experiment {

// The worlds one repetition trains and evaluates on. Without a test world the
// run is transductive: evaluation happens inside the training world on its
// Test-split patterns.
struct Worlds {
    data::Dataset train_world;
    std::optional<data::Dataset> test_world;
};

using WorldsFactory = std::function<Worlds(int repeat, uint64_t seed)>;

// Standard citation protocol: split per repeat, separate worlds or
// transductive.
WorldsFactory citation_worlds(const data::Dataset& dataset, double train_fraction,
                              double valid_fraction, data::SplitMode mode);

// Following-pairs protocol: an independently generated train and test world
// per repeat, same noise level.
WorldsFactory following_pairs_worlds(int n_images, double predictive_fraction,
                                     data::PairSource source,
                                     const data::FollowingPairsOptions& options);

struct RepeatMetrics {
    int repeat = 0;
    uint64_t seed = 0;
    double train_accuracy = 0.0;
    double val_accuracy = -1.0;
    double test_accuracy = 0.0;
    std::vector<double> per_class_accuracy;  // test split, one per head
    std::vector<double> lambda;
    std::vector<double> train_satisfaction;  // NaN where undefined
    int iterations = 0;
};

struct MetricsReport {
    std::vector<std::string> rule_texts;
    std::vector<std::string> class_names;
    std::vector<RepeatMetrics> repeats;
    std::vector<train::IterationRecord> last_log;  // training log of the last repeat
    std::string config_echo;
    double wall_seconds = 0.0;

    double mean_test_accuracy() const;
    double mean_train_accuracy() const;
};

struct RunOptions {
    int repeats = 3;
    uint64_t seed = 0;
    // grid for selecting a shared fixed lambda when SBR/LTN rules are
    // trainable; chosen by validation accuracy
    std::vector<double> sbr_lambda_grid = {0.01, 0.1, 0.5, 1.0, 2.0, 5.0};
};

struct RunResult {
    MetricsReport report;
    std::vector<checkpoint::Checkpoint> checkpoints;  // one per repeat
};

RunResult run_train(const kb::KnowledgeBase& kb, const WorldsFactory& worlds,
                    const train::TrainConfig& config, const RunOptions& options);

// Evaluation of a trained checkpoint on the given worlds (MAP-based for
// rnm_em/sbr, forward for baseline/ltn). The checkpoint must agree with the
// KB's heads.
RepeatMetrics evaluate_checkpoint(const kb::KnowledgeBase& kb,
                                  const checkpoint::Checkpoint& ckpt, const Worlds& worlds,
                                  const train::TrainConfig& config);

struct SweepPoint {
    double value = 0.0;
    std::string method;
    MetricsReport report;
};

// One train+eval per (value, method, repeat); methods are train-mode names.
// Every value gets its own derived seed; methods share worlds per repeat so
// the comparison is paired.
std::vector<SweepPoint> run_sweep(const kb::KnowledgeBase& kb,
                                  const std::function<WorldsFactory(double value)>& factory,
                                  const std::vector<double>& values,
                                  const std::vector<std::string>& methods,
                                  const train::TrainConfig& config, const RunOptions& options);

// --- report files -----------------------------------------------------------

// metrics.csv / lambdas.csv / training_log.csv / config.echo inside out_dir
// (metrics are byte-deterministic for a fixed spec+seed; the wall clock goes
// to timing.txt).
void write_report(const MetricsReport& report, const std::string& out_dir);
void write_sweep_csv(const std::vector<SweepPoint>& points, const std::string& variable,
                     const std::string& path);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace rnm::experiment
