#include "rnm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rnm/infer.hpp"

namespace rnm::experiment {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    // shortest representation that round-trips
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

double MetricsReport::mean_test_accuracy() const {
    double sum = 0.0;
    for (const auto& r : repeats) sum += r.test_accuracy;
    return repeats.empty() ? 0.0 : sum / static_cast<double>(repeats.size());
}

double MetricsReport::mean_train_accuracy() const {
    double sum = 0.0;
    for (const auto& r : repeats) sum += r.train_accuracy;
    return repeats.empty() ? 0.0 : sum / static_cast<double>(repeats.size());
}

WorldsFactory citation_worlds(const data::Dataset& dataset, double train_fraction,
                              double valid_fraction, data::SplitMode mode) {
    return [=](int, uint64_t seed) {
        data::Dataset split =
            data::split_dataset(dataset, train_fraction, valid_fraction, mode, seed);
        Worlds worlds;
        if (mode == data::SplitMode::SeparateWorlds) {
            std::vector<bool> train_side(split.size()), test_side(split.size());
            for (size_t p = 0; p < split.size(); ++p) {
                train_side[p] = split.split[p] != data::Split::Test;
                test_side[p] = split.split[p] == data::Split::Test;
            }
            worlds.train_world = data::subset_dataset(split, train_side);
            worlds.test_world = data::subset_dataset(split, test_side);
        } else {
            worlds.train_world = std::move(split);
        }
        return worlds;
    };
}

WorldsFactory following_pairs_worlds(int n_images, double predictive_fraction,
                                     data::PairSource source,
                                     const data::FollowingPairsOptions& options) {
    return [=](int, uint64_t seed) {
        Worlds worlds;
        worlds.train_world = data::generate_following_pairs(
            n_images, {predictive_fraction, seed}, source, options);
        worlds.test_world = data::generate_following_pairs(
            n_images, {predictive_fraction, seed + 0x517CC1B727220A95ull}, source, options);
        for (auto& split : worlds.test_world->split) split = data::Split::Test;
        for (auto& row : worlds.test_world->y_observed)
            std::fill(row.begin(), row.end(), int8_t{0});
        return worlds;
    };
}

namespace {

bool map_based_eval(train::TrainMode mode) {
    return mode == train::TrainMode::RnmEm || mode == train::TrainMode::Sbr;
}

struct EvalOutcome {
    double accuracy = 0.0;
    std::vector<double> per_class;
};

// Accuracy over the Test-split patterns of `world`, with per-head breakdown.
EvalOutcome evaluate_world(const kb::KnowledgeBase& kb, const net::Mlp& mlp,
                       const std::vector<double>& lambda, const data::Dataset& world,
                       const train::TrainConfig& config, bool use_map) {
    std::vector<int> test_patterns = train::patterns_of_split(world, data::Split::Test);
    EvalOutcome outcome;
    if (test_patterns.empty()) return outcome;
    size_t n_classes = static_cast<size_t>(world.n_classes);
    std::vector<double> class_correct(n_classes, 0.0), class_total(n_classes, 0.0);

    auto tally = [&](int pattern, const std::vector<int>& predicted_row) {
        int truth = world.label_of(pattern);
        bool all = true;
        for (size_t c = 0; c < n_classes; ++c)
            all &= predicted_row[c] == world.y[pattern][c];
        if (world.one_label && truth >= 0) {
            class_total[truth] += 1;
            if (all) class_correct[truth] += 1;
        }
        return all;
    };

    size_t correct = 0;
    if (use_map) {
        grounding::GroundingOptions gopt;
        gopt.prune = config.prune;
        grounding::GroundNetwork network = grounding::ground_network(kb, world, gopt);
        std::vector<int> all_patterns(world.size());
        for (size_t p = 0; p < world.size(); ++p) all_patterns[p] = static_cast<int>(p);
        std::vector<double> f = train::forward_patterns(mlp, world, all_patterns);
        std::vector<double> f_atom =
            infer::atom_scores(network.table, f, network.table.heads.size());
        infer::MapConfig map_config = config.map;
        map_config.tnorm = config.tnorm;
        map_config.seed = config.seed ^ 0xE7037ED1A0B428DBull;
        grounding::World observed = grounding::observed_world(network.table, world);
        grounding::World result =
            infer::map_inference(network, f_atom, lambda, observed, map_config).world;
        for (int p : test_patterns) {
            std::vector<int> row(n_classes);
            for (size_t c = 0; c < n_classes; ++c)
                row[c] = result.values[network.table.groups[p][c]];
            correct += tally(p, row) ? 1 : 0;
        }
    } else {
        std::vector<double> f = train::forward_patterns(mlp, world, test_patterns);
        for (size_t r = 0; r < test_patterns.size(); ++r) {
            const double* row_f = &f[r * n_classes];
            std::vector<int> row(n_classes, 0);
            if (world.one_label) {
                int best = 0;
                for (size_t c = 1; c < n_classes; ++c)
                    if (row_f[c] > row_f[best]) best = static_cast<int>(c);
                row[best] = 1;
            } else {
                for (size_t c = 0; c < n_classes; ++c) row[c] = row_f[c] >= 0.0 ? 1 : 0;
            }
            correct += tally(test_patterns[r], row) ? 1 : 0;
        }
    }
    outcome.accuracy = static_cast<double>(correct) / static_cast<double>(test_patterns.size());
    for (size_t c = 0; c < n_classes; ++c)
        outcome.per_class.push_back(class_total[c] > 0 ? class_correct[c] / class_total[c]
                                                       : std::nan(""));
    return outcome;
}

kb::KnowledgeBase with_fixed_lambda(const kb::KnowledgeBase& kb, double value) {
    kb::KnowledgeBase fixed = kb;
    for (auto& formula : fixed.formulas) {
        formula.weight_mode = kb::WeightMode::Fixed;
        formula.fixed_weight = value;
    }
    return fixed;
}

train::TrainState train_once(const kb::KnowledgeBase& kb, const data::Dataset& world,
                             const train::TrainConfig& config,
                             const std::vector<double>& sbr_grid, double* chosen_grid) {
    if (config.mode == train::TrainMode::Sbr || config.mode == train::TrainMode::Ltn) {
        bool any_trainable = false;
        for (const auto& formula : kb.formulas)
            any_trainable |= formula.weight_mode == kb::WeightMode::Trainable;
        if (!any_trainable) return train::sbr_ltn_train(kb, world, config);
        // validation-selected shared weight, as the paper's SBR protocol
        bool has_val = !train::patterns_of_split(world, data::Split::Valid).empty();
        if (!has_val)
            throw std::runtime_error(
                "SBR/LTN with trainable rules needs a validation split to select lambda");
        double best_val = -1.0;
        train::TrainState best_state;
        for (double value : sbr_grid) {
            train::TrainState state =
                train::sbr_ltn_train(with_fixed_lambda(kb, value), world, config);
            double val = state.log.empty() ? 0.0 : state.log.back().val_accuracy;
            if (val > best_val) {
                best_val = val;
                best_state = std::move(state);
                if (chosen_grid) *chosen_grid = value;
            }
        }
        return best_state;
    }
    return train::em_train(kb, world, config);
}

std::string echo_config(const kb::KnowledgeBase& kb, const train::TrainConfig& config,
                        const RunOptions& options) {
    std::ostringstream out;
    out << "mode = " << train::to_string(config.mode) << "\n";
    out << "likelihood = "
        << (config.likelihood == train::LikelihoodMode::PL
                ? "pl"
                : config.likelihood == train::LikelihoodMode::PPL ? "ppl" : "auto")
        << "\n";
    out << "tnorm = " << fuzzy::to_string(config.tnorm) << "\n";
    out << "epsilon = " << format_double(config.epsilon) << "\n";
    out << "max_iterations = " << config.max_iterations << "\n";
    out << "lambda_tol = " << format_double(config.lambda_tol) << "\n";
    out << "val_patience = " << config.val_patience << "\n";
    out << "prune = " << (config.prune ? "true" : "false") << "\n";
    out << "seed = " << options.seed << "\n";
    out << "repeats = " << options.repeats << "\n";
    out << "[optimizer]\n";
    out << "lr = " << format_double(config.optimizer.lr) << "\n";
    out << "epochs_per_step = " << config.optimizer.epochs_per_step << "\n";
    out << "batch_size = " << config.optimizer.batch_size << "\n";
    out << "[net]\n";
    out << "hidden =";
    for (int h : config.net.hidden_dims) out << " " << h;
    out << "\n";
    out << "activation = " << net::to_string(config.net.activation) << "\n";
    out << "[map]\n";
    out << "steps = " << config.map.steps << "\n";
    out << "lr = " << format_double(config.map.lr) << "\n";
    out << "restarts = " << config.map.restarts << "\n";
    out << "[rules]\n";
    for (const auto& formula : kb.formulas)
        out << "rule " << formula.id << " = " << formula.source_text << "\n";
    return out.str();
}

}  // namespace

RunResult run_train(const kb::KnowledgeBase& kb, const WorldsFactory& worlds,
                    const train::TrainConfig& config, const RunOptions& options) {
    auto start = std::chrono::steady_clock::now();
    RunResult result;
    for (const auto& formula : kb.formulas)
        result.report.rule_texts.push_back(formula.source_text);
    result.report.config_echo = echo_config(kb, config, options);

    for (int repeat = 0; repeat < options.repeats; ++repeat) {
        uint64_t seed = options.seed + 1000ull * static_cast<uint64_t>(repeat);
        Worlds w = worlds(repeat, seed);
        if (result.report.class_names.empty())
            result.report.class_names = w.train_world.class_names;
        train::TrainConfig run_config = config;
        run_config.seed = seed;

        double chosen_grid = std::nan("");
        train::TrainState state =
            train_once(kb, w.train_world, run_config, options.sbr_lambda_grid, &chosen_grid);

        RepeatMetrics metrics;
        metrics.repeat = repeat;
        metrics.seed = seed;
        metrics.iterations = state.iterations;
        metrics.lambda = state.lambda;
        metrics.train_accuracy = train::forward_accuracy(
            state.mlp, w.train_world, train::supervised_patterns(w.train_world));
        if (!state.log.empty()) {
            metrics.val_accuracy = state.log.back().val_accuracy;
            metrics.train_satisfaction = state.log.back().avg_sat;
        }
        const data::Dataset& eval_world = w.test_world ? *w.test_world : w.train_world;
        EvalOutcome outcome = evaluate_world(kb, state.mlp, state.lambda, eval_world, run_config,
                                         map_based_eval(config.mode));
        metrics.test_accuracy = outcome.accuracy;
        metrics.per_class_accuracy = outcome.per_class;
        result.report.repeats.push_back(std::move(metrics));
        result.report.last_log = state.log;

        checkpoint::Checkpoint ckpt;
        ckpt.mlp = std::move(state.mlp);
        ckpt.adam = std::move(state.adam);
        ckpt.lambda = state.lambda;
        ckpt.one_label = w.train_world.one_label;
        ckpt.mode = train::to_string(config.mode);
        ckpt.tnorm = fuzzy::to_string(config.tnorm);
        for (const auto& name : w.train_world.class_names) ckpt.head_names.push_back(name);
        result.checkpoints.push_back(std::move(ckpt));
    }
    result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

RepeatMetrics evaluate_checkpoint(const kb::KnowledgeBase& kb,
                                  const checkpoint::Checkpoint& ckpt, const Worlds& worlds,
                                  const train::TrainConfig& config) {
    const data::Dataset& eval_world =
        worlds.test_world ? *worlds.test_world : worlds.train_world;
    if (static_cast<int>(ckpt.head_names.size()) != eval_world.n_classes)
        throw std::runtime_error("checkpoint has " + std::to_string(ckpt.head_names.size()) +
                                 " heads but the dataset has " +
                                 std::to_string(eval_world.n_classes) + " classes");
    if (ckpt.mlp.input_dim() != static_cast<int>(eval_world.feature_dim))
        throw std::runtime_error("checkpoint input dim does not match the dataset");
    RepeatMetrics metrics;
    train::TrainMode mode = train::mode_from_string(ckpt.mode);
    EvalOutcome outcome =
        evaluate_world(kb, ckpt.mlp, ckpt.lambda, eval_world, config, map_based_eval(mode));
    metrics.test_accuracy = outcome.accuracy;
    metrics.per_class_accuracy = outcome.per_class;
    metrics.lambda = ckpt.lambda;
    return metrics;
}

std::vector<SweepPoint> run_sweep(const kb::KnowledgeBase& kb,
                                  const std::function<WorldsFactory(double value)>& factory,
                                  const std::vector<double>& values,
                                  const std::vector<std::string>& methods,
                                  const train::TrainConfig& config, const RunOptions& options) {
    std::vector<SweepPoint> points;
    for (size_t vi = 0; vi < values.size(); ++vi) {
        WorldsFactory worlds = factory(values[vi]);
        RunOptions point_options = options;
        point_options.seed = options.seed + 100000ull * static_cast<uint64_t>(vi);
        for (const auto& method : methods) {
            train::TrainConfig method_config = config;
            method_config.mode = train::mode_from_string(method);
            SweepPoint point;
            point.value = values[vi];
            point.method = method;
            point.report = run_train(kb, worlds, method_config, point_options).report;
            points.push_back(std::move(point));
        }
    }
    return points;
}

void write_report(const MetricsReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/metrics.csv");
        out << "repeat,split,metric,value\n";
        auto row = [&](const std::string& repeat, const std::string& split,
                       const std::string& metric, double value) {
            out << repeat << ',' << split << ',' << metric << ',' << format_double(value)
                << '\n';
        };
        for (const auto& r : report.repeats) {
            std::string id = std::to_string(r.repeat);
            row(id, "train", "accuracy", r.train_accuracy);
            if (r.val_accuracy >= 0) row(id, "valid", "accuracy", r.val_accuracy);
            row(id, "test", "accuracy", r.test_accuracy);
            for (size_t c = 0; c < r.per_class_accuracy.size(); ++c)
                row(id, "test", "accuracy_" + report.class_names[c],
                    r.per_class_accuracy[c]);
        }
        row("mean", "train", "accuracy", report.mean_train_accuracy());
        row("mean", "test", "accuracy", report.mean_test_accuracy());
    }
    {
        std::ofstream out(out_dir + "/lambdas.csv");
        out << "repeat,rule,lambda,train_satisfaction,text\n";
        for (const auto& r : report.repeats)
            for (size_t c = 0; c < r.lambda.size(); ++c) {
                out << r.repeat << ',' << c << ',' << format_double(r.lambda[c]) << ','
                    << format_double(c < r.train_satisfaction.size() ? r.train_satisfaction[c]
                                                                     : std::nan(""))
                    << ',' << '"' << report.rule_texts[c] << '"' << '\n';
            }
    }
    {
        std::ofstream out(out_dir + "/training_log.csv");
        out << "iteration,train_loss,train_accuracy,val_accuracy";
        size_t n_rules = report.rule_texts.size();
        for (size_t c = 0; c < n_rules; ++c) out << ",lambda_" << c;
        for (size_t c = 0; c < n_rules; ++c) out << ",avg_sat_" << c;
        out << '\n';
        for (const auto& rec : report.last_log) {
            out << rec.iteration << ',' << format_double(rec.train_loss) << ','
                << format_double(rec.train_accuracy) << ','
                << format_double(rec.val_accuracy);
            for (size_t c = 0; c < n_rules; ++c)
                out << ',' << format_double(c < rec.lambda.size() ? rec.lambda[c] : 0.0);
            for (size_t c = 0; c < n_rules; ++c)
                out << ','
                    << format_double(c < rec.avg_sat.size() ? rec.avg_sat[c] : std::nan(""));
            out << '\n';
        }
    }
    {
        std::ofstream out(out_dir + "/config.echo");
        out << report.config_echo;
    }
    {
        std::ofstream out(out_dir + "/timing.txt");
        out << "wall_seconds " << report.wall_seconds << "\n";
    }
}

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::string& variable,
                     const std::string& path) {
    std::ofstream out(path);
    out << variable << ",method,repeat,test_accuracy\n";
    for (const auto& point : points) {
        for (const auto& r : point.report.repeats)
            out << format_double(point.value) << ',' << point.method << ',' << r.repeat << ','
                << format_double(r.test_accuracy) << '\n';
        out << format_double(point.value) << ',' << point.method << ",mean,"
            << format_double(point.report.mean_test_accuracy()) << '\n';
    }
}

}  // namespace rnm::experiment
