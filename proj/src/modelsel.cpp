#include "smilecnn/modelsel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace smilecnn {

NetworkConfig HyperParams::to_config(int input_height, int input_width,
                                     int num_classes) const {
    NetworkConfig c;
    c.num_convs = num_convs;
    c.num_hidden_layers = num_hidden_layers;
    c.hidden_units = hidden_units;
    c.dropout_p = dropout;
    c.input_height = input_height;
    c.input_width = input_width;
    c.num_classes = num_classes;
    return c;
}

void SearchSpace::validate() const {
    auto member = [](const auto& list, const auto& v) {
        return std::find(list.begin(), list.end(), v) != list.end();
    };
    if (num_convs.empty() || num_hidden_layers.empty() || hidden_units.empty() ||
        dropout.empty())
        throw std::invalid_argument("search space: empty value list");
    if (!member(num_convs, default_num_convs) ||
        !member(num_hidden_layers, default_num_hidden_layers) ||
        !member(hidden_units, default_hidden_units) ||
        !member(dropout, default_dropout))
        throw std::invalid_argument("search space: default not in its value list");
}

HyperParams SearchSpace::defaults() const {
    return {default_num_convs, default_num_hidden_layers, default_hidden_units,
            default_dropout};
}

std::vector<HyperParams> enumerate_ofat(const SearchSpace& space) {
    space.validate();
    std::vector<HyperParams> configs;
    auto push_unique = [&](const HyperParams& hp) {
        if (std::find(configs.begin(), configs.end(), hp) == configs.end())
            configs.push_back(hp);
    };
    const HyperParams base = space.defaults();
    push_unique(base);
    for (int v : space.num_convs) {
        HyperParams hp = base;
        hp.num_convs = v;
        push_unique(hp);
    }
    for (int v : space.num_hidden_layers) {
        HyperParams hp = base;
        hp.num_hidden_layers = v;
        push_unique(hp);
    }
    for (int v : space.hidden_units) {
        HyperParams hp = base;
        hp.hidden_units = v;
        push_unique(hp);
    }
    for (double v : space.dropout) {
        HyperParams hp = base;
        hp.dropout = v;
        push_unique(hp);
    }
    return configs;
}

HyperParams ChosenValues::as_params() const {
    return {num_convs, num_hidden_layers, hidden_units, dropout};
}

namespace {

double metric_of(const RunResult& r, SelectionMetric metric) {
    return metric == SelectionMetric::TestLoss ? r.test_loss : r.final_val_loss;
}

const RunResult* find_run(const std::vector<RunResult>& results,
                          const HyperParams& hp) {
    for (const RunResult& r : results)
        if (r.params == hp) return &r;
    return nullptr;
}

// candidates ordered default-first then ascending, so keeping the first
// strict minimum realizes the tie rule (default, then smaller value)
template <typename T, typename Apply>
T choose(const std::vector<T>& values, T default_value,
         const std::vector<RunResult>& results, const HyperParams& base,
         SelectionMetric metric, Apply apply) {
    std::vector<T> ordered(values.begin(), values.end());
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());
    ordered.erase(std::remove(ordered.begin(), ordered.end(), default_value),
                  ordered.end());
    ordered.insert(ordered.begin(), default_value);
    T best_value = default_value;
    double best_metric = 0.0;
    bool first = true;
    for (const T& v : ordered) {
        HyperParams hp = base;
        apply(hp, v);
        const RunResult* run = find_run(results, hp);
        if (!run)
            throw std::runtime_error(
                "pick_best: incomplete report, missing a run for a one-factor variant");
        const double m = metric_of(*run, metric);
        if (first || m < best_metric) {
            best_metric = m;
            best_value = v;
            first = false;
        }
    }
    return best_value;
}

}  // namespace

ChosenValues pick_best(const SearchSpace& space,
                       const std::vector<RunResult>& results,
                       SelectionMetric metric) {
    space.validate();
    const HyperParams base = space.defaults();
    ChosenValues chosen;
    chosen.num_convs =
        choose(space.num_convs, space.default_num_convs, results, base, metric,
               [](HyperParams& hp, int v) { hp.num_convs = v; });
    chosen.num_hidden_layers =
        choose(space.num_hidden_layers, space.default_num_hidden_layers, results,
               base, metric, [](HyperParams& hp, int v) { hp.num_hidden_layers = v; });
    chosen.hidden_units =
        choose(space.hidden_units, space.default_hidden_units, results, base,
               metric, [](HyperParams& hp, int v) { hp.hidden_units = v; });
    chosen.dropout =
        choose(space.dropout, space.default_dropout, results, base, metric,
               [](HyperParams& hp, double v) { hp.dropout = v; });
    return chosen;
}

SelectionReport run_selection(const SearchSpace& space, const Splits& splits,
                              const SelectionOptions& options,
                              uint64_t master_seed) {
    const auto configs = enumerate_ofat(space);
    const int h = int(splits.train.image_height());
    const int w = int(splits.train.image_width());
    std::vector<RunResult> runs(configs.size());
    std::vector<std::string> errors(configs.size());

    auto run_one = [&](size_t i) {
        const uint64_t seed = derive_seed(master_seed, i);
        const HyperParams& hp = configs[i];
        try {
            Rng init_rng(derive_seed(seed, 0));
            Network net = Network::build(hp.to_config(h, w), init_rng);
            const TrainReport rep =
                train(net, splits.train, splits.val, splits.test, options.opt,
                      derive_seed(seed, 1));
            RunResult r;
            r.params = hp;
            r.epochs = options.opt.epochs;
            r.test_loss = rep.test_loss;
            r.test_accuracy = rep.test_accuracy;
            r.final_val_loss =
                rep.epochs.empty() ? 0.0 : rep.epochs.back().val_loss;
            r.median_epoch_seconds = rep.median_epoch_seconds();
            r.seed = seed;
            runs[i] = r;
        } catch (const DivergenceError& e) {
            char cfg[96];
            std::snprintf(cfg, sizeof(cfg), "convs=%d hidden=%d units=%d dropout=%g",
                          hp.num_convs, hp.num_hidden_layers, hp.hidden_units,
                          hp.dropout);
            errors[i] = std::string(cfg) + ": " + e.what();
        }
    };

    if (options.jobs <= 1) {
        for (size_t i = 0; i < configs.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        const size_t n_workers = std::min(options.jobs, configs.size());
        for (size_t t = 0; t < n_workers; ++t) {
            workers.emplace_back([&]() {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= configs.size()) return;
                    run_one(i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }
    for (const std::string& e : errors)
        if (!e.empty()) throw DivergenceError(e);

    SelectionReport report;
    report.space = space;
    report.runs = std::move(runs);
    report.chosen = pick_best(space, report.runs, options.metric);
    return report;
}

static void write_hp(std::ostream& out, const HyperParams& hp) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%g", hp.num_convs,
                  hp.num_hidden_layers, hp.hidden_units, hp.dropout);
    out << buf;
}

void write_selection_csv(std::ostream& out, const SelectionReport& report,
                         bool include_timing) {
    out << "num_convs,num_hidden_layers,hidden_units,dropout,test_loss,"
           "test_accuracy,median_epoch_seconds\n";
    char buf[96];
    for (const RunResult& r : report.runs) {
        write_hp(out, r.params);
        std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,", r.test_loss,
                      r.test_accuracy);
        out << buf;
        if (include_timing) {
            std::snprintf(buf, sizeof(buf), "%.3f", r.median_epoch_seconds);
            out << buf;
        } else {
            out << "-";
        }
        out << "\n";
    }
    out << "chosen,";
    write_hp(out, report.chosen.as_params());
    out << "\n";
}

double median_lower(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("median_lower: empty input");
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

std::vector<std::pair<HyperParams, double>> timing_summary(
    const std::vector<RunResult>& results) {
    std::vector<std::pair<HyperParams, double>> out;
    out.reserve(results.size());
    for (const RunResult& r : results)
        out.emplace_back(r.params, r.median_epoch_seconds);
    return out;
}

double population_stddev(const std::vector<double>& values) {
    if (values.empty())
        throw std::invalid_argument("population_stddev: empty input");
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= double(values.size());
    return std::sqrt(var);
}

RepeatabilityResult repeatability(const HyperParams& params,
                                  const Dataset& data, const SplitSpec& ratios,
                                  const OptimizerConfig& opt, size_t n_runs,
                                  uint64_t master_seed) {
    if (n_runs < 2)
        throw std::invalid_argument("repeatability: needs at least 2 runs");
    const int h = int(data.image_height());
    const int w = int(data.image_width());
    RepeatabilityResult result;
    result.accuracies.reserve(n_runs);
    for (size_t run = 0; run < n_runs; ++run) {
        const uint64_t seed = derive_seed(master_seed, run);
        SplitSpec spec = ratios;
        spec.seed = derive_seed(seed, 0);
        const Splits splits = split(data, spec);
        Rng init_rng(derive_seed(seed, 1));
        Network net = Network::build(params.to_config(h, w), init_rng);
        try {
            const TrainReport rep = train(net, splits.train, splits.val,
                                          splits.test, opt, derive_seed(seed, 2));
            result.accuracies.push_back(rep.test_accuracy);
        } catch (const DivergenceError& e) {
            throw DivergenceError("run " + std::to_string(run + 1) + ": " +
                                  e.what());
        }
    }
    result.stddev = population_stddev(result.accuracies);
    return result;
}

}  // namespace smilecnn
