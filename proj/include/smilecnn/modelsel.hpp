#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "smilecnn/data.hpp"
#include "smilecnn/optim.hpp"

namespace smilecnn {

/// The four searched hyperparameters; everything else about the architecture
/// is fixed (5x5 convolutions, 32 maps, 2x2 max pooling, ReLU, softmax).
struct HyperParams {
    int num_convs = 1;
    int num_hidden_layers = 1;
    int hidden_units = 100;
    double dropout = 0.5;

    bool operator==(const HyperParams&) const = default;
    NetworkConfig to_config(int input_height, int input_width,
                            int num_classes = 2) const;
};

struct SearchSpace {
    std::vector<int> num_convs{1, 2, 3};
    int default_num_convs = 1;
    std::vector<int> num_hidden_layers{1, 2, 3};
    int default_num_hidden_layers = 1;
    std::vector<int> hidden_units{100, 200, 300, 400};
    int default_hidden_units = 100;
    std::vector<double> dropout{0.0, 0.1, 0.5, 0.7};
    double default_dropout = 0.5;

    void validate() const;  // every default must be a member of its list
    HyperParams defaults() const;
};

/// One-factor-at-a-time enumeration: the all-defaults configuration first,
/// then one configuration per non-default value, parameter by parameter in
/// declaration order. Duplicates are dropped.
std::vector<HyperParams> enumerate_ofat(const SearchSpace& space);

struct RunResult {
    HyperParams params;
    size_t epochs = 0;
    double test_loss = 0.0;
    double test_accuracy = 0.0;
    double final_val_loss = 0.0;
    double median_epoch_seconds = 0.0;
    uint64_t seed = 0;
};

enum class SelectionMetric { TestLoss, ValidationLoss };

struct ChosenValues {
    int num_convs = 0;
    int num_hidden_layers = 0;
    int hidden_units = 0;
    double dropout = 0.0;

    bool operator==(const ChosenValues&) const = default;
    HyperParams as_params() const;
};

/// Per parameter, compares the all-defaults run against that parameter's
/// variant runs and picks the value with the lowest loss. Ties prefer the
/// default value, then the smaller value. Throws if any enumerated run is
/// missing from `results`.
ChosenValues pick_best(const SearchSpace& space,
                       const std::vector<RunResult>& results,
                       SelectionMetric metric = SelectionMetric::TestLoss);

struct SelectionReport {
    SearchSpace space;
    std::vector<RunResult> runs;  // in enumeration order
    ChosenValues chosen;
};

// CSV: num_convs,num_hidden_layers,hidden_units,dropout,test_loss,
// test_accuracy,median_epoch_seconds + a chosen,... footer row. Timing is
// written as "-" unless include_timing is set, keeping the file
// bit-reproducible for a fixed seed.
void write_selection_csv(std::ostream& out, const SelectionReport& report,
                         bool include_timing);

struct SelectionOptions {
    OptimizerConfig opt;      // opt.epochs is the per-run budget
    SelectionMetric metric = SelectionMetric::TestLoss;
    size_t jobs = 1;          // parallel configuration runs
};

/// Trains every enumerated configuration exactly once on the given splits.
/// Per-run seeds derive from derive_seed(master_seed, config ordinal), so
/// results do not depend on scheduling or on later additions to the space.
SelectionReport run_selection(const SearchSpace& space, const Splits& splits,
                              const SelectionOptions& options,
                              uint64_t master_seed);

/// Lower-middle median: for an even count the lower of the two middle
/// elements is returned.
double median_lower(std::vector<double> values);

std::vector<std::pair<HyperParams, double>> timing_summary(
    const std::vector<RunResult>& results);

/// Divide-by-n standard deviation.
double population_stddev(const std::vector<double>& values);

struct RepeatabilityResult {
    std::vector<double> accuracies;  // one per run
    double stddev = 0.0;             // population stddev of the accuracies
};

/// Trains the same configuration n_runs times, re-splitting the data and
/// re-initializing the weights with fresh derived seeds each run.
RepeatabilityResult repeatability(const HyperParams& params,
                                  const Dataset& data, const SplitSpec& ratios,
                                  const OptimizerConfig& opt, size_t n_runs,
                                  uint64_t master_seed);

}  // namespace smilecnn
