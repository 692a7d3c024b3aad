#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "smilecnn/data.hpp"
#include "smilecnn/errors.hpp"
#include "smilecnn/nn.hpp"

namespace smilecnn {

struct OptimizerConfig {
    double alpha = 0.01;     // learning rate
    double mu = 0.9;         // classical momentum coefficient
    size_t batch_size = 500;
    size_t epochs = 1;
};

/// Mean cross-entropy: J = (1/m) sum_i sum_c -y log(h), log argument clamped
/// to >= 1e-12 so saturated predictions never produce -inf.
double cross_entropy_loss(const Tensor& predictions, const Tensor& targets);

/// Fraction of rows whose argmax matches the label; ties go to the lowest
/// class index.
double accuracy(const Tensor& predictions, const std::vector<int>& labels);

/// theta <- theta - alpha * grad, simultaneously for all parameters. Throws
/// DivergenceError naming the parameter on any non-finite gradient.
void batch_gd_step(const std::vector<Tensor*>& params,
                   const std::vector<Tensor>& grads, double alpha,
                   const std::vector<std::string>& names = {});

/// Per-parameter momentum buffers, zero-initialized.
struct Velocity {
    std::vector<Tensor> v;
    static Velocity zeros_like(const std::vector<Tensor*>& params);
};

/// Classical momentum: v <- mu v - alpha grad; theta <- theta + v.
void sgd_update(const std::vector<Tensor*>& params, Velocity& velocity,
                const std::vector<Tensor>& grads, double alpha, double mu,
                const std::vector<std::string>& names = {});

/// Shuffled index batches covering 0..n-1 exactly once; the final partial
/// batch is included.
std::vector<std::vector<size_t>> make_epoch_batches(size_t n,
                                                    size_t batch_size,
                                                    Rng& rng);

struct Batch {
    Tensor inputs;            // [n, H, W]
    Tensor targets;           // [n, classes] one-hot
    std::vector<int> labels;
};

Batch make_batch(const Dataset& data, const std::vector<size_t>& indices);
Batch make_batch(const Dataset& data);

/// One pass over the training set: shuffle, then per mini-batch forward,
/// backward and momentum update. Returns the mean epoch loss (batch losses
/// weighted by batch size).
double sgd_epoch(Network& net, const Dataset& train,
                 const OptimizerConfig& cfg, Velocity& velocity, Rng& rng);

struct EpochRow {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochRow> epochs;
    double test_loss = 0.0;
    double test_accuracy = 0.0;
    uint64_t seed = 0;

    double median_epoch_seconds() const;
};

/// Runs cfg.epochs training epochs, recording training loss, validation loss
/// and wall-clock seconds per epoch; test loss and accuracy are computed once
/// at the end. The validation and test sets are never trained on. `on_epoch`
/// (optional) fires after each epoch so callers can stream partial reports.
TrainReport train(Network& net, const Dataset& train_set, const Dataset& val_set,
                  const Dataset& test_set, const OptimizerConfig& cfg,
                  uint64_t seed,
                  const std::function<void(const EpochRow&)>& on_epoch = {});

/// Loss and accuracy of the network on a dataset (eval mode, batched).
std::pair<double, double> evaluate(const Network& net, const Dataset& data,
                                   size_t batch_size = 500);

// CSV: header epoch,train_loss,val_loss,epoch_seconds; one row per epoch;
// trailing summary line test,<loss>,<accuracy>,<median_epoch_seconds>.
// With include_timing false the seconds fields are written as "-" so outputs
// are bit-reproducible.
void write_train_report_csv(std::ostream& out, const TrainReport& report,
                            bool include_timing);

/// Central-difference gradient oracle: perturbs every parameter by +-epsilon
/// with the dropout masks frozen from one traced forward pass and returns the
/// worst relative error max(|a - n| / max(1e-8, |a| + |n|)).
double grad_check(Network& net, const Tensor& inputs, const Tensor& targets,
                  double epsilon, Rng& rng);

}  // namespace smilecnn
