#include "smilecnn/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace smilecnn {

double cross_entropy_loss(const Tensor& predictions, const Tensor& targets) {
    if (predictions.shape() != targets.shape() || predictions.rank() != 2)
        throw std::invalid_argument("cross_entropy_loss: shape mismatch");
    const size_t m = predictions.dim(0);
    double total = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (targets[i] != 0.0)
            total -= targets[i] * std::log(std::max(predictions[i], 1e-12));
    }
    return total / double(m);
}

double accuracy(const Tensor& predictions, const std::vector<int>& labels) {
    if (predictions.rank() != 2 || predictions.dim(0) == 0)
        throw std::invalid_argument("accuracy: empty batch");
    if (predictions.dim(0) != labels.size())
        throw std::invalid_argument("accuracy: label count mismatch");
    const size_t m = predictions.dim(0), c = predictions.dim(1);
    size_t correct = 0;
    for (size_t n = 0; n < m; ++n) {
        const double* row = predictions.data() + n * c;
        size_t best = 0;
        for (size_t k = 1; k < c; ++k)
            if (row[k] > row[best]) best = k;  // strict: ties keep the lowest index
        if (int(best) == labels[n]) ++correct;
    }
    return double(correct) / double(m);
}

static void check_finite(const Tensor& grad, const std::string& name) {
    for (size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i]))
            throw DivergenceError("non-finite gradient in " +
                                  (name.empty() ? std::string("parameter") : name));
    }
}

void batch_gd_step(const std::vector<Tensor*>& params,
                   const std::vector<Tensor>& grads, double alpha,
                   const std::vector<std::string>& names) {
    if (params.size() != grads.size())
        throw std::invalid_argument("batch_gd_step: parameter/gradient count mismatch");
    for (size_t p = 0; p < params.size(); ++p)
        check_finite(grads[p], p < names.size() ? names[p] : "");
    for (size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        const Tensor& g = grads[p];
        for (size_t i = 0; i < t.size(); ++i) t[i] -= alpha * g[i];
    }
}

Velocity Velocity::zeros_like(const std::vector<Tensor*>& params) {
    Velocity vel;
    vel.v.reserve(params.size());
    for (const Tensor* t : params) vel.v.push_back(Tensor::zeros(t->shape()));
    return vel;
}

void sgd_update(const std::vector<Tensor*>& params, Velocity& velocity,
                const std::vector<Tensor>& grads, double alpha, double mu,
                const std::vector<std::string>& names) {
    if (params.size() != grads.size() || params.size() != velocity.v.size())
        throw std::invalid_argument("sgd_update: parameter/gradient count mismatch");
    for (size_t p = 0; p < params.size(); ++p)
        check_finite(grads[p], p < names.size() ? names[p] : "");
    for (size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        Tensor& v = velocity.v[p];
        const Tensor& g = grads[p];
        for (size_t i = 0; i < t.size(); ++i) {
            v[i] = mu * v[i] - alpha * g[i];
            t[i] += v[i];
        }
    }
}

std::vector<std::vector<size_t>> make_epoch_batches(size_t n, size_t batch_size,
                                                    Rng& rng) {
    if (batch_size == 0 || batch_size > n)
        throw std::invalid_argument("make_epoch_batches: batch_size must be in 1..n");
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    rng.shuffle(order);
    std::vector<std::vector<size_t>> batches;
    for (size_t start = 0; start < n; start += batch_size) {
        const size_t end = std::min(start + batch_size, n);
        batches.emplace_back(order.begin() + long(start), order.begin() + long(end));
    }
    return batches;
}

Batch make_batch(const Dataset& data, const std::vector<size_t>& indices) {
    if (indices.empty())
        throw std::invalid_argument("make_batch: empty index set");
    const size_t h = data.image_height(), w = data.image_width();
    Batch b;
    b.inputs = Tensor::zeros({indices.size(), h, w});
    b.targets = Tensor::zeros({indices.size(), size_t(Dataset::kNumClasses)});
    b.labels.reserve(indices.size());
    for (size_t n = 0; n < indices.size(); ++n) {
        const Sample& s = data[indices[n]];
        std::copy(s.image.data(), s.image.data() + h * w,
                  b.inputs.data() + n * h * w);
        const int label = data.label(indices[n]);
        b.targets[n * Dataset::kNumClasses + size_t(label)] = 1.0;
        b.labels.push_back(label);
    }
    return b;
}

Batch make_batch(const Dataset& data) {
    std::vector<size_t> all(data.size());
    std::iota(all.begin(), all.end(), size_t{0});
    return make_batch(data, all);
}

double sgd_epoch(Network& net, const Dataset& train,
                 const OptimizerConfig& cfg, Velocity& velocity, Rng& rng) {
    if (train.empty())
        throw std::invalid_argument("sgd_epoch: empty training set");
    if (cfg.batch_size > train.size())
        throw std::invalid_argument("sgd_epoch: batch_size exceeds training-set size");
    const auto batches = make_epoch_batches(train.size(), cfg.batch_size, rng);
    const auto params = net.params();
    const auto names = net.param_names();
    double loss_sum = 0.0;
    size_t batch_index = 0;
    for (const auto& idx : batches) {
        const Batch b = make_batch(train, idx);
        ForwardTrace trace;
        const Tensor probs = net.forward(b.inputs, Mode::Train, &rng, &trace);
        const double loss = cross_entropy_loss(probs, b.targets);
        if (!std::isfinite(loss))
            throw DivergenceError("non-finite loss in batch " +
                                  std::to_string(batch_index));
        loss_sum += loss * double(idx.size());
        const auto grads = net.backward(trace, b.targets);
        sgd_update(params, velocity, grads, cfg.alpha, cfg.mu, names);
        ++batch_index;
    }
    return loss_sum / double(train.size());
}

std::pair<double, double> evaluate(const Network& net, const Dataset& data,
                                   size_t batch_size) {
    if (data.empty())
        throw std::invalid_argument("evaluate: empty dataset");
    double loss_sum = 0.0;
    size_t correct = 0;
    std::vector<size_t> idx;
    for (size_t start = 0; start < data.size(); start += batch_size) {
        const size_t end = std::min(start + batch_size, data.size());
        idx.resize(end - start);
        std::iota(idx.begin(), idx.end(), start);
        const Batch b = make_batch(data, idx);
        const Tensor probs = net.forward(b.inputs, Mode::Eval, nullptr);
        loss_sum += cross_entropy_loss(probs, b.targets) * double(idx.size());
        const size_t classes = probs.dim(1);
        for (size_t n = 0; n < idx.size(); ++n) {
            const double* row = probs.data() + n * classes;
            size_t best = 0;
            for (size_t k = 1; k < classes; ++k)
                if (row[k] > row[best]) best = k;
            if (int(best) == b.labels[n]) ++correct;
        }
    }
    return {loss_sum / double(data.size()),
            double(correct) / double(data.size())};
}

double TrainReport::median_epoch_seconds() const {
    if (epochs.empty()) return 0.0;
    std::vector<double> secs;
    secs.reserve(epochs.size());
    for (const auto& e : epochs) secs.push_back(e.seconds);
    std::sort(secs.begin(), secs.end());
    return secs[(secs.size() - 1) / 2];
}

TrainReport train(Network& net, const Dataset& train_set, const Dataset& val_set,
                  const Dataset& test_set, const OptimizerConfig& cfg,
                  uint64_t seed,
                  const std::function<void(const EpochRow&)>& on_epoch) {
    if (train_set.empty() || val_set.empty() || test_set.empty())
        throw std::invalid_argument("train: empty split");
    Rng rng(seed);
    Velocity velocity = Velocity::zeros_like(net.params());
    TrainReport report;
    report.seed = seed;
    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        EpochRow row;
        try {
            row.train_loss = sgd_epoch(net, train_set, cfg, velocity, rng);
        } catch (const DivergenceError& e) {
            throw DivergenceError("epoch " + std::to_string(epoch + 1) + ": " +
                                  e.what());
        }
        row.val_loss = evaluate(net, val_set).first;
        row.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        report.epochs.push_back(row);
        if (on_epoch) on_epoch(row);
    }
    const auto [test_loss, test_acc] = evaluate(net, test_set);
    report.test_loss = test_loss;
    report.test_accuracy = test_acc;
    return report;
}

static void write_double(std::ostream& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out << buf;
}

static void write_seconds(std::ostream& out, double v, bool include_timing) {
    if (!include_timing) {
        out << "-";
        return;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    out << buf;
}

void write_train_report_csv(std::ostream& out, const TrainReport& report,
                            bool include_timing) {
    out << "epoch,train_loss,val_loss,epoch_seconds\n";
    for (size_t i = 0; i < report.epochs.size(); ++i) {
        const EpochRow& r = report.epochs[i];
        out << (i + 1) << ",";
        write_double(out, r.train_loss);
        out << ",";
        write_double(out, r.val_loss);
        out << ",";
        write_seconds(out, r.seconds, include_timing);
        out << "\n";
    }
    out << "test,";
    write_double(out, report.test_loss);
    out << ",";
    write_double(out, report.test_accuracy);
    out << ",";
    write_seconds(out, report.median_epoch_seconds(), include_timing);
    out << "\n";
}

double grad_check(Network& net, const Tensor& inputs, const Tensor& targets,
                  double epsilon, Rng& rng) {
    ForwardTrace trace;
    net.forward(inputs, Mode::Train, &rng, &trace);
    const auto analytic = net.backward(trace, targets);
    const auto params = net.params();
    double worst = 0.0;
    for (size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        for (size_t i = 0; i < t.size(); ++i) {
            const double saved = t[i];
            t[i] = saved + epsilon;
            const double jp =
                cross_entropy_loss(net.replay_forward(inputs, trace), targets);
            t[i] = saved - epsilon;
            const double jm =
                cross_entropy_loss(net.replay_forward(inputs, trace), targets);
            t[i] = saved;
            const double numeric = (jp - jm) / (2.0 * epsilon);
            const double a = analytic[p][i];
            const double rel = std::abs(a - numeric) /
                               std::max(1e-8, std::abs(a) + std::abs(numeric));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace smilecnn
