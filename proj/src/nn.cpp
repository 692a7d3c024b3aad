#include "smilecnn/nn.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace smilecnn {

// ---- activations ----

double sigmoid(double x) {
    // split on sign so exp never overflows
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
    Tensor out = x;
    for (size_t i = 0; i < out.size(); ++i) out[i] = sigmoid(out[i]);
    return out;
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

Tensor relu(const Tensor& x) {
    Tensor out = x;
    for (size_t i = 0; i < out.size(); ++i) out[i] = relu(out[i]);
    return out;
}

double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }

Tensor relu_grad(const Tensor& x) {
    Tensor out = x;
    for (size_t i = 0; i < out.size(); ++i) out[i] = relu_grad(out[i]);
    return out;
}

static void softmax_row(const double* z, double* out, size_t n) {
    double m = z[0];
    for (size_t i = 1; i < n; ++i) m = std::max(m, z[i]);
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        out[i] = std::exp(z[i] - m);
        sum += out[i];
    }
    for (size_t i = 0; i < n; ++i) out[i] /= sum;
}

Tensor softmax(const Tensor& logits) {
    if (logits.size() == 0 || logits.rank() > 2)
        throw std::invalid_argument("softmax: expects a non-empty vector or [batch, classes]");
    Tensor out = logits;
    if (logits.rank() == 1) {
        softmax_row(logits.data(), out.data(), logits.size());
        return out;
    }
    const size_t rows = logits.dim(0), cols = logits.dim(1);
    for (size_t r = 0; r < rows; ++r)
        softmax_row(logits.data() + r * cols, out.data() + r * cols, cols);
    return out;
}

// ---- primitives ----

Tensor dense_forward(const Tensor& weights, const Tensor& bias,
                     const Tensor& input) {
    if (weights.rank() != 2 || input.rank() != 2 || bias.rank() != 1)
        throw std::invalid_argument("dense_forward: weights/input rank 2, bias rank 1");
    const size_t units = weights.dim(0), fan_in = weights.dim(1);
    if (input.dim(1) != fan_in || bias.dim(0) != units)
        throw std::invalid_argument("dense_forward: shape mismatch");
    const size_t batch = input.dim(0);
    Tensor out = Tensor::zeros({batch, units});
    const double* w = weights.data();
    const double* b = bias.data();
    const double* in = input.data();
    double* o = out.data();
    for (size_t n = 0; n < batch; ++n) {
        const double* row = in + n * fan_in;
        for (size_t u = 0; u < units; ++u) {
            const double* wrow = w + u * fan_in;
            double acc = b[u];
            for (size_t f = 0; f < fan_in; ++f) acc += row[f] * wrow[f];
            o[n * units + u] = acc;
        }
    }
    return out;
}

// input [batch, C, H, W] -> [batch, M, OH, OW]
static Tensor conv_forward_batched(const Tensor& kernels, const Tensor& bias,
                                   const Tensor& input) {
    const size_t maps = kernels.dim(0), chans = kernels.dim(1);
    const size_t kh = kernels.dim(2), kw = kernels.dim(3);
    const size_t batch = input.dim(0);
    const size_t h = input.dim(2), w = input.dim(3);
    if (input.dim(1) != chans)
        throw std::invalid_argument("conv_forward: channel count mismatch");
    if (h < kh || w < kw)
        throw std::invalid_argument("conv_forward: kernel larger than input");
    const size_t oh = h - kh + 1, ow = w - kw + 1;
    Tensor out = Tensor::zeros({batch, maps, oh, ow});
    const double* k = kernels.data();
    const double* in = input.data();
    double* o = out.data();
    for (size_t n = 0; n < batch; ++n) {
        for (size_t m = 0; m < maps; ++m) {
            double* omap = o + ((n * maps) + m) * oh * ow;
            const double bm = bias[m];
            for (size_t i = 0; i < oh * ow; ++i) omap[i] = bm;
            for (size_t c = 0; c < chans; ++c) {
                const double* imap = in + ((n * chans) + c) * h * w;
                const double* kmap = k + ((m * chans) + c) * kh * kw;
                for (size_t u = 0; u < kh; ++u) {
                    for (size_t v = 0; v < kw; ++v) {
                        const double kv = kmap[u * kw + v];
                        for (size_t i = 0; i < oh; ++i) {
                            const double* irow = imap + (i + u) * w + v;
                            double* orow = omap + i * ow;
                            for (size_t j = 0; j < ow; ++j)
                                orow[j] += kv * irow[j];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor conv_forward(const Tensor& kernels, const Tensor& bias,
                    const Tensor& input) {
    if (kernels.rank() != 4 || bias.rank() != 1 || input.rank() != 3)
        throw std::invalid_argument(
            "conv_forward: kernels [maps,channels,kh,kw], bias [maps], input [channels,H,W]");
    if (bias.dim(0) != kernels.dim(0))
        throw std::invalid_argument("conv_forward: one bias per feature map");
    const Tensor in4 = input.reshape(
        {1, input.dim(0), input.dim(1), input.dim(2)});
    Tensor out = conv_forward_batched(kernels, bias, in4);
    return out.reshape({out.dim(1), out.dim(2), out.dim(3)});
}

// input [batch, C, H, W]; argmax indices are flat into the input tensor
static PoolResult maxpool_batched(const Tensor& input) {
    const size_t batch = input.dim(0), chans = input.dim(1);
    const size_t h = input.dim(2), w = input.dim(3);
    if (h < 2 || w < 2)
        throw std::invalid_argument("maxpool_forward: spatial dims must be >= 2");
    const size_t oh = h / 2, ow = w / 2;
    PoolResult res;
    res.output = Tensor::zeros({batch, chans, oh, ow});
    res.argmax.resize(batch * chans * oh * ow);
    const double* in = input.data();
    double* o = res.output.data();
    size_t cell = 0;
    for (size_t n = 0; n < batch; ++n) {
        for (size_t c = 0; c < chans; ++c) {
            const size_t base = ((n * chans) + c) * h * w;
            for (size_t i = 0; i < oh; ++i) {
                for (size_t j = 0; j < ow; ++j) {
                    size_t best = base + (2 * i) * w + 2 * j;
                    double bv = in[best];
                    const size_t cand[3] = {base + (2 * i) * w + 2 * j + 1,
                                            base + (2 * i + 1) * w + 2 * j,
                                            base + (2 * i + 1) * w + 2 * j + 1};
                    for (size_t a : cand) {
                        if (in[a] > bv) {  // strict: ties keep the first index
                            bv = in[a];
                            best = a;
                        }
                    }
                    o[cell] = bv;
                    res.argmax[cell] = static_cast<uint32_t>(best);
                    ++cell;
                }
            }
        }
    }
    return res;
}

PoolResult maxpool_forward(const Tensor& input) {
    if (input.rank() != 3)
        throw std::invalid_argument("maxpool_forward: input must be [channels,H,W]");
    const Tensor in4 = input.reshape(
        {1, input.dim(0), input.dim(1), input.dim(2)});
    PoolResult res = maxpool_batched(in4);
    res.output = res.output.reshape(
        {res.output.dim(1), res.output.dim(2), res.output.dim(3)});
    return res;
}

DropoutResult dropout_forward(const Tensor& input, double p, Mode mode,
                              Rng* rng) {
    if (p < 0.0 || p >= 1.0)
        throw std::invalid_argument("dropout_forward: p must be in [0, 1)");
    DropoutResult res;
    if (mode == Mode::Eval || p == 0.0) {
        res.output = input;
        res.mask = Tensor::zeros(input.shape());
        for (size_t i = 0; i < res.mask.size(); ++i) res.mask[i] = 1.0;
        return res;
    }
    if (rng == nullptr)
        throw std::invalid_argument("dropout_forward: train mode needs an rng");
    const double scale = 1.0 / (1.0 - p);
    res.mask = Tensor::zeros(input.shape());
    res.output = input;
    for (size_t i = 0; i < input.size(); ++i) {
        const double keep = (rng->next_double() < p) ? 0.0 : scale;
        res.mask[i] = keep;
        res.output[i] = input[i] * keep;
    }
    return res;
}

// ---- layers ----

Tensor Layer::replay(const Tensor& input, const LayerTrace&) const {
    // every layer except dropout computes the same function in both modes
    return forward(input, Mode::Eval, nullptr, nullptr);
}

namespace {

class DenseLayer final : public Layer {
public:
    DenseLayer(std::string name, size_t fan_in, size_t units, Rng& rng)
        : name_(std::move(name)) {
        const double limit = std::sqrt(6.0 / double(fan_in + units));
        w_ = Tensor::random_uniform({units, fan_in}, limit, rng);
        b_ = Tensor::zeros({units});
    }

    const std::string& name() const override { return name_; }

    Tensor forward(const Tensor& input, Mode, Rng*, LayerTrace* tr) const override {
        if (tr) tr->input = input;
        return dense_forward(w_, b_, input);
    }

    Tensor backward(const Tensor& delta, const LayerTrace& tr,
                    LayerGrads& grads) const override {
        const size_t units = w_.dim(0), fan_in = w_.dim(1);
        const size_t batch = delta.dim(0);
        grads.weights = Tensor::zeros(w_.shape());
        grads.bias = Tensor::zeros(b_.shape());
        Tensor din = Tensor::zeros(tr.input.shape());
        const double* d = delta.data();
        const double* in = tr.input.data();
        const double* w = w_.data();
        double* gw = grads.weights.data();
        double* gb = grads.bias.data();
        double* di = din.data();
        for (size_t n = 0; n < batch; ++n) {
            const double* drow = d + n * units;
            const double* irow = in + n * fan_in;
            double* dirow = di + n * fan_in;
            for (size_t u = 0; u < units; ++u) {
                const double du = drow[u];
                gb[u] += du;
                double* gwrow = gw + u * fan_in;
                const double* wrow = w + u * fan_in;
                for (size_t f = 0; f < fan_in; ++f) {
                    gwrow[f] += du * irow[f];
                    dirow[f] += du * wrow[f];
                }
            }
        }
        return din;
    }

    std::vector<Tensor*> params() override { return {&w_, &b_}; }
    std::vector<const Tensor*> params() const override { return {&w_, &b_}; }

private:
    std::string name_;
    Tensor w_, b_;
};

class ReluLayer final : public Layer {
public:
    explicit ReluLayer(std::string name) : name_(std::move(name)) {}
    const std::string& name() const override { return name_; }

    Tensor forward(const Tensor& input, Mode, Rng*, LayerTrace* tr) const override {
        if (tr) tr->input = input;
        return relu(input);
    }

    Tensor backward(const Tensor& delta, const LayerTrace& tr,
                    LayerGrads&) const override {
        Tensor din = delta;
        const double* in = tr.input.data();
        for (size_t i = 0; i < din.size(); ++i)
            if (in[i] <= 0.0) din[i] = 0.0;
        return din;
    }

private:
    std::string name_;
};

class ConvLayer final : public Layer {
public:
    ConvLayer(std::string name, size_t in_channels, size_t maps, size_t ksize,
              Rng& rng)
        : name_(std::move(name)) {
        const double fan_in = double(in_channels * ksize * ksize);
        const double fan_out = double(maps * ksize * ksize);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        k_ = Tensor::random_uniform({maps, in_channels, ksize, ksize}, limit, rng);
        b_ = Tensor::zeros({maps});
    }

    const std::string& name() const override { return name_; }

    Tensor forward(const Tensor& input, Mode, Rng*, LayerTrace* tr) const override {
        if (input.rank() != 4)
            throw std::invalid_argument(name_ + ": expects [batch,channels,H,W]");
        if (tr) tr->input = input;
        return conv_forward_batched(k_, b_, input);
    }

    Tensor backward(const Tensor& delta, const LayerTrace& tr,
                    LayerGrads& grads) const override {
        const size_t maps = k_.dim(0), chans = k_.dim(1);
        const size_t kh = k_.dim(2), kw = k_.dim(3);
        const size_t batch = tr.input.dim(0);
        const size_t h = tr.input.dim(2), w = tr.input.dim(3);
        const size_t oh = h - kh + 1, ow = w - kw + 1;
        grads.weights = Tensor::zeros(k_.shape());
        grads.bias = Tensor::zeros(b_.shape());
        Tensor din = Tensor::zeros(tr.input.shape());
        const double* d = delta.data();
        const double* in = tr.input.data();
        const double* k = k_.data();
        double* gk = grads.weights.data();
        double* gb = grads.bias.data();
        double* di = din.data();
        for (size_t n = 0; n < batch; ++n) {
            for (size_t m = 0; m < maps; ++m) {
                const double* dmap = d + ((n * maps) + m) * oh * ow;
                double acc = 0.0;
                for (size_t i = 0; i < oh * ow; ++i) acc += dmap[i];
                gb[m] += acc;
                for (size_t c = 0; c < chans; ++c) {
                    const double* imap = in + ((n * chans) + c) * h * w;
                    double* dimap = di + ((n * chans) + c) * h * w;
                    const double* kmap = k + ((m * chans) + c) * kh * kw;
                    double* gkmap = gk + ((m * chans) + c) * kh * kw;
                    for (size_t u = 0; u < kh; ++u) {
                        for (size_t v = 0; v < kw; ++v) {
                            // weight sharing: one kernel cell accumulates over
                            // every spatial position and every batch entry
                            const double kv = kmap[u * kw + v];
                            double gacc = 0.0;
                            for (size_t i = 0; i < oh; ++i) {
                                const double* irow = imap + (i + u) * w + v;
                                double* dirow = dimap + (i + u) * w + v;
                                const double* drow = dmap + i * ow;
                                for (size_t j = 0; j < ow; ++j) {
                                    gacc += drow[j] * irow[j];
                                    dirow[j] += drow[j] * kv;
                                }
                            }
                            gkmap[u * kw + v] += gacc;
                        }
                    }
                }
            }
        }
        return din;
    }

    std::vector<Tensor*> params() override { return {&k_, &b_}; }
    std::vector<const Tensor*> params() const override { return {&k_, &b_}; }

private:
    std::string name_;
    Tensor k_, b_;
};

class MaxPoolLayer final : public Layer {
public:
    explicit MaxPoolLayer(std::string name) : name_(std::move(name)) {}
    const std::string& name() const override { return name_; }

    Tensor forward(const Tensor& input, Mode, Rng*, LayerTrace* tr) const override {
        if (input.rank() != 4)
            throw std::invalid_argument(name_ + ": expects [batch,channels,H,W]");
        PoolResult res = maxpool_batched(input);
        if (tr) {
            tr->argmax = std::move(res.argmax);
            tr->in_shape = input.shape();
        }
        return std::move(res.output);
    }

    Tensor backward(const Tensor& delta, const LayerTrace& tr,
                    LayerGrads&) const override {
        Tensor din = Tensor::zeros(tr.in_shape);
        const double* d = delta.data();
        for (size_t i = 0; i < delta.size(); ++i) din[tr.argmax[i]] += d[i];
        return din;
    }

private:
    std::string name_;
};

class DropoutLayer final : public Layer {
public:
    DropoutLayer(std::string name, double p) : name_(std::move(name)), p_(p) {
        if (p < 0.0 || p >= 1.0)
            throw std::invalid_argument("dropout: p must be in [0, 1)");
    }

    const std::string& name() const override { return name_; }

    Tensor forward(const Tensor& input, Mode mode, Rng* rng,
                   LayerTrace* tr) const override {
        if (mode == Mode::Eval || p_ == 0.0) {
            if (tr) tr->mask = Tensor();  // identity; backward treats empty as ones
            return input;
        }
        DropoutResult res = dropout_forward(input, p_, mode, rng);
        if (tr) tr->mask = std::move(res.mask);
        return std::move(res.output);
    }

    Tensor backward(const Tensor& delta, const LayerTrace& tr,
                    LayerGrads&) const override {
        if (tr.mask.size() == 0) return delta;
        Tensor din = delta;
        for (size_t i = 0; i < din.size(); ++i) din[i] *= tr.mask[i];
        return din;
    }

    Tensor replay(const Tensor& input, const LayerTrace& tr) const override {
        if (tr.mask.size() == 0) return input;
        Tensor out = input;
        for (size_t i = 0; i < out.size(); ++i) out[i] *= tr.mask[i];
        return out;
    }

private:
    std::string name_;
    double p_;
};

class FlattenLayer final : public Layer {
public:
    explicit FlattenLayer(std::string name) : name_(std::move(name)) {}
    const std::string& name() const override { return name_; }

    Tensor forward(const Tensor& input, Mode, Rng*, LayerTrace* tr) const override {
        if (input.rank() < 2)
            throw std::invalid_argument(name_ + ": expects a batched tensor");
        if (tr) tr->in_shape = input.shape();
        const size_t batch = input.dim(0);
        return input.reshape({batch, input.size() / batch});
    }

    Tensor backward(const Tensor& delta, const LayerTrace& tr,
                    LayerGrads&) const override {
        return delta.reshape(tr.in_shape);
    }

private:
    std::string name_;
};

class SoftmaxLayer final : public Layer {
public:
    explicit SoftmaxLayer(std::string name) : name_(std::move(name)) {}
    const std::string& name() const override { return name_; }

    Tensor forward(const Tensor& input, Mode, Rng*, LayerTrace* tr) const override {
        Tensor out = softmax(input);
        if (tr) tr->output = out;
        return out;
    }

    // never reached: the cross-entropy delta is fused at the network level
    Tensor backward(const Tensor& delta, const LayerTrace&,
                    LayerGrads&) const override {
        return delta;
    }

private:
    std::string name_;
};

}  // namespace

// ---- config ----

void NetworkConfig::validate() const {
    if (num_convs < 0 || num_convs > 3)
        throw std::invalid_argument("config: num_convs must be in 0..3");
    if (num_hidden_layers < 1)
        throw std::invalid_argument("config: num_hidden_layers must be >= 1");
    if (hidden_units < 1)
        throw std::invalid_argument("config: hidden_units must be >= 1");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw std::invalid_argument("config: dropout_p must be in [0, 1)");
    if (input_height < 1 || input_width < 1)
        throw std::invalid_argument("config: input dims must be >= 1");
    if (num_classes < 2)
        throw std::invalid_argument("config: num_classes must be >= 2");
    int h = input_height, w = input_width;
    for (int k = 1; k <= num_convs; ++k) {
        if (h < 5 || w < 5)
            throw std::invalid_argument(
                "config: conv stage " + std::to_string(k) + " needs at least 5x5 input, has " +
                std::to_string(h) + "x" + std::to_string(w));
        h -= 4;
        w -= 4;
        if (h < 2 || w < 2)
            throw std::invalid_argument(
                "config: pool stage " + std::to_string(k) + " needs at least 2x2 input, has " +
                std::to_string(h) + "x" + std::to_string(w));
        h /= 2;
        w /= 2;
    }
}

std::pair<int, int> NetworkConfig::conv_output_dims() const {
    int h = input_height, w = input_width;
    for (int k = 0; k < num_convs; ++k) {
        h = (h - 4) / 2;
        w = (w - 4) / 2;
    }
    return {h, w};
}

// ---- network ----

static constexpr size_t kConvMaps = 32;
static constexpr size_t kConvKernel = 5;

Network Network::build(const NetworkConfig& config, Rng& rng) {
    config.validate();
    Network net;
    net.config_ = config;
    size_t chans = 1;
    for (int k = 1; k <= config.num_convs; ++k) {
        const std::string id = std::to_string(k);
        net.layers_.push_back(
            std::make_unique<ConvLayer>("conv" + id, chans, kConvMaps, kConvKernel, rng));
        net.layers_.push_back(std::make_unique<ReluLayer>("conv" + id + "_relu"));
        net.layers_.push_back(std::make_unique<MaxPoolLayer>("pool" + id));
        chans = kConvMaps;
    }
    net.layers_.push_back(std::make_unique<FlattenLayer>("flatten"));
    auto [h, w] = config.conv_output_dims();
    size_t fan_in = size_t(h) * size_t(w) * (config.num_convs > 0 ? kConvMaps : 1);
    for (int l = 1; l <= config.num_hidden_layers; ++l) {
        const std::string id = std::to_string(l);
        net.layers_.push_back(std::make_unique<DenseLayer>(
            "hidden" + id, fan_in, size_t(config.hidden_units), rng));
        net.layers_.push_back(std::make_unique<ReluLayer>("hidden" + id + "_relu"));
        net.layers_.push_back(
            std::make_unique<DropoutLayer>("hidden" + id + "_dropout", config.dropout_p));
        fan_in = size_t(config.hidden_units);
    }
    net.layers_.push_back(std::make_unique<DenseLayer>(
        "output", fan_in, size_t(config.num_classes), rng));
    net.layers_.push_back(std::make_unique<SoftmaxLayer>("softmax"));
    return net;
}

std::vector<Tensor*> Network::params() {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
        for (Tensor* t : l->params()) out.push_back(t);
    return out;
}

std::vector<const Tensor*> Network::params() const {
    std::vector<const Tensor*> out;
    for (const auto& l : layers_)
        for (const Tensor* t : l->params()) out.push_back(t);
    return out;
}

std::vector<std::string> Network::param_names() const {
    std::vector<std::string> out;
    for (const auto& l : layers_) {
        const size_t n = l->params().size();
        if (n == 0) continue;
        out.push_back(l->name() + ".weights");
        out.push_back(l->name() + ".bias");
    }
    return out;
}

size_t Network::param_count() const {
    size_t n = 0;
    for (const Tensor* t : params()) n += t->size();
    return n;
}

Tensor Network::forward(const Tensor& batch, Mode mode, Rng* rng,
                        ForwardTrace* trace) const {
    Tensor cur;
    const size_t h = size_t(config_.input_height), w = size_t(config_.input_width);
    if (batch.rank() == 3 && batch.dim(1) == h && batch.dim(2) == w)
        cur = batch.reshape({batch.dim(0), 1, h, w});
    else if (batch.rank() == 4 && batch.dim(1) == 1 && batch.dim(2) == h &&
             batch.dim(3) == w)
        cur = batch;
    else
        throw std::invalid_argument("forward: batch shape does not match configured input");
    if (trace) {
        trace->clear();
        trace->resize(layers_.size());
    }
    for (size_t i = 0; i < layers_.size(); ++i)
        cur = layers_[i]->forward(cur, mode, rng, trace ? &(*trace)[i] : nullptr);
    return cur;
}

Tensor Network::replay_forward(const Tensor& batch,
                               const ForwardTrace& trace) const {
    if (trace.size() != layers_.size())
        throw std::invalid_argument("replay_forward: trace does not match network");
    Tensor cur = batch.rank() == 3
                     ? batch.reshape({batch.dim(0), 1, batch.dim(1), batch.dim(2)})
                     : batch;
    for (size_t i = 0; i < layers_.size(); ++i)
        cur = layers_[i]->replay(cur, trace[i]);
    return cur;
}

std::vector<Tensor> Network::backward(const ForwardTrace& trace,
                                      const Tensor& targets) const {
    if (trace.size() != layers_.size())
        throw std::invalid_argument("backward: trace does not match network");
    const Tensor& probs = trace.back().output;
    if (probs.shape() != targets.shape())
        throw std::invalid_argument("backward: targets do not match traced output");
    const size_t batch = targets.dim(0);

    // fused softmax + cross-entropy: dJ/dz_L = (softmax(z_L) - y) / m
    Tensor delta = probs;
    for (size_t i = 0; i < delta.size(); ++i)
        delta[i] = (delta[i] - targets[i]) / double(batch);

    std::vector<Tensor> grads(params().size());
    size_t slot = grads.size();
    for (size_t i = layers_.size() - 1; i-- > 0;) {  // softmax itself is fused away
        LayerGrads g;
        delta = layers_[i]->backward(delta, trace[i], g);
        if (!layers_[i]->params().empty()) {
            slot -= 2;
            grads[slot] = std::move(g.weights);
            grads[slot + 1] = std::move(g.bias);
        }
    }
    return grads;
}

// ---- checkpoint io ----

static constexpr char kNetMagic[8] = {'N', 'E', 'T', 'v', '0', '0', '0', '1'};

void Network::save(std::ostream& out) const {
    out.write(kNetMagic, 8);
    write_u32_le(out, uint32_t(config_.num_convs));
    write_u32_le(out, uint32_t(config_.num_hidden_layers));
    write_u32_le(out, uint32_t(config_.hidden_units));
    write_u32_le(out, uint32_t(config_.input_height));
    write_u32_le(out, uint32_t(config_.input_width));
    write_u32_le(out, uint32_t(config_.num_classes));
    write_f64_le(out, config_.dropout_p);
    for (const Tensor* t : params()) write_tensor(out, *t);
}

Network Network::load(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kNetMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    NetworkConfig c;
    c.num_convs = int(read_u32_le(in));
    c.num_hidden_layers = int(read_u32_le(in));
    c.hidden_units = int(read_u32_le(in));
    c.input_height = int(read_u32_le(in));
    c.input_width = int(read_u32_le(in));
    c.num_classes = int(read_u32_le(in));
    c.dropout_p = read_f64_le(in);
    Rng scratch(0);
    Network net = build(c, scratch);
    for (Tensor* t : net.params()) {
        Tensor loaded = read_tensor(in);
        if (loaded.shape() != t->shape())
            throw std::runtime_error("checkpoint: tensor shape does not match architecture");
        *t = std::move(loaded);
    }
    return net;
}

}  // namespace smilecnn
