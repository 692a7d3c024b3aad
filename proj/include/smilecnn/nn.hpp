#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "smilecnn/tensor.hpp"

namespace smilecnn {

enum class Mode { Train, Eval };

// ---- elementwise activations ----

double sigmoid(double x);
Tensor sigmoid(const Tensor& x);
double relu(double x);
Tensor relu(const Tensor& x);
double relu_grad(double x);  // derivative taken as 0 at x == 0
Tensor relu_grad(const Tensor& x);

/// Row-wise softmax of a rank-1 vector or rank-2 [batch, classes] tensor.
/// Computed with max subtraction so large logits do not overflow.
Tensor softmax(const Tensor& logits);

// ---- single-image / batch primitives ----
// These are the raw layer computations; the Layer classes below wrap them.

/// z = input . W^T + bias per row. weights [units, fan_in], input [batch, fan_in].
Tensor dense_forward(const Tensor& weights, const Tensor& bias,
                     const Tensor& input);

/// Valid cross-correlation, stride 1, no padding. kernels [maps, channels, kh, kw],
/// bias [maps], input [channels, H, W] -> [maps, H-kh+1, W-kw+1].
Tensor conv_forward(const Tensor& kernels, const Tensor& bias,
                    const Tensor& input);

struct PoolResult {
    Tensor output;
    // winner per output cell, flat index into the input [channels, H, W];
    // ties broken by the first index in row-major window order
    std::vector<uint32_t> argmax;
};

/// Non-overlapping 2x2 max pooling; trailing odd row/column dropped.
/// input [channels, H, W] -> [channels, H/2, W/2].
PoolResult maxpool_forward(const Tensor& input);

struct DropoutResult {
    Tensor output;
    Tensor mask;  // multiplicative: 0 for dropped, 1/(1-p) for survivors
};

/// Inverted dropout: train mode zeroes each element with probability p and
/// scales survivors by 1/(1-p); eval mode is the identity with an all-ones mask.
DropoutResult dropout_forward(const Tensor& input, double p, Mode mode,
                              Rng* rng);

// ---- network ----

struct NetworkConfig {
    int num_convs = 1;  // conv(5x5, 32 maps) + maxpool(2x2) pairs, 0..3
    int num_hidden_layers = 1;
    int hidden_units = 100;
    double dropout_p = 0.5;
    int input_height = 0;
    int input_width = 0;
    int num_classes = 2;

    /// Throws std::invalid_argument naming the offending stage when the conv
    /// chain collapses the spatial dims below 1, or any field is out of range.
    void validate() const;

    /// Spatial dims after the conv/pool chain.
    std::pair<int, int> conv_output_dims() const;
};

/// Per-layer cache captured during a forward pass. Backward consumes it;
/// grad checking replays it to keep dropout masks frozen. Each layer fills
/// only the fields its backward needs.
struct LayerTrace {
    Tensor input;
    Tensor output;                 // softmax only (class probabilities)
    Tensor mask;                   // dropout only
    std::vector<uint32_t> argmax;  // pool only
    std::vector<size_t> in_shape;  // pool and flatten
};
using ForwardTrace = std::vector<LayerTrace>;

struct LayerGrads {
    Tensor weights;
    Tensor bias;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual const std::string& name() const = 0;

    /// Computes the layer output; fills `tr` (when given) with whatever
    /// backward needs.
    virtual Tensor forward(const Tensor& input, Mode mode, Rng* rng,
                           LayerTrace* tr) const = 0;

    /// delta = dJ/d(output); returns dJ/d(input), writes parameter gradients.
    virtual Tensor backward(const Tensor& delta, const LayerTrace& tr,
                            LayerGrads& grads) const = 0;

    /// Re-runs forward with stochastic choices frozen from `tr` (only dropout
    /// is stochastic; everything else just recomputes).
    virtual Tensor replay(const Tensor& input, const LayerTrace& tr) const;

    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<const Tensor*> params() const { return {}; }
};

/// Layer stack: [conv+relu+pool] x num_convs, flatten,
/// [dense+relu+dropout] x num_hidden_layers, dense, softmax.
/// Weights use uniform +-sqrt(6/(fan_in+fan_out)) init, biases start at zero.
class Network {
public:
    static Network build(const NetworkConfig& config, Rng& rng);

    const NetworkConfig& config() const { return config_; }
    size_t layer_count() const { return layers_.size(); }
    const Layer& layer(size_t i) const { return *layers_[i]; }

    /// Parameter tensors in stack order (weights, bias per parametric layer).
    std::vector<Tensor*> params();
    std::vector<const Tensor*> params() const;
    std::vector<std::string> param_names() const;
    size_t param_count() const;

    /// input [batch, H, W] (or [batch, 1, H, W]); returns [batch, num_classes]
    /// class probabilities. `trace`, when given, receives one entry per layer.
    Tensor forward(const Tensor& batch, Mode mode, Rng* rng,
                   ForwardTrace* trace = nullptr) const;

    /// Gradients of the mean cross-entropy loss for every parameter, in
    /// params() order. The output-layer delta is softmax(a) - y (fused).
    std::vector<Tensor> backward(const ForwardTrace& trace,
                                 const Tensor& targets) const;

    /// Forward pass with dropout masks replayed from `trace`; returns class
    /// probabilities. Used by the finite-difference gradient oracle.
    Tensor replay_forward(const Tensor& batch, const ForwardTrace& trace) const;

    // checkpoint format: "NETv0001", config as LE ints + f64, then each
    // parametric layer's tensors in stack order
    void save(std::ostream& out) const;
    static Network load(std::istream& in);

    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

private:
    Network() = default;
    NetworkConfig config_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace smilecnn
