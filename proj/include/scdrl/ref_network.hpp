#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scdrl/util.hpp"

namespace scdrl {

enum class Activation { Tanh, Linear };

// Layered dense network description shared by the exact and SC evaluators.
struct NetworkSpec {
    std::vector<int> widths;                 // input N_1 ... output N_M
    Activation hidden_activation = Activation::Tanh;
    Activation output_activation = Activation::Tanh;
    bool bias = false;

    void validate() const;
    int input_width() const { return widths.front(); }
    int output_width() const { return widths.back(); }
};

// Row-major matrix, rows = outputs, cols = inputs (+1 when biased).
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

// Per-layer weight matrices θ.
struct WeightSet {
    std::vector<Matrix> layers;

    static WeightSet zeros(const NetworkSpec& spec);
    // Uniform in [-r, r], r = 1/sqrt(fan_in).
    static WeightSet init(const NetworkSpec& spec, std::uint64_t seed);
    void check_shapes(const NetworkSpec& spec) const;
};

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 32;
    int epochs = 1;
    // Project weights into [-weight_clip, weight_clip] after each step
    // (0 disables). Small weights keep the SC evaluator in its high-SNR
    // regime: drift per cycle is amplified by the inverse weight scale while
    // the counter span, and with it the mixing time, shrinks.
    double weight_clip = 0.0;
};

// Exact-arithmetic dense network: forward, backprop, SGD on squared error.
class RefNetwork {
  public:
    RefNetwork(NetworkSpec spec, WeightSet weights);
    RefNetwork(NetworkSpec spec, std::uint64_t seed);

    const NetworkSpec& spec() const { return spec_; }
    const WeightSet& weights() const { return weights_; }
    WeightSet& weights() { return weights_; }

    double forward(std::span<const double> input) const;
    std::vector<double> forward_vec(std::span<const double> input) const;

    // Gradient of 0.5*(forward - target)^2 w.r.t. every weight; returns the
    // gradient of the input as well (used by composite models).
    std::vector<double> backward(std::span<const double> input, double target,
                                 WeightSet& grad_accum) const;
    // Same but seeding the output delta directly.
    std::vector<double> backward_delta(std::span<const double> input,
                                       std::span<const double> output_delta,
                                       WeightSet& grad_accum) const;

    void apply_gradient(const WeightSet& grad, double learning_rate,
                        double inv_batch);

    // One SGD step on mean squared error over the batch; returns batch MSE
    // before the step.
    double train_minibatch(std::span<const std::vector<double>> features,
                           std::span<const double> targets,
                           const TrainConfig& cfg);

  private:
    NetworkSpec spec_;
    WeightSet weights_;
};

}  // namespace scdrl
