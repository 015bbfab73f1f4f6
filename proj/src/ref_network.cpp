#include "scdrl/ref_network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scdrl {

void NetworkSpec::validate() const {
    if (widths.size() < 2) {
        throw std::invalid_argument("network needs at least 2 layers");
    }
    for (int w : widths) {
        if (w < 1) {
            throw std::invalid_argument("layer widths must be >= 1");
        }
    }
}

WeightSet WeightSet::zeros(const NetworkSpec& spec) {
    spec.validate();
    WeightSet ws;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        int cols = spec.widths[l] + (spec.bias ? 1 : 0);
        ws.layers.emplace_back(spec.widths[l + 1], cols);
    }
    return ws;
}

WeightSet WeightSet::init(const NetworkSpec& spec, std::uint64_t seed) {
    WeightSet ws = zeros(spec);
    Rng rng(seed);
    for (auto& m : ws.layers) {
        double r = 1.0 / std::sqrt(static_cast<double>(m.cols));
        std::uniform_real_distribution<double> dist(-r, r);
        for (double& w : m.data) {
            w = dist(rng);
        }
    }
    return ws;
}

void WeightSet::check_shapes(const NetworkSpec& spec) const {
    spec.validate();
    if (layers.size() != spec.widths.size() - 1) {
        throw std::invalid_argument("weight layer count mismatch");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        int cols = spec.widths[l] + (spec.bias ? 1 : 0);
        if (layers[l].rows != spec.widths[l + 1] || layers[l].cols != cols) {
            throw std::invalid_argument("weight shape mismatch");
        }
    }
    for (const auto& m : layers) {
        for (double w : m.data) {
            if (!std::isfinite(w)) {
                throw std::invalid_argument("non-finite weight");
            }
        }
    }
}

RefNetwork::RefNetwork(NetworkSpec spec, WeightSet weights)
    : spec_(std::move(spec)), weights_(std::move(weights)) {
    weights_.check_shapes(spec_);
}

RefNetwork::RefNetwork(NetworkSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), weights_(WeightSet::init(spec_, seed)) {}

namespace {

double activate(double x, Activation a) {
    return a == Activation::Tanh ? std::tanh(x) : x;
}

double activate_deriv(double y, Activation a) {
    // In terms of the activation output y.
    return a == Activation::Tanh ? 1.0 - y * y : 1.0;
}

}  // namespace

std::vector<double> RefNetwork::forward_vec(std::span<const double> input) const {
    if (static_cast<int>(input.size()) != spec_.input_width()) {
        throw std::invalid_argument("input width mismatch");
    }
    std::vector<double> cur(input.begin(), input.end());
    for (std::size_t l = 0; l < weights_.layers.size(); ++l) {
        const Matrix& m = weights_.layers[l];
        Activation act = (l + 1 == weights_.layers.size())
                             ? spec_.output_activation
                             : spec_.hidden_activation;
        std::vector<double> next(m.rows, 0.0);
        for (int r = 0; r < m.rows; ++r) {
            double z = 0.0;
            for (std::size_t c = 0; c < cur.size(); ++c) {
                z += m.at(r, static_cast<int>(c)) * cur[c];
            }
            if (spec_.bias) {
                z += m.at(r, m.cols - 1);
            }
            next[r] = activate(z, act);
        }
        cur = std::move(next);
    }
    return cur;
}

double RefNetwork::forward(std::span<const double> input) const {
    return forward_vec(input)[0];
}

std::vector<double> RefNetwork::backward_delta(
    std::span<const double> input, std::span<const double> output_delta,
    WeightSet& grad_accum) const {
    if (static_cast<int>(input.size()) != spec_.input_width()) {
        throw std::invalid_argument("input width mismatch");
    }
    // Forward pass keeping activations.
    std::vector<std::vector<double>> acts;
    acts.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l < weights_.layers.size(); ++l) {
        const Matrix& m = weights_.layers[l];
        Activation act = (l + 1 == weights_.layers.size())
                             ? spec_.output_activation
                             : spec_.hidden_activation;
        std::vector<double> next(m.rows, 0.0);
        for (int r = 0; r < m.rows; ++r) {
            double z = 0.0;
            for (std::size_t c = 0; c < acts.back().size(); ++c) {
                z += m.at(r, static_cast<int>(c)) * acts.back()[c];
            }
            if (spec_.bias) {
                z += m.at(r, m.cols - 1);
            }
            next[r] = activate(z, act);
        }
        acts.push_back(std::move(next));
    }
    // Backward pass.
    std::vector<double> delta(output_delta.begin(), output_delta.end());
    for (std::size_t li = weights_.layers.size(); li-- > 0;) {
        const Matrix& m = weights_.layers[li];
        Matrix& g = grad_accum.layers[li];
        Activation act = (li + 1 == weights_.layers.size())
                             ? spec_.output_activation
                             : spec_.hidden_activation;
        const auto& in_act = acts[li];
        const auto& out_act = acts[li + 1];
        std::vector<double> dz(m.rows);
        for (int r = 0; r < m.rows; ++r) {
            dz[r] = delta[r] * activate_deriv(out_act[r], act);
            if (!std::isfinite(dz[r])) {
                throw std::runtime_error("non-finite gradient during backprop");
            }
        }
        std::vector<double> prev_delta(in_act.size(), 0.0);
        for (int r = 0; r < m.rows; ++r) {
            for (std::size_t c = 0; c < in_act.size(); ++c) {
                g.at(r, static_cast<int>(c)) += dz[r] * in_act[c];
                prev_delta[c] += dz[r] * m.at(r, static_cast<int>(c));
            }
            if (spec_.bias) {
                g.at(r, m.cols - 1) += dz[r];
            }
        }
        delta = std::move(prev_delta);
    }
    return delta;
}

std::vector<double> RefNetwork::backward(std::span<const double> input,
                                         double target,
                                         WeightSet& grad_accum) const {
    double out = forward(input);
    double d = out - target;
    std::vector<double> od{d};
    return backward_delta(input, od, grad_accum);
}

void RefNetwork::apply_gradient(const WeightSet& grad, double learning_rate,
                                double inv_batch) {
    for (std::size_t l = 0; l < weights_.layers.size(); ++l) {
        for (std::size_t i = 0; i < weights_.layers[l].data.size(); ++i) {
            weights_.layers[l].data[i] -=
                learning_rate * inv_batch * grad.layers[l].data[i];
        }
    }
}

double RefNetwork::train_minibatch(
    std::span<const std::vector<double>> features,
    std::span<const double> targets, const TrainConfig& cfg) {
    if (features.empty() || features.size() != targets.size()) {
        throw std::invalid_argument("empty or mismatched training batch");
    }
    for (double t : targets) {
        if (!std::isfinite(t)) {
            throw std::invalid_argument("non-finite training target");
        }
    }
    WeightSet grad = WeightSet::zeros(spec_);
    double mse = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        double out = forward(features[i]);
        mse += (out - targets[i]) * (out - targets[i]);
        backward(features[i], targets[i], grad);
    }
    apply_gradient(grad, cfg.learning_rate, 1.0 / features.size());
    if (cfg.weight_clip > 0.0) {
        for (auto& m : weights_.layers) {
            for (double& w : m.data) {
                w = std::clamp(w, -cfg.weight_clip, cfg.weight_clip);
            }
        }
    }
    return mse / features.size();
}

}  // namespace scdrl
