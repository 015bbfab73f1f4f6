#include "scdrl/sc_network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "scdrl/util.hpp"

namespace scdrl {

const char* TimingReport::csv_header() {
    return "L,pipelined,delay_ns,throughput_per_ns";
}

std::string TimingReport::csv_row() const {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%u,%d,%.6g,%.6g", stream_length,
                  pipelined ? 1 : 0, delay_ns, throughput_per_ns);
    return buf;
}

double delay_ns(std::uint32_t length, const PipelineConfig& cfg) {
    if (length < 1) {
        throw std::invalid_argument("stream length must be >= 1");
    }
    if (cfg.t_clk_ns <= 0.0) {
        throw std::invalid_argument("clock period must be positive");
    }
    return static_cast<double>(length) * cfg.t_clk_ns;
}

namespace {

TimingReport make_timing(std::uint32_t length, const PipelineConfig& cfg) {
    TimingReport t;
    t.stream_length = length;
    t.pipelined = cfg.is_pipelined();
    t.delay_ns = delay_ns(length, cfg);
    t.throughput_per_ns = t.pipelined ? 1.0 / t.delay_ns : 0.0;
    return t;
}

// Seed index layout for one network: weights get even indices, per-eval input
// encoders derive from a child splitter.
std::uint64_t weight_stream_index(int layer, int row, int col) {
    return (static_cast<std::uint64_t>(layer) << 40) |
           (static_cast<std::uint64_t>(row) << 20) |
           static_cast<std::uint64_t>(col);
}

}  // namespace

ScNetwork::ScNetwork(const NetworkSpec& spec, const WeightSet& weights,
                     std::uint32_t stream_length, std::uint64_t seed,
                     PipelineConfig pipeline)
    : spec_(spec), stream_length_(stream_length), seed_(seed),
      pipeline_(pipeline) {
    weights.check_shapes(spec_);
    SeedSplitter weight_seeds = SeedSplitter(seed).child(0);
    for (std::size_t l = 0; l < weights.layers.size(); ++l) {
        const Matrix& m = weights.layers[l];
        // Normalize weights to full stream range even when they are already
        // inside [-1, 1]: larger per-cycle drift means the counter mixes in
        // fewer cycles, and the smaller counter span restores unit gain.
        double s = 0.0;
        for (double w : m.data) {
            if (!std::isfinite(w)) {
                throw std::invalid_argument("non-finite weight");
            }
            s = std::max(s, std::fabs(w));
        }
        if (s == 0.0) {
            s = 1.0;
        }
        scales_.push_back(s);

        Layer layer;
        layer.scaled_weights = m;
        for (double& w : layer.scaled_weights.data) {
            w /= s;
        }
        layer.fan_in = m.cols;
        layer.apc = ApcDesign::improved(layer.fan_in);
        // Calibrated span: the continuum model (gain = span / 2n) under-counts
        // because saturation clips drift at the rails; the extra n/2 plus the
        // 1.2x slope term were fit against the float tanh oracle.
        int span = static_cast<int>(
            std::lround(layer.fan_in * (2.4 * s + 0.5) / 2.0)) * 2;
        layer.counter_max = std::max(3, span - 1);
        layer.weight_streams.resize(m.rows);
        for (int r = 0; r < m.rows; ++r) {
            for (int c = 0; c < m.cols; ++c) {
                Sng sng(sng_config_for_stream(
                    weight_seeds, weight_stream_index(static_cast<int>(l), r, c)));
                layer.weight_streams[r].push_back(sng.encode(
                    layer.scaled_weights.at(r, c), stream_length_,
                    Encoding::Bipolar));
            }
        }
        layers_.push_back(std::move(layer));
    }
}

ScNetwork::Result ScNetwork::forward(std::span<const double> input) const {
    return forward(input, seed_);
}

ScNetwork::Result ScNetwork::forward(std::span<const double> input,
                                     std::uint64_t eval_seed) const {
    Result res;
    res.q = forward_vector(input, eval_seed)[0];
    res.timing = make_timing(stream_length_, pipeline_);
    return res;
}

std::vector<double> ScNetwork::forward_vector(std::span<const double> input,
                                              std::uint64_t eval_seed) const {
    if (static_cast<int>(input.size()) != spec_.input_width()) {
        throw std::invalid_argument("input width mismatch");
    }
    for (double v : input) {
        if (v < -1.0 || v > 1.0) {
            throw std::out_of_range("SC input must be prescaled to [-1, 1]");
        }
    }
    SeedSplitter eval_seeds = SeedSplitter(seed_).child(1 + eval_seed);
    // First layer inputs come from SNGs, one generator per (neuron, input) so
    // neuron outputs carry independent sampling noise. Deeper layers consume
    // either re-encoded activations (default) or the raw Btanh output
    // streams.
    std::vector<BitStream> streams;  // layer inputs from the second layer on
    std::vector<double> cur;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        SeedSplitter layer_seeds = eval_seeds.child(l);
        if (l > 0 && spec_.bias) {
            Sng sng(sng_config_for_stream(layer_seeds, 1u << 20));
            streams.push_back(
                sng.encode(1.0, stream_length_, Encoding::Bipolar));
        }
        if (l > 0 && static_cast<int>(streams.size()) != layer.fan_in) {
            throw std::logic_error("layer stream arity mismatch");
        }
        bool last = (l + 1 == layers_.size());
        Activation act =
            last ? spec_.output_activation : spec_.hidden_activation;
        cur.assign(layer.scaled_weights.rows, 0.0);
        std::vector<BitStream> next_streams;
        std::vector<BitStream> products;
        for (int r = 0; r < layer.scaled_weights.rows; ++r) {
            products.clear();
            if (l == 0) {
                SeedSplitter row_seeds = layer_seeds.child(r);
                for (int c = 0; c < layer.fan_in; ++c) {
                    bool is_bias = spec_.bias &&
                                   c == static_cast<int>(input.size());
                    Sng sng(sng_config_for_stream(row_seeds, c));
                    products.push_back(xnor_multiply(
                        sng.encode(is_bias ? 1.0 : input[c], stream_length_,
                                   Encoding::Bipolar),
                        layer.weight_streams[r][c]));
                }
            } else {
                for (int c = 0; c < layer.fan_in; ++c) {
                    products.push_back(
                        xnor_multiply(streams[c], layer.weight_streams[r][c]));
                }
            }
            auto counts = apc_add(layer.apc, products);
            if (act == Activation::Tanh) {
                BitStream out = btanh(
                    counts, SaturatedCounter::with_span(layer.counter_max + 1),
                    layer.fan_in);
                cur[r] = out.decode();
                if (reencode_boundaries && !last) {
                    Sng sng(sng_config_for_stream(layer_seeds, 3000u + r));
                    out = sng.encode(cur[r], stream_length_,
                                     Encoding::Bipolar);
                }
                next_streams.push_back(std::move(out));
            } else {
                // Linear output: the count sum estimates the scaled inner
                // product directly.
                long long total = 0;
                for (auto c : counts) {
                    total += c;
                }
                double ip_scaled =
                    (2.0 * total - static_cast<double>(layer.fan_in) *
                                       stream_length_) /
                    stream_length_;
                cur[r] = ip_scaled * scales_[l];
                if (!last) {
                    // Linear hidden values leave the stream domain; re-encode.
                    Sng sng(sng_config_for_stream(eval_seeds.child(l),
                                                  2000u + r));
                    next_streams.push_back(sng.encode(
                        std::clamp(cur[r], -1.0, 1.0), stream_length_,
                        Encoding::Bipolar));
                } else {
                    next_streams.emplace_back(stream_length_,
                                              Encoding::Bipolar);
                }
            }
        }
        streams = std::move(next_streams);
    }
    return cur;
}

std::vector<BitStream> b2s(std::span<const double> values,
                           std::uint32_t stream_length, Encoding enc,
                           const SeedSplitter& seeds, ScaleInfo& scale_out) {
    auto [scaled, info] = prescale(values);
    scale_out = info;
    std::vector<BitStream> out;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        double v = scaled[i];
        if (enc == Encoding::Unipolar && v < 0.0) {
            throw std::out_of_range("unipolar b2s requires non-negative values");
        }
        Sng sng(sng_config_for_stream(seeds, i));
        out.push_back(sng.encode(v, stream_length, enc));
    }
    return out;
}

double s2b(const BitStream& stream, const ScaleInfo& scale) {
    return stream.decode() * scale.factor;
}

void write_weight_file(const std::string& path, const NetworkSpec& spec,
                       const WeightSet& weights, std::uint64_t seed) {
    weights.check_shapes(spec);
    nlohmann::json j;
    j["version"] = 1;
    j["widths"] = spec.widths;
    j["activation"] = {
        {"hidden", spec.hidden_activation == Activation::Tanh ? "tanh" : "linear"},
        {"output", spec.output_activation == Activation::Tanh ? "tanh" : "linear"}};
    j["bias"] = spec.bias;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& m : weights.layers) {
        auto [scaled, info] = prescale(m.data);
        layers.push_back({{"rows", m.rows},
                          {"cols", m.cols},
                          {"scale", info.factor},
                          {"weights", m.data}});
    }
    j["layers"] = std::move(layers);
    j["seeds"] = {{"root", seed}};
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open weight file for writing: " + path);
    }
    f << j.dump(2) << "\n";
}

WeightFile read_weight_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open weight file: " + path);
    }
    nlohmann::json j = nlohmann::json::parse(f);
    WeightFile wf;
    wf.spec.widths = j.at("widths").get<std::vector<int>>();
    auto act = [](const std::string& s) {
        if (s == "tanh") return Activation::Tanh;
        if (s == "linear") return Activation::Linear;
        throw std::runtime_error("unknown activation in weight file: " + s);
    };
    wf.spec.hidden_activation = act(j.at("activation").at("hidden"));
    wf.spec.output_activation = act(j.at("activation").at("output"));
    wf.spec.bias = j.at("bias").get<bool>();
    for (const auto& jl : j.at("layers")) {
        Matrix m(jl.at("rows").get<int>(), jl.at("cols").get<int>());
        m.data = jl.at("weights").get<std::vector<double>>();
        if (m.data.size() != static_cast<std::size_t>(m.rows) * m.cols) {
            throw std::runtime_error("weight count mismatch in weight file");
        }
        wf.weights.layers.push_back(std::move(m));
        wf.scales.push_back(jl.at("scale").get<double>());
    }
    wf.seed = j.at("seeds").at("root").get<std::uint64_t>();
    wf.weights.check_shapes(wf.spec);
    return wf;
}

}  // namespace scdrl
