#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scdrl/bitstream.hpp"
#include "scdrl/ref_network.hpp"
#include "scdrl/sc_units.hpp"

namespace scdrl {

// Clock defaults back-derived from the synthesis table; timing accounting is
// in scope, synthesis is not.
inline constexpr double kPipelinedClkNs = 1.02;
inline constexpr double kNonPipelinedClkNs = 1.6112;

struct PipelineConfig {
    // 2 when pipelined: a register sits between addition and activation.
    int stages_per_layer = 2;
    double t_clk_ns = kPipelinedClkNs;

    static PipelineConfig pipelined() { return {2, kPipelinedClkNs}; }
    static PipelineConfig non_pipelined() { return {1, kNonPipelinedClkNs}; }
    bool is_pipelined() const { return stages_per_layer == 2; }
};

struct TimingReport {
    double delay_ns = 0.0;
    double throughput_per_ns = 0.0;  // 1/delay when pipelined
    std::uint32_t stream_length = 0;
    bool pipelined = false;

    std::string csv_row() const;
    static const char* csv_header();
};

// Steady-state delay: bit-stream length times the clock period.
double delay_ns(std::uint32_t length, const PipelineConfig& cfg);

// Layered SC evaluator: per neuron, XNOR multipliers feed one APC (fan-in =
// layer input width) which feeds a saturated-counter tanh. By default hidden
// activations are decoded and re-encoded with fresh SNGs at layer boundaries,
// which keeps the autocorrelated counter output runs from seeping into the
// next counter stage. Arbitrary fan-in is handled by the generic pairing
// layout, which degenerates to the benchmarked 26/30-input designs at those
// widths.
class ScNetwork {
  public:
    ScNetwork(const NetworkSpec& spec, const WeightSet& weights,
              std::uint32_t stream_length, std::uint64_t seed,
              PipelineConfig pipeline = PipelineConfig::pipelined());

    struct Result {
        double q = 0.0;
        TimingReport timing;
    };

    // Inputs must already be prescaled to [-1, 1].
    Result forward(std::span<const double> input) const;
    Result forward(std::span<const double> input, std::uint64_t eval_seed) const;
    // All output-layer activations (forward().q is element 0).
    std::vector<double> forward_vector(std::span<const double> input,
                                       std::uint64_t eval_seed) const;

    // Decode hidden activations and re-encode them with fresh SNGs at layer
    // boundaries; disable to stream counter outputs straight through as the
    // physical pipeline would (cheaper, noisier).
    bool reencode_boundaries = true;

    const NetworkSpec& spec() const { return spec_; }
    std::uint32_t stream_length() const { return stream_length_; }
    double layer_scale(std::size_t layer) const { return scales_[layer]; }

  private:
    struct Layer {
        Matrix scaled_weights;      // entries in [-1, 1]
        std::vector<std::vector<BitStream>> weight_streams;  // [neuron][input]
        ApcDesign apc;
        int fan_in = 0;
        int counter_max = 0;
    };

    NetworkSpec spec_;
    std::vector<Layer> layers_;
    std::vector<double> scales_;
    std::uint32_t stream_length_;
    std::uint64_t seed_;
    PipelineConfig pipeline_;
};

// Binary -> stochastic boundary conversion with scale bookkeeping.
std::vector<BitStream> b2s(std::span<const double> values,
                           std::uint32_t stream_length, Encoding enc,
                           const SeedSplitter& seeds, ScaleInfo& scale_out);
double s2b(const BitStream& stream, const ScaleInfo& scale);

// Weight file: JSON-shaped layer dims, flattened row-major weights, per-layer
// scale factors, seed block.
void write_weight_file(const std::string& path, const NetworkSpec& spec,
                       const WeightSet& weights, std::uint64_t seed);
struct WeightFile {
    NetworkSpec spec;
    WeightSet weights;
    std::vector<double> scales;
    std::uint64_t seed = 0;
};
WeightFile read_weight_file(const std::string& path);

}  // namespace scdrl
