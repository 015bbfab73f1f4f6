#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scdrl/bitstream.hpp"
#include "scdrl/util.hpp"

namespace scdrl {

// ---- Multiplication and simple adders ----

// Bipolar multiply: bitwise XNOR of two equal-length streams.
BitStream xnor_multiply(const BitStream& a, const BitStream& b);

// Bitwise OR of n streams (documented low accuracy).
BitStream or_add(std::span<const BitStream> streams);

// n-to-1 MUX with uniform select; E[decode(out)] = mean of the inputs.
BitStream mux_add(std::span<const BitStream> streams, const SngConfig& select_cfg);

// ---- Approximate parallel counter ----

enum class ApcVariant { Original, Improved };

enum class PairGate {
    And,       // approximate unit, weight-2 output
    Or,        // approximate unit, weight-2 output
    HalfAdder, // exact: sum bit weight 1, carry weight 2
    AltAndOr,  // approximate unit toggling AND/OR each cycle (improved design)
};

struct ApcPair {
    int a = 0;
    int b = 0;
    PairGate gate = PairGate::And;
};

// Description of an n-input approximate parallel counter. The pairing layout
// is data so alternates stay testable.
struct ApcDesign {
    int n_inputs = 0;
    ApcVariant variant = ApcVariant::Original;
    std::vector<ApcPair> pairs;
    int passthrough = -1;  // odd leftover input fed to the tree at weight 1
    int tree_depth = 0;
    int output_width = 0;  // ceil(log2(n)) + 1

    // Alternating static AND/OR pairs.
    static ApcDesign original(int n_inputs);
    // Cycle-alternating AND/OR pairs; the last input pair feeds a half adder.
    static ApcDesign improved(int n_inputs);
};

// Per-cycle approximate counts (one word per cycle, in [0, n]).
std::vector<std::uint16_t> apc_add(const ApcDesign& design,
                                   std::span<const BitStream> streams);

// Oracle channel: exact per-cycle popcounts of the same streams.
std::vector<std::uint16_t> exact_counts(std::span<const BitStream> streams);

// Gate-level parallel counter over one cycle's bits, built from full/half
// adders. `inverted` models inverse mirror adders (layers alternate between
// counting ones and zeros); the result is bit-identical either way.
std::uint32_t tree_popcount(std::span<const std::uint8_t> bits, bool inverted);

// Mean |sum of SC counts - sum of exact counts| / (n * L) over random-value
// trials; mirrors the Table-1 style benchmark.
double apc_inaccuracy(const ApcDesign& design, std::uint32_t length,
                      std::uint32_t trials, Rng& rng);

// ---- Activation units ----

// K-state FSM tanh; output is 1 on the right half of the states.
struct StanhFsm {
    int k = 8;       // even, >= 2
    int state = 0;   // in [0, k-1]

    explicit StanhFsm(int k_states);
    bool step(bool in_bit);
};

// decode(out) ~ tanh((K/2) * decode(in)).
BitStream stanh(const BitStream& input, int k);

// Saturated up/down counter converting APC binary counts to a bit-stream.
struct SaturatedCounter {
    int width = 0;      // bits; value always fits
    int max_value = 0;  // saturation bound, <= 2^width - 1
    int value = 0;

    // Default sizing: width = ceil(log2(n)) + 1, saturating at 2^width - 1,
    // start at midpoint.
    static SaturatedCounter for_fan_in(int n);
    // Explicit state count (span = max_value + 1), start at midpoint.
    static SaturatedCounter with_span(int span);
    // Signed step 2*count - n, saturating; returns output bit.
    bool step(int count, int apc_n);
};

// Composed with apc_add this approximates tanh of the inner product.
BitStream btanh(std::span<const std::uint16_t> counts, SaturatedCounter counter,
                int apc_n);

// Benchmark report row, Table-1 shaped.
struct ApcBenchRow {
    const char* variant;
    int n_inputs;
    std::uint32_t length;
    std::uint32_t trials;
    double inaccuracy_pct;
};

}  // namespace scdrl
