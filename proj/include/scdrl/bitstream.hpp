#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scdrl {

enum class Encoding { Unipolar, Bipolar };

const char* encoding_name(Encoding enc);

// Fixed-length packed bit sequence carrying an SC-encoded number.
class BitStream {
  public:
    BitStream(std::uint32_t length, Encoding enc);

    std::uint32_t length() const { return length_; }
    Encoding encoding() const { return encoding_; }

    bool bit(std::uint32_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set_bit(std::uint32_t i, bool v) {
        std::uint64_t mask = 1ULL << (i & 63);
        if (v) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    std::uint64_t popcount() const;

    // popcount/L (unipolar) or 2*popcount/L - 1 (bipolar).
    double decode() const;

    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> words() { return words_; }
    std::uint32_t word_count() const {
        return static_cast<std::uint32_t>(words_.size());
    }
    // Bits past `length` in the last word are always zero.
    std::uint64_t tail_mask() const;
    void mask_tail();

    // One-line header "L=<n> enc=<unipolar|bipolar>" plus hex words.
    std::string debug_dump() const;

    bool operator==(const BitStream&) const = default;

  private:
    std::uint32_t length_;
    Encoding encoding_;
    std::vector<std::uint64_t> words_;
};

// Stochastic number generator configuration. The LFSR kind walks a de Bruijn
// cycle (maximal LFSR with zero-state insertion) whose width is matched to the
// stream length, so a full-length stream covers every comparison word exactly
// once; quantization error of a single stream is then at most 1/L. Comparison
// words are bit-reversed and XOR-scrambled per seed to decorrelate streams.
struct SngConfig {
    enum class Kind { Lfsr, CounterHash };

    Kind kind = Kind::Lfsr;
    std::uint32_t width = 0;    // register width in bits; 0 = pick from L
    std::uint64_t seed = 1;     // nonzero for LFSR
    std::uint64_t taps = 0;     // 0 selects the default maximal taps for `width`
};

// Maximal-length Fibonacci tap mask for widths 2..24.
std::uint64_t default_lfsr_taps(std::uint32_t width);

// Fibonacci LFSR over `width` bits. State must stay nonzero.
class Lfsr {
  public:
    explicit Lfsr(const SngConfig& cfg);

    std::uint64_t state() const { return state_; }
    std::uint32_t width() const { return width_; }

    // Returns the current state word, then advances.
    std::uint64_t next_word();
    bool next_bit() { return next_word() & 1u; }

  private:
    std::uint64_t state_;
    std::uint64_t taps_;
    std::uint32_t width_;
};

// Functional step: (state, cfg) -> (output word, new state).
std::pair<std::uint64_t, std::uint64_t> lfsr_next(std::uint64_t state,
                                                  const SngConfig& cfg);

// Per-stream generator state; compares value probability against the
// pseudo-random word each cycle.
class Sng {
  public:
    explicit Sng(const SngConfig& cfg);

    BitStream encode(double value, std::uint32_t length, Encoding enc);

  private:
    SngConfig cfg_;
    std::uint64_t counter_ = 0;
};

// Width actually used for a stream of the given length (0 = auto rule).
std::uint32_t resolve_sng_width(const SngConfig& cfg, std::uint32_t length);

// Convenience wrapper with a fresh generator.
BitStream encode(double value, std::uint32_t length, Encoding enc,
                 const SngConfig& cfg);

double decode(const BitStream& s);

// Scale bookkeeping for values outside the encoding range.
struct ScaleInfo {
    double factor = 1.0;  // scale factor >= 1
    double lo = 0.0;      // original range
    double hi = 0.0;
};

// factor = max(1, max |value|); scaled = value / factor.
std::pair<std::vector<double>, ScaleInfo> prescale(
    std::span<const double> values);

// Derives a decorrelated per-stream SngConfig from a seed index.
SngConfig sng_config_for_stream(const class SeedSplitter& seeds,
                                std::uint64_t stream_index,
                                std::uint32_t width = 0);

}  // namespace scdrl
