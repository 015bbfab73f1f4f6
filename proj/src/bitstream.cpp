#include "scdrl/bitstream.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "scdrl/util.hpp"

namespace scdrl {

const char* encoding_name(Encoding enc) {
    return enc == Encoding::Unipolar ? "unipolar" : "bipolar";
}

BitStream::BitStream(std::uint32_t length, Encoding enc)
    : length_(length), encoding_(enc) {
    if (length == 0) {
        throw std::invalid_argument("BitStream length must be >= 1");
    }
    words_.assign((length + 63) / 64, 0);
}

std::uint64_t BitStream::popcount() const {
    std::uint64_t n = 0;
    for (std::uint64_t w : words_) {
        n += std::popcount(w);
    }
    return n;
}

double BitStream::decode() const {
    double p = static_cast<double>(popcount()) / length_;
    return encoding_ == Encoding::Unipolar ? p : 2.0 * p - 1.0;
}

std::uint64_t BitStream::tail_mask() const {
    std::uint32_t rem = length_ & 63;
    return rem == 0 ? ~0ULL : ((1ULL << rem) - 1);
}

void BitStream::mask_tail() {
    words_.back() &= tail_mask();
}

std::string BitStream::debug_dump() const {
    std::string out = "L=" + std::to_string(length_) +
                      " enc=" + encoding_name(encoding_) + "\n";
    char buf[20];
    for (std::uint64_t w : words_) {
        std::snprintf(buf, sizeof(buf), "%016llx\n",
                      static_cast<unsigned long long>(w));
        out += buf;
    }
    return out;
}

std::uint64_t default_lfsr_taps(std::uint32_t width) {
    // Maximal-length Fibonacci tap positions, mask bit (pos-1).
    static const std::uint32_t kTaps[25][4] = {
        {}, {}, {2, 1}, {3, 2}, {4, 3}, {5, 3}, {6, 5}, {7, 6},
        {8, 6, 5, 4}, {9, 5}, {10, 7}, {11, 9}, {12, 11, 10, 4},
        {13, 12, 11, 8}, {14, 13, 12, 2}, {15, 14}, {16, 15, 13, 4},
        {17, 14}, {18, 11}, {19, 18, 17, 14}, {20, 17}, {21, 19},
        {22, 21}, {23, 18}, {24, 23, 22, 17}};
    if (width < 2 || width > 24) {
        throw std::invalid_argument("LFSR width must be in [2, 24]");
    }
    std::uint64_t mask = 0;
    for (std::uint32_t pos : kTaps[width]) {
        if (pos != 0) {
            mask |= 1ULL << (pos - 1);
        }
    }
    return mask;
}

namespace {

std::uint64_t width_mask(std::uint32_t width) {
    return width == 64 ? ~0ULL : ((1ULL << width) - 1);
}

// Comparators read the LFSR register in reverse bit order; consecutive
// register states differ by a shift, and reversing makes the low-order
// comparison bits churn instead of persisting across cycles.
std::uint64_t bit_reverse(std::uint64_t v, std::uint32_t width) {
    std::uint64_t out = 0;
    for (std::uint32_t i = 0; i < width; ++i) {
        out = (out << 1) | ((v >> i) & 1u);
    }
    return out;
}

}  // namespace

Lfsr::Lfsr(const SngConfig& cfg)
    : state_(cfg.seed & width_mask(cfg.width)),
      taps_(cfg.taps != 0 ? cfg.taps : default_lfsr_taps(cfg.width)),
      width_(cfg.width) {
    if (state_ == 0) {
        throw std::invalid_argument(
            "LFSR seed must be nonzero (XOR feedback sticks at zero)");
    }
}

std::uint64_t Lfsr::next_word() {
    std::uint64_t out = state_;
    std::uint64_t fb = std::popcount(state_ & taps_) & 1u;
    state_ = ((state_ << 1) | fb) & width_mask(width_);
    return out;
}

std::pair<std::uint64_t, std::uint64_t> lfsr_next(std::uint64_t state,
                                                  const SngConfig& cfg) {
    SngConfig c = cfg;
    c.seed = state;
    Lfsr l(c);
    std::uint64_t out = l.next_word();
    return {out, l.state()};
}

std::uint32_t resolve_sng_width(const SngConfig& cfg, std::uint32_t length) {
    if (cfg.width != 0) {
        return cfg.width;
    }
    std::uint32_t w = 4;
    while ((1ULL << w) < length && w < 24) {
        ++w;
    }
    return w;
}

Sng::Sng(const SngConfig& cfg) : cfg_(cfg) {}

BitStream Sng::encode(double value, std::uint32_t length, Encoding enc) {
    double p;
    if (enc == Encoding::Bipolar) {
        if (value < -1.0 || value > 1.0 || !std::isfinite(value)) {
            throw std::out_of_range("bipolar encode requires value in [-1, 1]");
        }
        p = (value + 1.0) / 2.0;
    } else {
        if (value < 0.0 || value > 1.0 || !std::isfinite(value)) {
            throw std::out_of_range("unipolar encode requires value in [0, 1]");
        }
        p = value;
    }
    const std::uint32_t width = resolve_sng_width(cfg_, length);
    const std::uint64_t mask = width_mask(width);
    BitStream out(length, enc);
    // Comparison words cover [0, 2^w - 1]; one full de Bruijn period of
    // length 2^w hits every word exactly once.
    auto threshold =
        static_cast<std::uint64_t>(std::llround(p * (mask + 1.0)));
    if (cfg_.kind == SngConfig::Kind::Lfsr) {
        if ((cfg_.seed & mask) == 0) {
            throw std::invalid_argument(
                "LFSR seed must be nonzero (XOR feedback sticks at zero)");
        }
        const std::uint64_t taps =
            cfg_.taps != 0 ? cfg_.taps : default_lfsr_taps(width);
        const std::uint64_t low_mask = mask >> 1;
        std::uint64_t state = cfg_.seed & mask;
        std::uint64_t seed_copy = cfg_.seed;
        const std::uint64_t scramble = splitmix64(seed_copy) & mask;
        for (std::uint32_t i = 0; i < length; ++i) {
            std::uint64_t word = bit_reverse(state, width) ^ scramble;
            out.set_bit(i, word < threshold);
            std::uint64_t fb = std::popcount(state & taps) & 1u;
            fb ^= (state & low_mask) == 0;  // zero-state insertion
            state = ((state << 1) | fb) & mask;
        }
    } else {
        for (std::uint32_t i = 0; i < length; ++i) {
            std::uint64_t s = cfg_.seed + 0x632be59bd9b4e019ULL * ++counter_;
            std::uint64_t word = splitmix64(s) & mask;
            out.set_bit(i, word < threshold);
        }
    }
    return out;
}

BitStream encode(double value, std::uint32_t length, Encoding enc,
                 const SngConfig& cfg) {
    Sng sng(cfg);
    return sng.encode(value, length, enc);
}

double decode(const BitStream& s) {
    return s.decode();
}

std::pair<std::vector<double>, ScaleInfo> prescale(
    std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("prescale requires a non-empty sequence");
    }
    ScaleInfo info;
    info.lo = values[0];
    info.hi = values[0];
    double max_abs = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("prescale requires finite values");
        }
        info.lo = std::min(info.lo, v);
        info.hi = std::max(info.hi, v);
        max_abs = std::max(max_abs, std::abs(v));
    }
    info.factor = std::max(1.0, max_abs);
    std::vector<double> scaled(values.begin(), values.end());
    for (double& v : scaled) {
        v /= info.factor;
    }
    return {std::move(scaled), info};
}

SngConfig sng_config_for_stream(const SeedSplitter& seeds,
                                std::uint64_t stream_index,
                                std::uint32_t width) {
    SngConfig cfg;
    cfg.width = width;
    cfg.seed = seeds.derive(stream_index) | 1u;
    return cfg;
}

}  // namespace scdrl
