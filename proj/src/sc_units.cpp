#include "scdrl/sc_units.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace scdrl {

namespace {

void require_same_shape(const BitStream& a, const BitStream& b) {
    if (a.length() != b.length()) {
        throw std::invalid_argument("stream length mismatch");
    }
    if (a.encoding() != b.encoding()) {
        throw std::invalid_argument("stream encoding mismatch");
    }
}

}  // namespace

BitStream xnor_multiply(const BitStream& a, const BitStream& b) {
    require_same_shape(a, b);
    if (a.encoding() != Encoding::Bipolar) {
        throw std::invalid_argument("xnor_multiply requires bipolar streams");
    }
    BitStream out(a.length(), Encoding::Bipolar);
    auto wa = a.words();
    auto wb = b.words();
    auto wo = out.words();
    for (std::size_t i = 0; i < wo.size(); ++i) {
        wo[i] = ~(wa[i] ^ wb[i]);
    }
    out.mask_tail();
    return out;
}

BitStream or_add(std::span<const BitStream> streams) {
    if (streams.empty()) {
        throw std::invalid_argument("or_add requires at least one stream");
    }
    BitStream out = streams[0];
    for (std::size_t s = 1; s < streams.size(); ++s) {
        require_same_shape(out, streams[s]);
        auto wi = streams[s].words();
        auto wo = out.words();
        for (std::size_t i = 0; i < wo.size(); ++i) {
            wo[i] |= wi[i];
        }
    }
    return out;
}

BitStream mux_add(std::span<const BitStream> streams,
                  const SngConfig& select_cfg) {
    if (streams.empty()) {
        throw std::invalid_argument("mux_add requires at least one stream");
    }
    for (std::size_t s = 1; s < streams.size(); ++s) {
        require_same_shape(streams[0], streams[s]);
    }
    const auto n = static_cast<std::uint64_t>(streams.size());
    SngConfig cfg = select_cfg;
    cfg.width = std::max(8u, resolve_sng_width(select_cfg, streams[0].length()));
    Lfsr select(cfg);
    const std::uint64_t range = (select.width() == 64)
                                    ? ~0ULL
                                    : ((1ULL << select.width()) - 1);
    // Rejection sampling keeps the select exactly uniform over n.
    const std::uint64_t limit = range - (range % n);
    BitStream out(streams[0].length(), streams[0].encoding());
    for (std::uint32_t i = 0; i < out.length(); ++i) {
        std::uint64_t w;
        do {
            w = select.next_word() - 1;  // LFSR states are 1..range
        } while (w >= limit);
        out.set_bit(i, streams[w % n].bit(i));
    }
    return out;
}

ApcDesign ApcDesign::original(int n_inputs) {
    if (n_inputs < 1) {
        throw std::invalid_argument("APC needs at least 1 input");
    }
    if (n_inputs == 1) {
        ApcDesign d;
        d.n_inputs = 1;
        d.passthrough = 0;
        d.output_width = 1;
        return d;
    }
    ApcDesign d;
    d.n_inputs = n_inputs;
    d.variant = ApcVariant::Original;
    int n_pairs = n_inputs / 2;
    for (int p = 0; p < n_pairs; ++p) {
        d.pairs.push_back({2 * p, 2 * p + 1,
                           (p % 2 == 0) ? PairGate::And : PairGate::Or});
    }
    if (n_inputs % 2 != 0) {
        d.passthrough = n_inputs - 1;
    }
    d.output_width = static_cast<int>(std::ceil(std::log2(n_inputs))) + 1;
    d.tree_depth = static_cast<int>(std::ceil(std::log2(std::max(2, n_pairs))));
    return d;
}

ApcDesign ApcDesign::improved(int n_inputs) {
    ApcDesign d = original(n_inputs);
    d.variant = ApcVariant::Improved;
    if (d.pairs.empty()) {
        return d;
    }
    for (auto& pair : d.pairs) {
        pair.gate = PairGate::AltAndOr;
    }
    // The last pair of inputs feeds a half adder directly.
    d.pairs.back().gate = PairGate::HalfAdder;
    return d;
}

std::vector<std::uint16_t> apc_add(const ApcDesign& design,
                                   std::span<const BitStream> streams) {
    if (static_cast<int>(streams.size()) != design.n_inputs) {
        throw std::invalid_argument("APC arity mismatch");
    }
    const std::uint32_t length = streams[0].length();
    for (const auto& s : streams) {
        if (s.length() != length) {
            throw std::invalid_argument("stream length mismatch");
        }
    }
    std::vector<std::uint16_t> counts(length);
    for (std::uint32_t i = 0; i < length; ++i) {
        int acc = 0;
        for (const auto& pair : design.pairs) {
            int a = streams[pair.a].bit(i);
            int b = streams[pair.b].bit(i);
            switch (pair.gate) {
                case PairGate::And:
                    acc += 2 * (a & b);
                    break;
                case PairGate::Or:
                    acc += 2 * (a | b);
                    break;
                case PairGate::HalfAdder:
                    acc += a + b;
                    break;
                case PairGate::AltAndOr:
                    acc += 2 * ((i % 2 == 0) ? (a & b) : (a | b));
                    break;
            }
        }
        if (design.passthrough >= 0) {
            acc += streams[design.passthrough].bit(i);
        }
        counts[i] = static_cast<std::uint16_t>(acc);
    }
    return counts;
}

std::vector<std::uint16_t> exact_counts(std::span<const BitStream> streams) {
    const std::uint32_t length = streams[0].length();
    std::vector<std::uint16_t> counts(length);
    for (std::uint32_t i = 0; i < length; ++i) {
        int acc = 0;
        for (const auto& s : streams) {
            acc += s.bit(i);
        }
        counts[i] = static_cast<std::uint16_t>(acc);
    }
    return counts;
}

namespace {

struct Wire {
    std::uint8_t stored = 0;
    std::uint8_t inverted = 0;  // stored = true_bit XOR inverted
};

// Inverse mirror FA: emits complemented sum/carry of its true inputs.
void mirror_full_adder(Wire x, Wire y, Wire z, Wire& sum, Wire& carry) {
    std::uint8_t a = x.stored ^ x.inverted;
    std::uint8_t b = y.stored ^ y.inverted;
    std::uint8_t c = z.stored ^ z.inverted;
    std::uint8_t s = a ^ b ^ c;
    std::uint8_t cy = (a & b) | (b & c) | (a & c);
    sum = {static_cast<std::uint8_t>(s ^ 1), 1};
    carry = {static_cast<std::uint8_t>(cy ^ 1), 1};
}

}  // namespace

std::uint32_t tree_popcount(std::span<const std::uint8_t> bits, bool inverted) {
    // Bits per weight level; reduce with FA/HA until one bit per level.
    std::vector<std::vector<Wire>> levels(1);
    for (std::uint8_t b : bits) {
        levels[0].push_back({b, 0});
    }
    bool again = true;
    while (again) {
        again = false;
        for (std::size_t lvl = 0; lvl < levels.size(); ++lvl) {
            if (levels[lvl].size() <= 1) {
                continue;
            }
            again = true;
            if (lvl + 1 >= levels.size()) {
                levels.emplace_back();  // may reallocate; bind cur after
            }
            auto& cur = levels[lvl];
            std::vector<Wire> next;
            std::size_t i = 0;
            while (cur.size() - i >= 3) {
                Wire s, c;
                if (inverted) {
                    mirror_full_adder(cur[i], cur[i + 1], cur[i + 2], s, c);
                } else {
                    std::uint8_t a = cur[i].stored, b = cur[i + 1].stored,
                                 z = cur[i + 2].stored;
                    s = {static_cast<std::uint8_t>(a ^ b ^ z), 0};
                    c = {static_cast<std::uint8_t>((a & b) | (b & z) | (a & z)),
                         0};
                }
                next.push_back(s);
                levels[lvl + 1].push_back(c);
                i += 3;
            }
            if (cur.size() - i == 2) {
                Wire s, c;
                if (inverted) {
                    mirror_full_adder(cur[i], cur[i + 1], Wire{0, 0}, s, c);
                } else {
                    std::uint8_t a = cur[i].stored, b = cur[i + 1].stored;
                    s = {static_cast<std::uint8_t>(a ^ b), 0};
                    c = {static_cast<std::uint8_t>(a & b), 0};
                }
                next.push_back(s);
                levels[lvl + 1].push_back(c);
            } else if (cur.size() - i == 1) {
                next.push_back(cur[i]);
            }
            cur = std::move(next);
        }
    }
    std::uint32_t result = 0;
    for (std::size_t lvl = 0; lvl < levels.size(); ++lvl) {
        if (!levels[lvl].empty()) {
            const Wire& w = levels[lvl][0];
            std::uint32_t bit = (w.stored ^ w.inverted) & 1u;
            result |= bit << lvl;
        }
    }
    return result;
}

double apc_inaccuracy(const ApcDesign& design, std::uint32_t length,
                      std::uint32_t trials, Rng& rng) {
    if (trials < 100) {
        throw std::invalid_argument("apc_inaccuracy requires trials >= 100");
    }
    std::uniform_real_distribution<double> uval(0.0, 1.0);
    double acc = 0.0;
    const int n = design.n_inputs;
    std::vector<BitStream> streams;
    for (std::uint32_t t = 0; t < trials; ++t) {
        streams.clear();
        SeedSplitter seeds(rng());
        for (int i = 0; i < n; ++i) {
            Sng sng(sng_config_for_stream(seeds, i));
            streams.push_back(sng.encode(uval(rng), length, Encoding::Unipolar));
        }
        auto sc = apc_add(design, streams);
        auto exact = exact_counts(streams);
        long long sc_total = 0, exact_total = 0;
        for (std::uint32_t i = 0; i < length; ++i) {
            sc_total += sc[i];
            exact_total += exact[i];
        }
        acc += std::abs(static_cast<double>(sc_total - exact_total)) /
               (static_cast<double>(n) * length);
    }
    return acc / trials;
}

StanhFsm::StanhFsm(int k_states) : k(k_states), state(k_states / 2) {
    if (k < 2 || k % 2 != 0) {
        throw std::invalid_argument("Stanh requires an even K >= 2");
    }
}

bool StanhFsm::step(bool in_bit) {
    if (in_bit) {
        state = std::min(state + 1, k - 1);
    } else {
        state = std::max(state - 1, 0);
    }
    return state >= k / 2;
}

BitStream stanh(const BitStream& input, int k) {
    if (input.encoding() != Encoding::Bipolar) {
        throw std::invalid_argument("stanh requires a bipolar input stream");
    }
    StanhFsm fsm(k);
    BitStream out(input.length(), Encoding::Bipolar);
    for (std::uint32_t i = 0; i < input.length(); ++i) {
        out.set_bit(i, fsm.step(input.bit(i)));
    }
    return out;
}

SaturatedCounter SaturatedCounter::for_fan_in(int n) {
    if (n < 1) {
        throw std::invalid_argument("fan-in must be >= 1");
    }
    SaturatedCounter c;
    c.width = std::bit_width(static_cast<unsigned>(std::max(1, n - 1))) + 1;
    c.max_value = (1 << c.width) - 1;
    c.value = (c.max_value + 1) / 2;
    return c;
}

SaturatedCounter SaturatedCounter::with_span(int span) {
    if (span < 2) {
        throw std::invalid_argument("counter span must be >= 2");
    }
    SaturatedCounter c;
    c.max_value = span - 1;
    c.width = std::bit_width(static_cast<unsigned>(c.max_value));
    c.value = (c.max_value + 1) / 2;
    return c;
}

bool SaturatedCounter::step(int count, int apc_n) {
    if (count < 0 || count > apc_n) {
        throw std::out_of_range("APC count out of [0, n]");
    }
    value = std::clamp(value + 2 * count - apc_n, 0, max_value);
    return value >= (max_value + 1) / 2;
}

BitStream btanh(std::span<const std::uint16_t> counts, SaturatedCounter counter,
                int apc_n) {
    BitStream out(static_cast<std::uint32_t>(counts.size()), Encoding::Bipolar);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out.set_bit(static_cast<std::uint32_t>(i),
                    counter.step(counts[i], apc_n));
    }
    return out;
}

}  // namespace scdrl
