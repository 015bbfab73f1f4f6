#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace scdrl {

// splitmix64; used to derive independent sub-seeds from one root seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic seed tree: derive(i) is a pure function of (root, i).
class SeedSplitter {
  public:
    explicit SeedSplitter(std::uint64_t root) : root_(root) {}

    std::uint64_t derive(std::uint64_t index) const {
        std::uint64_t s = root_ ^ (0x5851f42d4c957f2dULL * (index + 1));
        return splitmix64(s);
    }

    SeedSplitter child(std::uint64_t index) const {
        return SeedSplitter(derive(index));
    }

    std::uint64_t root() const { return root_; }

  private:
    std::uint64_t root_;
};

using Rng = std::mt19937_64;

}  // namespace scdrl
