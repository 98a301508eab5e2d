#ifndef PATHCTRL_RNG_HPP
#define PATHCTRL_RNG_HPP

#include <cstdint>
#include <random>

namespace pathctrl {

// Deterministic random helpers.  Distributions are pinned by hand (instead
// of <random> distribution objects) so that a given seed yields the same
// stream on every standard library, which keeps result files byte-stable.
class rng {
  public:
    explicit rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double canonical() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * canonical();
    }

    // Uniform integer in {lo, ..., hi} inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(gen_() % span);
    }

    std::uint64_t raw() { return gen_(); }

    // Stable derived seed for sub-streams (one per sweep cell).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL + index * 0xbf58476d1ce4e5b9ULL);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace pathctrl

#endif
