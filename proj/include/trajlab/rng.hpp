#pragma once

#include <cmath>
#include <cstdint>

namespace trajlab {

// splitmix64-based stream with Box-Muller gaussians. Self-contained so that
// runs are reproducible independent of the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Derive an independent substream, e.g. per sample index.
    static Rng substream(std::uint64_t master, std::uint64_t index) {
        Rng mix(master);
        mix.next_u64();
        return Rng(mix.next_u64() ^ (index * 0x9e3779b97f4a7c15ULL) ^ mix_index(index));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t mix_index(std::uint64_t i) {
        std::uint64_t z = i + 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 30)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 29);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace trajlab
