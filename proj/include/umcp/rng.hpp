#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace umcp {

/// Small self-contained PRNG (splitmix64). All randomized code in this
/// library draws through it so that results are reproducible bit-for-bit
/// for a given seed, independently of the standard library in use.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Deterministically derives a child seed from a master seed and a list of
/// stream indices (drop number, link index, ...). Used to give independent
/// work units their own streams so evaluation order never matters.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    Rng h(master);
    std::uint64_t s = h.next_u64();
    for (std::uint64_t v : path) {
        Rng m(s ^ (v + 0x9e3779b97f4a7c15ULL));
        s = m.next_u64();
    }
    return s;
}

}  // namespace umcp
