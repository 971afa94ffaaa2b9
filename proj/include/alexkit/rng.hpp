#pragma once

#include <cstdint>

namespace alexkit {

/// Splittable counter-based generator (splitmix64 core).
///
/// Every sampling routine in the library draws from one of these so that a
/// run is reproducible from a single seed, independent of platform and of
/// how work is divided between threads. std:: distributions are avoided on
/// purpose: their streams are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Child stream addressed by label; a pure function of (current state, label),
    /// so sibling streams never interleave regardless of evaluation order.
    Rng split(std::uint64_t label) const {
        Rng child(state_ ^ (0x9e3779b97f4a7c15ull * (label + 0x632be59bd9b4e019ull)));
        child.next_u64();
        return child;
    }

private:
    std::uint64_t state_;
};

} // namespace alexkit
