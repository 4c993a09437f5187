#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace codonsoup {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from a base seed and a couple of indices.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept
{
    return splitmix64(splitmix64(splitmix64(base) ^ a) + b);
}

// Seeded random stream. The engine output is fully specified by the standard;
// the distribution helpers below are written out so draws are identical across
// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    std::uint32_t next32() { return static_cast<std::uint32_t>(engine_() >> 32); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()
                                    - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x = engine_();
        while (x >= limit)
            x = engine_();
        return x % n;
    }

    /// Uniform integer in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool chance(double p)
    {
        if (p <= 0.0)
            return false;
        if (p >= 1.0)
            return true;
        return uniform() < p;
    }

    /// Number of failed Bernoulli(p) trials before the first success.
    /// Used to skip directly to the next hit of a per-site process.
    std::uint64_t geometric(double p)
    {
        if (p >= 1.0)
            return 0;
        if (p <= 0.0)
            return std::numeric_limits<std::uint64_t>::max();
        const double u = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double k = std::floor(std::log(u) / std::log1p(-p));
        if (!(k < 1.8e19))
            return std::numeric_limits<std::uint64_t>::max();
        return static_cast<std::uint64_t>(k);
    }

    std::string state() const
    {
        std::ostringstream out;
        out << engine_;
        return out.str();
    }

    /// Returns false (and leaves the stream untouched) when `state` does not parse.
    bool restore(const std::string& state)
    {
        std::istringstream in(state);
        std::mt19937_64 parsed;
        in >> parsed;
        if (in.fail())
            return false;
        engine_ = parsed;
        return true;
    }

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace codonsoup
