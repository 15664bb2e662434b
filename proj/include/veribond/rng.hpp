#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace veribond {

/// xoshiro256++ generator (Blackman & Vigna, public domain reference
/// algorithm). Chosen over std engines because the full 256-bit state is
/// trivially serializable — every event in the log records it, and replay
/// restores it — and because output is identical on every platform.
class Rng {
public:
    using State = std::array<std::uint64_t, 4>;

    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        // splitmix64 expansion of the seed; a zero state is unreachable.
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Unbiased integer in [0, bound) via rejection.
    std::uint64_t uniform_index(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::uniform_index: zero bound");
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform_real() < p; }

    /// Inverse-CDF exponential sample with the given mean.
    double exponential(double mean) { return -mean * std::log1p(-uniform_real()); }

    /// Box-Muller normal sample. No cached spare: keeps the serialized state
    /// the complete description of the generator.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform_real();
        const double u2 = uniform_real();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(6.283185307179586476925287 * u2);
    }

    double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

    State state() const { return state_; }
    void set_state(const State& s) { state_ = s; }

    std::string state_hex() const { return state_to_hex(state_); }

    static std::string state_to_hex(const State& s) {
        std::ostringstream os;
        os << std::hex;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) os << ',';
            os << s[i];
        }
        return os.str();
    }

    static State state_from_hex(const std::string& text) {
        State s{};
        std::istringstream is(text);
        std::string part;
        for (auto& word : s) {
            if (!std::getline(is, part, ','))
                throw std::invalid_argument("Rng: malformed state string");
            word = std::stoull(part, nullptr, 16);
        }
        return s;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    State state_{};
};

}  // namespace veribond
