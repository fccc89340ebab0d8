#pragma once

// Seedable random streams. A stream is identified by (seed, stream_id); the
// pair is expanded through std::seed_seq into a 64-bit Mersenne Twister, so
// distinct ids from one seed give independent, individually replayable
// sequences.
//
// Stream allocation used throughout the library and CLI:
//   0  data generation (simulated design, labels, true parameters)
//   1  momentum / velocity refresh
//   2  stepsize randomization
//   3  acceptance coin
//   4  Fisher-information Monte Carlo
// Pilot chains of the stepsize search use ids 16 + 4k + {1,2,3}.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>

#include "linalg.hpp"

namespace splithmc {

namespace stream_id {
inline constexpr std::uint64_t data = 0;
inline constexpr std::uint64_t momentum = 1;
inline constexpr std::uint64_t stepsize = 2;
inline constexpr std::uint64_t accept = 3;
inline constexpr std::uint64_t fisher = 4;
inline constexpr std::uint64_t pilot_base = 16;
} // namespace stream_id

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t id) : id_(id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                          0x5eed5eedU};
        engine_.seed(seq);
    }

    std::uint64_t id() const { return id_; }

    double normal() { return gauss_(engine_); }

    Vector normal(Index n) {
        if (n < 1) throw std::invalid_argument("RngStream::normal: n must be >= 1");
        Vector out(n);
        for (Index i = 0; i < n; ++i) out(i) = gauss_(engine_);
        return out;
    }

    // Variate in [lo, hi).
    double uniform(double lo, double hi) {
        if (!(lo < hi)) {
            std::ostringstream msg;
            msg << "RngStream::uniform: need lo < hi, got [" << lo << ", " << hi << ")";
            throw std::invalid_argument(msg.str());
        }
        const double u = std::generate_canonical<double, 53>(engine_);
        const double x = lo + (hi - lo) * u;
        return x < hi ? x : std::nextafter(hi, lo);
    }

    // Consumes exactly one uniform regardless of p.
    bool bernoulli(double p) {
        if (!(p >= 0.0 && p <= 1.0)) {
            std::ostringstream msg;
            msg << "RngStream::bernoulli: probability " << p << " outside [0, 1]";
            throw std::invalid_argument(msg.str());
        }
        return uniform(0.0, 1.0) < p;
    }

private:
    std::uint64_t id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> gauss_;
};

} // namespace splithmc
