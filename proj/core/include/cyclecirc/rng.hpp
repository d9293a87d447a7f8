#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace cyclecirc {

// Philox4x32-10 counter-based generator. A stream is (seed, stream id); the
// position within a stream is a plain 64-bit counter, so replicas drawn from
// distinct stream ids are independent and reproducible no matter how work is
// scheduled across threads.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    // Raw 4x32 block for counter `ctr` (used by known-answer tests).
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key);

    std::uint64_t next_u64() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto out = block({static_cast<std::uint32_t>(counter_),
                          static_cast<std::uint32_t>(counter_ >> 32), stream_[0], stream_[1]},
                         key_);
        ++counter_;
        spare_ = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        have_spare_ = true;
        return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    }

    // Uniform on [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Exponential with the given rate (> 0).
    double next_exponential(double rate) { return -std::log1p(-next_double()) / rate; }

    // Index sampled from `weights` (nonnegative, sum ~ total > 0), by inverse CDF.
    template <typename Weights>
    int next_index(const Weights& weights, int n, double total) {
        double u = next_double() * total;
        double acc = 0.0;
        int last_positive = -1;
        for (int i = 0; i < n; ++i) {
            double w = weights(i);
            if (w > 0.0) last_positive = i;
            acc += w;
            if (u < acc) return i;
        }
        return last_positive; // numeric slack lands on the last positive entry
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t counter_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
};

} // namespace cyclecirc
