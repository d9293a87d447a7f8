#include "cyclecirc/rng.hpp"

namespace cyclecirc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> round_once(std::array<std::uint32_t, 4> x,
                                               std::array<std::uint32_t, 2> k) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

} // namespace

std::array<std::uint32_t, 4> Philox::block(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 9; ++r) {
        ctr = round_once(ctr, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return round_once(ctr, key);
}

} // namespace cyclecirc
