#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cyclecirc {

inline constexpr std::string_view kLibraryVersion = "0.1.0";

// Shortest round-trip decimal form, identical across runs and platforms with
// IEEE doubles. All emitted files go through this.
std::string format_double(double x);

// FNV-1a 64-bit as a lowercase hex string; used for input digests embedded in
// reports.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 1469598103934665603ull);
std::string digest_hex(std::string_view bytes);

} // namespace cyclecirc
