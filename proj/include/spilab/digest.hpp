// Stable hashing and number formatting used for run directories and file
// output. Outputs must be byte-identical across runs with the same inputs, so
// doubles are always printed through format_double (shortest round-trip form)
// and digests use FNV-1a over the exact bytes written.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace spilab {

/// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hex rendering of a 64-bit hash, zero-padded to 16 characters.
std::string hex64(std::uint64_t value);

/// Shortest decimal string that parses back to exactly the same double.
/// Used for every double written to CSV or JSON.
std::string format_double(double value);

}  // namespace spilab
