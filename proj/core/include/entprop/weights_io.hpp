#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "entprop/network_spec.hpp"

namespace entprop {

// ENTW container, all integers and floats little-endian:
//   "ENTW" | version u32 = 1 | entry count u32
//   entry: kind u8 | dim count u8 | dims u32 x count | payload f64 x prod(dims)
// Kinds:
//   0 dense   dims [out, in]                      weights row-major
//   1 conv2d  dims [filters, in_channels, p, q]   weights row-major
//   2 bias    dims [n]                            bias of the preceding weight entry
//   3 maxpool2  no dims, no payload
//   4 activation  dims [code] (0 sigmoid, 1 leaky_relu, 2 softmax), no payload
// A weight entry without a following bias entry gets a zero bias.
inline constexpr std::uint32_t kEntwVersion = 1;

enum class EntryKind : std::uint8_t { dense = 0, conv2d = 1, bias = 2, maxpool2 = 3, activation = 4 };

struct WeightDump {
  NetworkSpec spec;
  Parameters params;
};

std::vector<std::uint8_t> serialize_dump(const NetworkSpec& spec, const Parameters& params);
WeightDump parse_dump(std::span<const std::uint8_t> bytes);

/// Throws IoError on write failure.
void write_dump(const NetworkSpec& spec, const Parameters& params, const std::filesystem::path& path);
/// Throws FormatError (with the byte offset) on malformed input, IoError if unreadable.
WeightDump read_dump(const std::filesystem::path& path);

}  // namespace entprop
