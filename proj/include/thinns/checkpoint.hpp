#pragma once

#include "thinns/spectral_field.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>

namespace thinns {

/// Checkpoint layout (all integers and floats little-endian):
///
///   bytes [0, 8)    magic "THNSCKP1"
///   bytes [8, 16)   uint64 H, length of the JSON header
///   bytes [16, 16+H) UTF-8 JSON header: format_version, domain, components,
///                   time, step, index_order, coefficient_count, extra
///   then coefficient_count pairs (re, im) of float64 in storage order:
///   component-major, then m, then n, then p (p fastest), each index running
///   from -n_i to n_i.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  SpectralField field;
  double time = 0.0;
  std::int64_t step = 0;
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json domain_to_json(const DomainSpec& d);
DomainSpec domain_from_json(const nlohmann::json& j);

/// Throws std::runtime_error on I/O failure.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
/// Throws std::runtime_error on I/O failure or malformed content.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace thinns
