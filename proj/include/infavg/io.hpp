#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include "infavg/slowfast.hpp"

namespace infavg {

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);

/// Provenance written at the top of every output file.
struct OutputMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string command;
  std::string comment_line() const;
};

/// Shortest round-trip representation, so reruns are byte-identical.
std::string format_double(double v);

/// `# ...` line, a header row, then one row per entry.
void write_csv(const std::filesystem::path& path, const OutputMeta& meta,
               const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// Columns t,x1..xd.
void write_trajectory_csv(const std::filesystem::path& path, const OutputMeta& meta, const TrajectoryGrid& grid);

/// Pretty JSON with a "_meta" member carrying the provenance.
void write_json(const std::filesystem::path& path, const OutputMeta& meta, nlohmann::json body);

}  // namespace infavg
