#include "infavg/io.hpp"

#include <charconv>
#include <fstream>

#include "infavg/errors.hpp"

namespace infavg {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

std::string OutputMeta::comment_line() const {
  return "# infavg command=" + command + " config_hash=" + config_hash + " seed=" + std::to_string(seed);
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, end);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const OutputMeta& meta,
               const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  out << meta.comment_line() << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw ContractViolation("csv row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const OutputMeta& meta, const TrajectoryGrid& grid) {
  std::vector<std::string> header{"t"};
  for (int i = 1; i <= grid.dim(); ++i) header.push_back("x" + std::to_string(i));
  std::vector<std::vector<double>> rows;
  rows.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> row{grid.time(k)};
    const auto x = grid.state(k);
    row.insert(row.end(), x.data(), x.data() + x.size());
    rows.push_back(std::move(row));
  }
  write_csv(path, meta, header, rows);
}

void write_json(const std::filesystem::path& path, const OutputMeta& meta, nlohmann::json body) {
  auto out = open_out(path);
  body["_meta"] = {{"command", meta.command}, {"config_hash", meta.config_hash}, {"seed", meta.seed}};
  out << body.dump(2) << '\n';
}

}  // namespace infavg
