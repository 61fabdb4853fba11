#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "infavg/config.hpp"
#include "infavg/io.hpp"

using namespace infavg;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "infavg_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("config_io") {

TEST_CASE("defaults parse and hash stably") {
  const auto a = parse_config(json::object());
  CHECK(a.system.kind == "toy");
  CHECK(a.field.dim == 1);
  CHECK(config_hash(a) == config_hash(parse_config(json::object())));
  CHECK(config_hash(a) != config_hash(parse_config(json{{"T", 2.0}})));
}

TEST_CASE("schema violations are config errors") {
  CHECK_THROWS_AS(parse_config(json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"eps", json::array()}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"T", "long"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"system", {{"kind", "pinball"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"system", {{"kind", "billiard"}, {"disks", {{{"radius", 0.3}}}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"field": {"terms": [{"psi": {"x": 1}}]}})")), ConfigError);
  CHECK_THROWS_AS(load_config(scratch("missing.json")), ConfigError);
}

TEST_CASE("an uncentered term is refused") {
  const auto cfg = parse_config(json::parse(R"({"field": {"terms": [{"h": {"kind": "one"}, "psi": {"0": 1}}]}})"));
  CHECK_THROWS_AS(build_toy_field(cfg.field), ConfigError);
  const auto ok = parse_config(json::parse(R"({"field": {"terms": [{"h": {"kind": "one"}, "psi": {"0": 1, "1": -1}}]}})"));
  CHECK_NOTHROW(build_toy_field(ok.field));
}

TEST_CASE("billiard geometry is validated at load") {
  const json bad = json::parse(R"({"system": {"kind": "billiard", "disks": [{"center": [0, 0], "radius": 0.45}, {"center": [0.5, 0.5], "radius": 0.3}]}})");
  CHECK_THROWS_AS(parse_config(bad), GeometryError);
}

TEST_CASE("comments are allowed in config files") {
  const auto path = scratch("commented.json");
  std::ofstream(path) << "// toy run\n{\"T\": 0.5 /* short */}\n";
  CHECK(load_config(path).t_end == 0.5);
}

TEST_CASE("doubles round-trip through the writer") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("outputs carry the header and are byte-identical on rewrite") {
  const OutputMeta meta{"abc123", 42, "toy-run"};
  const auto p1 = scratch("a.csv"), p2 = scratch("b.csv");
  const std::vector<std::vector<double>> rows{{0.0, 1.0 / 3.0}, {1.0, std::exp(1.0)}};
  write_csv(p1, meta, {"t", "x1"}, rows);
  write_csv(p2, meta, {"t", "x1"}, rows);
  const std::string a = slurp(p1);
  CHECK(a == slurp(p2));
  CHECK(a.rfind("# infavg command=toy-run config_hash=abc123 seed=42\n", 0) == 0);
  CHECK(a.find("\nt,x1\n") != std::string::npos);

  const auto j = scratch("a.json");
  write_json(j, meta, json{{"value", 1.5}});
  const json back = json::parse(slurp(j));
  CHECK(back["_meta"]["seed"] == 42);
  CHECK(back["_meta"]["config_hash"] == "abc123");
}

}
