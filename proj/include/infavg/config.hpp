#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "infavg/billiard.hpp"
#include "infavg/field.hpp"
#include "infavg/shift_toy.hpp"

namespace infavg {

struct GSpec {
  std::string kind = "constant";  ///< constant | sin
  std::vector<double> v{1.0};
  double s = 0.0;
};

struct HSpec {
  /// toy: phi | bits | one;  billiard: phi | sin_theta | normal_x | one
  std::string kind = "phi";
  int k = 4;           ///< depth for "bits"
  double scale = 1.0;  ///< multiplies h
};

struct TermSpec {
  GSpec g;
  HSpec h;
  std::map<std::int64_t, double> psi{{0, 1.0}};
  std::string label;
};

struct DriftSpec {
  std::string kind = "linear";  ///< linear | zero | neg_sin
  std::vector<std::vector<double>> a{{-1.0}};
  double c = 1.0;
};

struct FieldSpec {
  int dim = 1;
  std::vector<TermSpec> terms{TermSpec{}};
  DriftSpec drift;
};

struct SystemSpec {
  std::string kind = "toy";  ///< toy | billiard
  BilliardConfig billiard = default_billiard();
};

/// Everything a run needs; reproducible from the file and the seed.
struct ExperimentConfig {
  SystemSpec system;
  FieldSpec field;
  std::vector<double> x0{1.0};
  std::vector<double> eps{1e-2, 1e-3};
  double t_end = 1.0;
  int substeps = 4;
  double dt_limit = 1e-4;
  double sigma = -1.0;  ///< Σ; −1 estimates it
  std::int64_t n_orbits = 1000;
  std::int64_t n_paths = 1000;
  std::int64_t gk_samples = 100000;
  int l_max = 20;
  int sigma_k_max = 20;
  std::uint64_t seed = 20261018;
  std::string out = "out";
  int output_points = 101;
  std::vector<std::vector<double>> x_grid;  ///< points at which greenkubo tabulates a(x)

  nlohmann::json raw;  ///< the parsed document, for hashing
};

/// Parses and validates; throws ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical dump of the config used for the output hash.
std::string config_hash(const ExperimentConfig& cfg);

Drift build_drift(const DriftSpec& spec, int dim);
VecFn build_g(const GSpec& spec, int dim, double* sup, double* lipschitz);

/// The toy h of every term as a cylinder observable, for the exact oracles.
std::vector<CylinderObservable> toy_cylinder_observables(const FieldSpec& spec);

DrivenVectorField<BitStreamPoint> build_toy_field(const FieldSpec& spec);
DrivenVectorField<CollisionState> build_billiard_field(const FieldSpec& spec, const BilliardSystem& sys);

}  // namespace infavg
