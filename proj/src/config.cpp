#include "infavg/config.hpp"

#include <fstream>
#include <numbers>

#include "infavg/errors.hpp"
#include "infavg/io.hpp"

namespace infavg {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

const std::vector<std::string> kTopKeys = {
    "system", "field", "x0", "eps", "T", "substeps", "dt_limit", "sigma", "n_orbits", "n_paths",
    "gk_samples", "l_max", "sigma_k_max", "seed", "out", "output_points", "x_grid"};

void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

SystemSpec parse_system(const json& j) {
  SystemSpec s;
  reject_unknown(j, {"kind", "disks", "horizon_cap", "symmetry_required"}, "system");
  s.kind = get_or<std::string>(j, "kind", "toy");
  require(s.kind == "toy" || s.kind == "billiard", "system.kind must be 'toy' or 'billiard'");
  if (j.contains("disks")) {
    s.billiard.disks.clear();
    for (const auto& d : j.at("disks")) {
      const auto c = d.at("center").get<std::vector<double>>();
      require(c.size() == 2, "disk center must have two coordinates");
      s.billiard.disks.push_back({{c[0], c[1]}, d.at("radius").get<double>()});
    }
  }
  s.billiard.horizon_cap = get_or(j, "horizon_cap", s.billiard.horizon_cap);
  s.billiard.symmetry_required = get_or(j, "symmetry_required", s.billiard.symmetry_required);
  return s;
}

FieldSpec parse_field(const json& j) {
  FieldSpec f;
  reject_unknown(j, {"dim", "terms", "drift"}, "field");
  f.dim = get_or(j, "dim", 1);
  require(f.dim >= 1, "field.dim must be >= 1");
  if (j.contains("terms")) {
    f.terms.clear();
    for (const auto& t : j.at("terms")) {
      reject_unknown(t, {"g", "h", "psi", "label"}, "field.terms[]");
      TermSpec ts;
      ts.g.v.assign(static_cast<std::size_t>(f.dim), 1.0);
      if (t.contains("g")) {
        const auto& g = t.at("g");
        ts.g.kind = get_or<std::string>(g, "kind", "constant");
        ts.g.v = get_or(g, "v", ts.g.v);
        ts.g.s = get_or(g, "s", 0.0);
      }
      require(ts.g.kind == "constant" || ts.g.kind == "sin", "g.kind must be 'constant' or 'sin'");
      require(static_cast<int>(ts.g.v.size()) == f.dim, "g.v must have field.dim entries");
      if (t.contains("h")) {
        const auto& h = t.at("h");
        ts.h.kind = get_or<std::string>(h, "kind", "phi");
        ts.h.k = get_or(h, "k", 4);
        ts.h.scale = get_or(h, "scale", 1.0);
      }
      if (t.contains("psi")) {
        ts.psi.clear();
        for (auto it = t.at("psi").begin(); it != t.at("psi").end(); ++it) {
          std::int64_t level = 0;
          try {
            level = std::stoll(it.key());
          } catch (const std::exception&) {
            throw ConfigError("psi keys must be integer levels, got '" + it.key() + "'");
          }
          ts.psi[level] = it.value().get<double>();
        }
      }
      ts.label = get_or<std::string>(t, "label", "term" + std::to_string(f.terms.size()));
      f.terms.push_back(std::move(ts));
    }
  } else {
    f.terms.front().g.v.assign(static_cast<std::size_t>(f.dim), 1.0);
  }
  if (j.contains("drift")) {
    const auto& d = j.at("drift");
    f.drift.kind = get_or<std::string>(d, "kind", "linear");
    f.drift.a = get_or(d, "a", f.drift.a);
    f.drift.c = get_or(d, "c", 1.0);
  } else if (f.dim != 1) {
    f.drift.a.assign(static_cast<std::size_t>(f.dim), std::vector<double>(static_cast<std::size_t>(f.dim), 0.0));
    for (int i = 0; i < f.dim; ++i) f.drift.a[i][i] = -1.0;
  }
  return f;
}

}  // namespace

ExperimentConfig parse_config_unchecked(const json& doc);

ExperimentConfig parse_config(const json& doc) {
  try {
    return parse_config_unchecked(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig parse_config_unchecked(const json& doc) {
  require(doc.is_object(), "config must be a JSON object");
  reject_unknown(doc, kTopKeys, "config");
  ExperimentConfig c;
  if (doc.contains("system")) c.system = parse_system(doc.at("system"));
  if (doc.contains("field")) c.field = parse_field(doc.at("field"));
  c.x0 = get_or(doc, "x0", std::vector<double>(static_cast<std::size_t>(c.field.dim), 1.0));
  c.eps = get_or(doc, "eps", c.eps);
  c.t_end = get_or(doc, "T", c.t_end);
  c.substeps = get_or(doc, "substeps", c.substeps);
  c.dt_limit = get_or(doc, "dt_limit", c.dt_limit);
  c.sigma = get_or(doc, "sigma", c.sigma);
  c.n_orbits = get_or(doc, "n_orbits", c.n_orbits);
  c.n_paths = get_or(doc, "n_paths", c.n_paths);
  c.gk_samples = get_or(doc, "gk_samples", c.gk_samples);
  c.l_max = get_or(doc, "l_max", c.l_max);
  c.sigma_k_max = get_or(doc, "sigma_k_max", c.sigma_k_max);
  c.seed = get_or(doc, "seed", c.seed);
  c.out = get_or(doc, "out", c.out);
  c.output_points = get_or(doc, "output_points", c.output_points);
  c.x_grid = get_or(doc, "x_grid", std::vector<std::vector<double>>{c.x0});

  require(static_cast<int>(c.x0.size()) == c.field.dim, "x0 must have field.dim entries");
  require(!c.eps.empty(), "eps list must not be empty");
  for (double e : c.eps) require(e > 0.0, "every eps must be positive");
  require(c.t_end > 0.0, "T must be positive");
  require(c.substeps >= 1, "substeps must be >= 1");
  require(c.dt_limit > 0.0, "dt_limit must be positive");
  require(c.n_orbits >= 1 && c.n_paths >= 1 && c.gk_samples >= 2, "sample sizes must be positive");
  require(c.l_max >= 0 && c.sigma_k_max >= 0, "lag limits must be >= 0");
  require(c.output_points >= 2, "output_points must be >= 2");
  for (const auto& x : c.x_grid) require(static_cast<int>(x.size()) == c.field.dim, "x_grid points need field.dim entries");
  if (c.system.kind == "billiard") validate_geometry(c.system.billiard);
  c.raw = doc;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(cfg.raw.dump())); }

Drift build_drift(const DriftSpec& spec, int dim) {
  if (spec.kind == "zero") return Drift::zero(dim);
  if (spec.kind == "neg_sin") return Drift::neg_sin(dim, spec.c);
  if (spec.kind != "linear") throw ConfigError("drift.kind must be linear, zero or neg_sin");
  if (static_cast<int>(spec.a.size()) != dim) throw ConfigError("drift.a must be dim x dim");
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(spec.a[i].size()) != dim) throw ConfigError("drift.a must be dim x dim");
    for (int j = 0; j < dim; ++j) a(i, j) = spec.a[i][j];
  }
  return Drift::linear(a);
}

VecFn build_g(const GSpec& spec, int dim, double* sup, double* lipschitz) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = spec.v[static_cast<std::size_t>(i)];
  if (spec.kind == "constant") {
    *sup = v.norm();
    *lipschitz = 0.0;
    return constant_g(v);
  }
  *sup = v.norm() * (1.0 + std::fabs(spec.s));
  *lipschitz = v.cwiseAbs().maxCoeff() * std::fabs(spec.s);
  return sin_modulated_g(v, spec.s);
}

namespace {

template <class Point>
ProductTerm<Point> base_term(const TermSpec& t, int dim) {
  ProductTerm<Point> p;
  p.g = build_g(t.g, dim, &p.g_sup, &p.g_lipschitz);
  p.psi = LevelWeights(t.psi);
  p.label = t.label;
  return p;
}

}  // namespace

std::vector<CylinderObservable> toy_cylinder_observables(const FieldSpec& spec) {
  std::vector<CylinderObservable> out;
  for (const auto& t : spec.terms) {
    const double s = t.h.scale;
    CylinderObservable base;
    if (t.h.kind == "phi") {
      base = toy_phi_observable();
    } else if (t.h.kind == "bits") {
      base = centered_bits_observable(t.h.k);
    } else if (t.h.kind == "one") {
      base = {[](std::uint64_t) { return 1.0; }, 0};
    } else {
      throw ConfigError("toy h.kind must be phi, bits or one");
    }
    out.push_back({[f = base.fn, s](std::uint64_t h) { return s * f(h); }, base.depth});
  }
  return out;
}

DrivenVectorField<BitStreamPoint> build_toy_field(const FieldSpec& spec) {
  std::vector<ProductTerm<BitStreamPoint>> terms;
  for (const auto& t : spec.terms) {
    auto p = base_term<BitStreamPoint>(t, spec.dim);
    const double s = t.h.scale;
    if (t.h.kind == "phi") {
      p.h = [s](const BitStreamPoint& b) { return s * static_cast<double>(toy_phi(b)); };
      p.h_sup = std::fabs(s);
      p.h_mean = 0.0;
    } else if (t.h.kind == "bits") {
      if (t.h.k < 1 || t.h.k > 30) throw ConfigError("h.k must be in [1, 30]");
      auto obs = centered_bits_observable(t.h.k);
      p.h = [s, f = obs.fn](const BitStreamPoint& b) { return s * f(b.head()); };
      p.h_sup = 0.5 * std::fabs(s);
      p.h_mean = 0.0;
    } else if (t.h.kind == "one") {
      p.h = [s](const BitStreamPoint&) { return s; };
      p.h_sup = std::fabs(s);
      p.h_mean = s;
    } else {
      throw ConfigError("toy h.kind must be phi, bits or one");
    }
    terms.push_back(std::move(p));
  }
  try {
    return DrivenVectorField<BitStreamPoint>(spec.dim, std::move(terms), build_drift(spec.drift, spec.dim));
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

DrivenVectorField<CollisionState> build_billiard_field(const FieldSpec& spec, const BilliardSystem& sys) {
  std::vector<ProductTerm<CollisionState>> terms;
  for (const auto& t : spec.terms) {
    auto p = base_term<CollisionState>(t, spec.dim);
    const double s = t.h.scale;
    if (t.h.kind == "phi") {
      p.h = [s, &sys](const CollisionState& c) { return s * static_cast<double>(sys.phi(c)); };
      p.h_sup = std::fabs(s) * static_cast<double>(sys.phi_bound());
      p.h_mean = 0.0;
    } else if (t.h.kind == "sin_theta") {
      p.h = [s](const CollisionState& c) { return s * std::sin(c.outgoing_angle()); };
      p.h_sup = std::fabs(s);
      p.h_mean = 0.0;
    } else if (t.h.kind == "normal_x") {
      p.h = [s](const CollisionState& c) { return s * c.normal.x; };
      p.h_sup = std::fabs(s);
      p.h_mean = 0.0;
    } else if (t.h.kind == "one") {
      p.h = [s](const CollisionState&) { return s; };
      p.h_sup = std::fabs(s);
      p.h_mean = s;
    } else {
      throw ConfigError("billiard h.kind must be phi, sin_theta, normal_x or one");
    }
    terms.push_back(std::move(p));
  }
  try {
    return DrivenVectorField<CollisionState>(spec.dim, std::move(terms), build_drift(spec.drift, spec.dim));
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace infavg
