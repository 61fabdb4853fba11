#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infavg/billiard.hpp"
#include "infavg/config.hpp"
#include "infavg/errors.hpp"
#include "infavg/experiments.hpp"
#include "infavg/greenkubo.hpp"
#include "infavg/io.hpp"
#include "infavg/limitproc.hpp"
#include "infavg/shift_toy.hpp"
#include "infavg/stats.hpp"

namespace fs = std::filesystem;
using namespace infavg;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitGeometry = 3;
constexpr int kExitAcceptance = 4;

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Collects tables and a summary; csv writes one file per table plus a JSON
/// summary, json folds everything into a single document.
class Sink {
 public:
  Sink(fs::path dir, OutputMeta meta, bool as_json) : dir_(std::move(dir)), meta_(std::move(meta)), json_(as_json) {
    fs::create_directories(dir_);
  }

  void table(Table t) { tables_.push_back(std::move(t)); }
  json& summary() { return summary_; }

  std::vector<fs::path> flush() {
    std::vector<fs::path> written;
    if (json_) {
      json body = summary_;
      json tabs = json::object();
      for (const auto& t : tables_) {
        json rows = json::array();
        for (const auto& r : t.rows) rows.push_back(r);
        tabs[t.name] = {{"columns", t.header}, {"rows", std::move(rows)}};
      }
      body["tables"] = std::move(tabs);
      written.push_back(dir_ / (meta_.command + ".json"));
      write_json(written.back(), meta_, std::move(body));
      return written;
    }
    for (const auto& t : tables_) {
      written.push_back(dir_ / (t.name + ".csv"));
      write_csv(written.back(), meta_, t.header, t.rows);
    }
    written.push_back(dir_ / (meta_.command + "_summary.json"));
    write_json(written.back(), meta_, summary_);
    return written;
  }

 private:
  fs::path dir_;
  OutputMeta meta_;
  bool json_;
  std::vector<Table> tables_;
  json summary_ = json::object();
};

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  std::string format = "csv";
  std::vector<int> criteria;
};

struct Run {
  ExperimentConfig cfg;
  Exec exec = Exec::Parallel;
  std::string command;
  bool as_json = false;

  Sink sink() const {
    return Sink(cfg.out, OutputMeta{config_hash(cfg), cfg.seed, command}, as_json);
  }
  Vector x0() const { return Eigen::Map<const Vector>(cfg.x0.data(), static_cast<Eigen::Index>(cfg.x0.size())); }
};

std::vector<std::string> columns(const std::string& prefix, int d) {
  std::vector<std::string> c;
  for (int i = 1; i <= d; ++i) c.push_back(prefix + std::to_string(i));
  return c;
}

void append(std::vector<double>& row, const ConstVecRef& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
}

std::string eps_tag(std::size_t i) { return "eps" + std::to_string(i); }

/// Indices 0 = first, last = last, about `points` in total.
std::vector<std::size_t> thin(std::size_t n, int points) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  const std::size_t stride = std::max<std::size_t>(1, (n - 1) / std::max(1, points - 1));
  for (std::size_t k = 0; k < n; k += stride) idx.push_back(k);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

json moments_json(const std::vector<double>& s) {
  const auto m = empirical_moments(s, 4);
  return {{"n", m.n}, {"mean", m.moments[0]}, {"var", m.moments[1]}, {"m3", m.moments[2]}, {"m4", m.moments[3]},
          {"mean_se", m.se[0]}, {"var_se", m.se[1]}};
}

std::vector<double> coord(const std::vector<Vector>& v, int i) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x(i));
  return out;
}

// ---------------------------------------------------------------------------
// System-generic pieces

struct Model {
  GreenKuboModel gk;
  bool exact = false;
  bool empty = false;
};

template <BaseSystem S>
void orbit_run(const Run& run, const S& sys, const DrivenVectorField<typename S::Point>& field, std::uint64_t stream) {
  const auto& cfg = run.cfg;
  const int d = field.dim();
  const Vector x0 = run.x0();
  Sink sink = run.sink();
  Table ens{run.command + "_ensemble", {"orbit", "eps"}, {}};
  for (const auto& c : columns("e", d)) ens.header.push_back(c);
  for (const auto& c : columns("v", d)) ens.header.push_back(c);
  for (const auto& c : columns("vtilde", d)) ens.header.push_back(c);
  ens.header.push_back("gap_sup");
  json per_eps = json::array();

  for (std::size_t ie = 0; ie < cfg.eps.size(); ++ie) {
    const double eps = cfg.eps[ie];
    OrbitOptions o{eps, cfg.t_end, cfg.substeps, cfg.n_orbits, cfg.seed, run.exec, stream};
    const auto e = error_ensemble(sys, field, x0, o);
    const auto b = birkhoff_ensemble(sys, field, x0, o);
    for (std::size_t i = 0; i < e.size(); ++i) {
      std::vector<double> row{static_cast<double>(i), eps};
      append(row, e[i]);
      append(row, b[i].v_end);
      append(row, b[i].vtilde_end);
      row.push_back(b[i].gap_sup);
      ens.rows.push_back(std::move(row));
    }

    // Orbit 0 in full: x^ε, w, e on the segment grid, v and ṽ on the Birkhoff grid.
    CounterRng rng = task_stream(cfg.seed, stream, 0);
    const auto start = ensemble_start(sys, rng);
    const TrajectoryGrid x = solve_perturbed(sys, field, x0, start, eps, cfg.t_end, {cfg.substeps, 1});
    const TrajectoryGrid w = averaged_on_segments(x0, field.drift(), eps, cfg.t_end, cfg.substeps, 1);
    const TrajectoryGrid err = error_process(x, w);
    Table traj{run.command + "_trajectory_" + eps_tag(ie), {"t"}, {}};
    for (const auto& c : columns("x", d)) traj.header.push_back(c);
    for (const auto& c : columns("w", d)) traj.header.push_back(c);
    for (const auto& c : columns("e", d)) traj.header.push_back(c);
    for (std::size_t k : thin(x.size(), cfg.output_points)) {
      std::vector<double> row{x.time(k)};
      append(row, x.state(k));
      append(row, w.state(k));
      append(row, err.state(k));
      traj.rows.push_back(std::move(row));
    }
    sink.table(std::move(traj));

    const TrajectoryGrid wb = averaged_for_birkhoff(x0, field.drift(), eps, cfg.t_end, cfg.substeps);
    const BirkhoffSums sums = birkhoff_sums(sys, field, start, eps, cfg.t_end, wb);
    Table vt{run.command + "_birkhoff_" + eps_tag(ie), {"t"}, {}};
    for (const auto& c : columns("v", d)) vt.header.push_back(c);
    for (const auto& c : columns("vtilde", d)) vt.header.push_back(c);
    for (std::size_t k : thin(sums.v.size(), cfg.output_points)) {
      std::vector<double> row{sums.v.time(k)};
      append(row, sums.v.state(k));
      append(row, sums.vtilde.state(k));
      vt.rows.push_back(std::move(row));
    }
    sink.table(std::move(vt));

    json stats = {{"eps", eps}};
    for (int c = 0; c < d; ++c) {
      const std::string s = std::to_string(c + 1);
      stats["scaled_error_" + s] = moments_json(coord(e, c));
      std::vector<double> vv;
      for (const auto& r : b) vv.push_back(r.vtilde_end(c));
      stats["vtilde_" + s] = moments_json(vv);
    }
    double gap = 0.0;
    for (const auto& r : b) gap = std::max(gap, r.gap_sup);
    stats["gap_sup_max"] = gap;
    stats["gap_bound"] = birkhoff_gap_bound(field, wb, eps, cfg.t_end);
    per_eps.push_back(std::move(stats));
  }
  sink.table(std::move(ens));
  sink.summary() = {{"system", cfg.system.kind}, {"dim", d}, {"t_end", cfg.t_end}, {"n_orbits", cfg.n_orbits},
                    {"sup_F", field.sup_bound()}, {"per_eps", std::move(per_eps)}};
  sink.flush();
}

template <class Point>
std::vector<LevelWeights> psi_of(const DrivenVectorField<Point>& field) {
  std::vector<LevelWeights> psi;
  for (const auto& t : field.terms()) psi.push_back(t.psi);
  return psi;
}

Model toy_model(const Run& run, const DrivenVectorField<BitStreamPoint>& field) {
  Model m;
  if (field.term_count() == 0) {
    m.empty = true;
    return m;
  }
  const auto h = toy_cylinder_observables(run.cfg.field);
  int depth = 0;
  for (const auto& o : h) depth = std::max(depth, o.depth);
  if (run.cfg.l_max + depth <= 30) {
    m.gk = toy_exact_model(h, psi_of(field), run.cfg.l_max, run.exec);
    m.exact = true;
  } else {
    GkOptions o{run.cfg.l_max, run.cfg.gk_samples, -1, run.cfg.seed, run.exec, false};
    m.gk = green_kubo_model(ShiftToy{}, field, o);
  }
  return m;
}

Model billiard_model(const Run& run, const BilliardSystem& sys, const DrivenVectorField<CollisionState>& field) {
  Model m;
  if (field.term_count() == 0) {
    m.empty = true;
    return m;
  }
  GkOptions o{run.cfg.l_max, run.cfg.gk_samples, -1, run.cfg.seed, run.exec, true};
  m.gk = green_kubo_model(sys, field, o);
  return m;
}

template <class Point>
std::function<Matrix(const Vector&)> a_function(const Model& model, const DrivenVectorField<Point>& field) {
  const int d = field.dim();
  if (model.empty) return [d](const Vector&) { return Matrix(Matrix::Zero(d, d)); };
  return [&model, &field](const Vector& x) { return model.gk.a(term_matrix(field, x)).m; };
}

struct SigmaValue {
  double value = 0.0;
  double se = 0.0;
  bool exact = false;
};

SigmaValue toy_sigma_value(const Run& run) {
  if (run.cfg.sigma > 0.0) return {run.cfg.sigma, 0.0, true};
  return {toy_sigma(), 0.0, true};
}

SigmaValue billiard_sigma_value(const Run& run, const BilliardSystem& sys) {
  if (run.cfg.sigma > 0.0) return {run.cfg.sigma, 0.0, true};
  SigmaOptions o;
  o.k_max = run.cfg.sigma_k_max;
  o.n_samples = run.cfg.gk_samples;
  o.window = 32;
  o.seed = run.cfg.seed;
  o.exec = run.exec;
  const auto s = estimate_sigma(sys, o);
  return {s.value, s.se, false};
}

std::vector<std::vector<double>> x_grid(const Run& run) {
  if (!run.cfg.x_grid.empty()) return run.cfg.x_grid;
  return {run.cfg.x0};
}

template <class Point>
void greenkubo_run(const Run& run, const DrivenVectorField<Point>& field, const Model& model, const SigmaValue& sigma) {
  const int d = field.dim();
  Sink sink = run.sink();
  const bool both = !model.empty && !model.gk.backward.empty();
  Table tab{"greenkubo_a", columns("x", d), {}};
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) tab.header.push_back("a" + std::to_string(i) + std::to_string(j));
  Table inv{"greenkubo_a_invertible", tab.header, {}};
  json points = json::array();
  for (const auto& xs : x_grid(run)) {
    if (static_cast<int>(xs.size()) != d) throw ConfigError("x_grid: every point needs dim coordinates");
    const Vector x = Eigen::Map<const Vector>(xs.data(), d);
    std::vector<double> row(xs);
    json pt = {{"x", xs}};
    if (model.empty) {
      row.resize(row.size() + static_cast<std::size_t>(d * d), 0.0);
    } else {
      const auto a = model.gk.a(term_matrix(field, x));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) row.push_back(a.m(i, j));
      pt["asymmetry"] = a.asymmetry;
      if (a.se.size() > 0) pt["max_se"] = a.se.maxCoeff();
      if (both) {
        const auto b = model.gk.a(term_matrix(field, x), GkForm::Invertible);
        std::vector<double> r2(xs);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) r2.push_back(b.m(i, j));
        inv.rows.push_back(std::move(r2));
        pt["forms_max_abs_diff"] = (a.m - b.m).cwiseAbs().maxCoeff();
      }
    }
    tab.rows.push_back(std::move(row));
    points.push_back(std::move(pt));
  }
  sink.table(std::move(tab));
  if (both) sink.table(std::move(inv));
  json& s = sink.summary();
  s["system"] = run.cfg.system.kind;
  s["sigma"] = {{"value", sigma.value}, {"se", sigma.se}, {"exact", sigma.exact}};
  s["l_max"] = run.cfg.l_max;
  s["exact"] = model.exact;
  if (!model.empty) {
    s["n_samples"] = model.exact ? 0 : model.gk.n_samples;
    s["tail_ratio"] = model.gk.tail_ratio;
    s["tail_warning"] = model.gk.tail_warning;
  }
  s["points"] = std::move(points);
  sink.flush();
}

template <class Point>
void limit_run(const Run& run, const DrivenVectorField<Point>& field, const Model& model, const SigmaValue& sigma) {
  const auto& cfg = run.cfg;
  const int d = field.dim();
  const auto a_of_x = a_function(model, field);
  const LimitCoefficients coef = limit_coefficients(field.drift(), a_of_x, run.x0(), cfg.t_end, cfg.dt_limit);
  const double delta = 2.0 * std::sqrt(sigma.value * cfg.dt_limit);
  const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
  const std::size_t keep = std::min<std::size_t>(n, 20);

  std::vector<LimitDraw> ends(n);
  std::vector<std::vector<std::vector<double>>> paths(keep);
  for_each_task(n, run.exec, [&](std::size_t i) {
    CounterRng rng = task_stream(cfg.seed, kStreamLimitY, i);
    const BrownianPath bm = simulate_bm(sigma.value, cfg.t_end, cfg.dt_limit, rng);
    const LocalTimePath lt = local_time_occupation(bm, delta);
    const TimeChangedPath b = time_changed_bm(lt, d, rng);
    const LimitPath y = limit_y(coef, b);
    ends[i] = {lt.values.back(), Vector(b.at(b.steps())), Vector(y.euler.back())};
    if (i < keep) {
      for (std::size_t k : thin(y.euler.size(), cfg.output_points)) {
        std::vector<double> row{static_cast<double>(i), y.euler.time(k)};
        append(row, y.euler.state(k));
        append(row, y.closed.state(k));
        append(row, b.at(k));
        row.push_back(lt.values[k]);
        paths[i].push_back(std::move(row));
      }
    }
  });

  Sink sink = run.sink();
  Table pt{"limit_paths", {"path", "t"}, {}};
  for (const auto& c : columns("y", d)) pt.header.push_back(c);
  for (const auto& c : columns("yclosed", d)) pt.header.push_back(c);
  for (const auto& c : columns("bL", d)) pt.header.push_back(c);
  pt.header.push_back("local_time");
  for (auto& p : paths)
    for (auto& r : p) pt.rows.push_back(std::move(r));
  sink.table(std::move(pt));

  Table et{"limit_endpoints", {"path", "local_time"}, {}};
  for (const auto& c : columns("bL", d)) et.header.push_back(c);
  for (const auto& c : columns("y", d)) et.header.push_back(c);
  std::vector<double> lts;
  std::vector<Vector> ys;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row{static_cast<double>(i), ends[i].local_time};
    append(row, ends[i].b_end);
    append(row, ends[i].y_end);
    et.rows.push_back(std::move(row));
    lts.push_back(ends[i].local_time);
    ys.push_back(ends[i].y_end);
  }
  sink.table(std::move(et));

  json& s = sink.summary();
  s["system"] = cfg.system.kind;
  s["sigma"] = {{"value", sigma.value}, {"se", sigma.se}, {"exact", sigma.exact}};
  s["dt"] = cfg.dt_limit;
  s["delta"] = delta;
  s["n_paths"] = cfg.n_paths;
  s["local_time"] = moments_json(lts);
  s["local_time_mean_reference"] = std::sqrt(2.0 * cfg.t_end / (M_PI * sigma.value));
  for (int c = 0; c < d; ++c) s["y_" + std::to_string(c + 1)] = moments_json(coord(ys, c));
  sink.flush();
}

template <BaseSystem S>
void convergence_run(const Run& run, const S& sys, const DrivenVectorField<typename S::Point>& field,
                     const Model& model, const SigmaValue& sigma, std::uint64_t stream) {
  const auto& cfg = run.cfg;
  const int d = field.dim();
  const auto a_of_x = a_function(model, field);
  const LimitCoefficients coef = limit_coefficients(field.drift(), a_of_x, run.x0(), cfg.t_end, cfg.dt_limit);
  const auto y = limit_ensemble(coef, sigma.value, cfg.t_end, cfg.n_paths, cfg.seed, run.exec);

  Sink sink = run.sink();
  Table ks{"convergence_ks", {"eps"}, {}};
  for (const auto& c : columns("ks", d)) ks.header.push_back(c);
  Table mom{"convergence_moments", {"eps", "coord", "mean", "var", "m4", "mean_se", "var_se"}, {}};
  auto moment_row = [&](double eps, int c, const std::vector<double>& s) {
    const auto m = empirical_moments(s, 4);
    mom.rows.push_back({eps, static_cast<double>(c + 1), m.moments[0], m.moments[1], m.moments[3], m.se[0], m.se[1]});
  };
  for (int c = 0; c < d; ++c) moment_row(0.0, c, coord(y, c));

  json per_eps = json::array();
  const bool degenerate = model.empty;
  for (double eps : cfg.eps) {
    OrbitOptions o{eps, cfg.t_end, cfg.substeps, cfg.n_orbits, cfg.seed, run.exec, stream};
    const auto e = error_ensemble(sys, field, run.x0(), o);
    std::vector<double> row{eps};
    json entry = {{"eps", eps}};
    for (int c = 0; c < d; ++c) {
      const auto ec = coord(e, c);
      const auto yc = coord(y, c);
      const double dist = degenerate ? 0.0 : ks_distance(ec, yc);
      row.push_back(dist);
      entry["ks_" + std::to_string(c + 1)] = dist;
      moment_row(eps, c, ec);
    }
    ks.rows.push_back(std::move(row));
    per_eps.push_back(std::move(entry));
  }
  sink.table(std::move(ks));
  sink.table(std::move(mom));
  json& s = sink.summary();
  s["system"] = cfg.system.kind;
  s["sigma"] = {{"value", sigma.value}, {"se", sigma.se}, {"exact", sigma.exact}};
  s["n_orbits"] = cfg.n_orbits;
  s["n_paths"] = cfg.n_paths;
  s["ks_critical_value_5pct"] = ks_critical_value(static_cast<std::size_t>(cfg.n_orbits),
                                                  static_cast<std::size_t>(cfg.n_paths));
  s["moments_note"] = "eps = 0 rows hold the limit y_T";
  s["per_eps"] = std::move(per_eps);
  sink.flush();
}

// ---------------------------------------------------------------------------

BilliardSystem checked_billiard(const Run& run) {
  const auto& bc = run.cfg.system.billiard;
  validate_geometry(bc);
  const HorizonReport rep = validate_finite_horizon(bc, 1000, 100, run.cfg.seed);
  if (!rep.ok) throw HorizonViolation(rep.summary());
  return BilliardSystem(bc);
}

int dispatch(const std::string& command, Run& run) {
  const bool toy = run.cfg.system.kind == "toy";
  if (command == "toy-run" && !toy) throw ConfigError("toy-run needs system.kind = toy");
  if (command == "billiard-run" && toy) throw ConfigError("billiard-run needs system.kind = billiard");

  if (toy) {
    const ShiftToy sys;
    const auto field = build_toy_field(run.cfg.field);
    if (command == "toy-run") {
      orbit_run(run, sys, field, kStreamToyOrbits);
      return kExitOk;
    }
    const Model model = toy_model(run, field);
    const SigmaValue sigma = toy_sigma_value(run);
    if (command == "greenkubo") greenkubo_run(run, field, model, sigma);
    if (command == "limit-sim") limit_run(run, field, model, sigma);
    if (command == "convergence") convergence_run(run, sys, field, model, sigma, kStreamToyOrbits);
    return kExitOk;
  }

  const BilliardSystem sys = checked_billiard(run);
  const auto field = build_billiard_field(run.cfg.field, sys);
  if (command == "billiard-run") {
    orbit_run(run, sys, field, kStreamBilliard);
    return kExitOk;
  }
  const Model model = billiard_model(run, sys, field);
  const SigmaValue sigma = billiard_sigma_value(run, sys);
  if (command == "greenkubo") greenkubo_run(run, field, model, sigma);
  if (command == "limit-sim") limit_run(run, field, model, sigma);
  if (command == "convergence") convergence_run(run, sys, field, model, sigma, kStreamBilliard);
  return kExitOk;
}

int verify(const Flags& flags, const Run& run) {
  AcceptanceOptions opts{run.cfg.seed, run.exec};
  std::vector<int> ids = flags.criteria;
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  json report = json::object();
  json crit = json::array();
  bool all = true;
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, opts);
    std::cout << format_line(r) << std::endl;
    all = all && r.pass;
    crit.push_back(to_json(r));
  }
  report["criteria"] = std::move(crit);
  report["all_pass"] = all;
  report["diagnostics"] = run_diagnostics(opts);
  Sink sink = run.sink();
  sink.summary() = std::move(report);
  for (const auto& p : sink.flush()) std::cout << "report: " << p.string() << "\n";
  return all ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infavg: averaging for slow-fast systems driven by Z-extensions"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::string> names{"toy-run", "billiard-run", "greenkubo", "limit-sim", "convergence", "verify"};
  const std::vector<std::string> help{
      "x^eps, w, e and v ensembles on the doubling-map extension",
      "the same ensembles on the Z-periodic Lorentz gas",
      "Green-Kubo a(x) on the configured grid, and Sigma",
      "y_t, B_{L'} and L' ensembles of the limit process",
      "eps sweep: KS(eps^-3/4 e_T, y_T) and moment tables",
      "full acceptance suite with a JSON report"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", flags.config, "JSON config file (defaults apply when omitted)");
    sub->add_option("--seed", flags.seed, "master seed, overrides the config");
    sub->add_option("--out", flags.out, "output directory, overrides the config");
    sub->add_option("--threads", flags.threads, "OpenMP threads; results do not depend on it")->check(CLI::NonNegativeNumber);
    sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    if (names[i] == "verify") sub->add_option("--criterion,-c", flags.criteria, "run only these criteria");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    Run run;
    run.command = command;
    run.as_json = flags.format == "json";
    run.cfg = flags.config.empty() ? parse_config(json::object()) : load_config(flags.config);
    if (flags.seed) run.cfg.seed = *flags.seed;
    if (!flags.out.empty()) run.cfg.out = flags.out;
    set_threads(flags.threads);
    for (int id : flags.criteria)
      if (id < 1 || id > kCriterionCount) throw ConfigError("--criterion must be in 1.." + std::to_string(kCriterionCount));
    if (command == "verify") return verify(flags, run);
    return dispatch(command, run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return kExitGeometry;
  } catch (const HorizonViolation& e) {
    std::cerr << "horizon violation: " << e.what() << "\n";
    return kExitGeometry;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
