#include "infavg/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "infavg/config.hpp"
#include "infavg/stats.hpp"

namespace infavg {

using nlohmann::json;

std::vector<LocalTimeSample> local_time_ensemble(double sigma, double t_end, double dt, double delta,
                                                 std::int64_t n, std::uint64_t seed, Exec exec,
                                                 double clock_scale, std::uint64_t stream) {
  std::vector<LocalTimeSample> out(static_cast<std::size_t>(n));
  for_each_task(out.size(), exec, [&](std::size_t i) {
    CounterRng rng = task_stream(seed, stream, i);
    const BrownianPath bm = simulate_bm(sigma, t_end, dt, rng);
    const LocalTimePath lt = local_time_occupation(bm, delta);
    const TimeChangedPath b = time_changed_bm(lt, 1, rng, clock_scale);
    out[i] = {lt.values.back(), b.values.back()};
  });
  return out;
}

std::vector<Vector> limit_ensemble(const LimitCoefficients& coef, double sigma, double t_end, std::int64_t n,
                                   std::uint64_t seed, Exec exec, std::uint64_t stream) {
  std::vector<Vector> out(static_cast<std::size_t>(n));
  for_each_task(out.size(), exec, [&](std::size_t i) {
    CounterRng rng = task_stream(seed, stream, i);
    out[i] = draw_limit(coef, sigma, t_end, rng).y_end;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Billiard checks

BilliardAudit billiard_audit(const BilliardSystem& sys, std::int64_t n_orbits, std::int64_t n_steps,
                             std::uint64_t seed, Exec exec) {
  const auto& cfg = sys.config();
  const auto bound = sys.phi_bound();
  std::vector<BilliardAudit> parts(static_cast<std::size_t>(n_orbits));
  std::vector<double> phi_sum(parts.size(), 0.0), phi_sq(parts.size(), 0.0);
  for_each_task(parts.size(), exec, [&](std::size_t i) {
    CounterRng rng = task_stream(seed, kStreamBilliard, i);
    BilliardAudit& a = parts[i];
    CollisionState s = sys.sample_invariant(rng);
    for (std::int64_t k = 0; k < n_steps; ++k) {
      FreeFlightResult r;
      try {
        r = next_collision(s, cfg);
      } catch (const GrazingCollision&) {
        ++a.grazing_discarded;
        s = sys.sample_invariant(rng);
        --k;
        continue;
      } catch (const HorizonViolation&) {
        ++a.horizon_violations;
        s = sys.sample_invariant(rng);
        --k;
        continue;
      }
      const Vec2 in = s.direction;
      const Vec2 n = r.next.normal;
      const Vec2 out = r.next.direction;
      a.speed_drift = std::max(a.speed_drift, std::fabs(norm(out) - 1.0));
      a.reflection_residual = std::max(
          {a.reflection_residual, std::fabs(dot(out, n) + dot(in, n)), std::fabs(cross(n, out) - cross(n, in))});
      a.max_flight = std::max(a.max_flight, r.length);
      const auto phi = r.cell_displacement;
      if (phi > bound || phi < -bound) ++a.phi_bound_violations;
      phi_sum[i] += static_cast<double>(phi);
      phi_sq[i] += static_cast<double>(phi) * static_cast<double>(phi);
      ++a.collisions;
      s = r.next;
    }
  });
  BilliardAudit total;
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& a = parts[i];
    total.collisions += a.collisions;
    total.grazing_discarded += a.grazing_discarded;
    total.horizon_violations += a.horizon_violations;
    total.speed_drift = std::max(total.speed_drift, a.speed_drift);
    total.reflection_residual = std::max(total.reflection_residual, a.reflection_residual);
    total.max_flight = std::max(total.max_flight, a.max_flight);
    total.phi_bound_violations += a.phi_bound_violations;
    sum += phi_sum[i];
    sq += phi_sq[i];
  }
  const double n = static_cast<double>(total.collisions);
  total.phi_mean = sum / n;
  total.phi_std = std::sqrt(std::max(0.0, sq / n - total.phi_mean * total.phi_mean));
  return total;
}

namespace {

CollisionState state_from_angles(std::size_t disk, double alpha, double theta) {
  CollisionState s;
  s.disk_id = disk;
  s.normal = {std::cos(alpha), std::sin(alpha)};
  s.direction = {s.normal.x * std::cos(theta) - s.normal.y * std::sin(theta),
                 s.normal.x * std::sin(theta) + s.normal.y * std::cos(theta)};
  return s;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

// Mean log expansion per collision of a renormalized tangent separation.
double benettin(const BilliardSystem& sys, CollisionState s, int steps, double delta) {
  const auto& cfg = sys.config();
  double ux = 1.0 / std::sqrt(2.0), uy = ux;
  double acc = 0.0;
  int used = 0;
  for (int k = 0; k < steps; ++k) {
    CollisionState p = state_from_angles(s.disk_id, s.boundary_angle() + delta * ux, s.outgoing_angle() + delta * uy);
    const FreeFlightResult a = next_collision(s, cfg);
    const FreeFlightResult b = next_collision(p, cfg);
    if (a.next.disk_id != b.next.disk_id) break;
    const double dx = wrap_angle(b.next.boundary_angle() - a.next.boundary_angle());
    const double dy = b.next.outgoing_angle() - a.next.outgoing_angle();
    const double d = std::hypot(dx, dy);
    if (!(d > 0.0)) break;
    acc += std::log(d / delta);
    ++used;
    ux = dx / d;
    uy = dy / d;
    s = a.next;
  }
  return used ? acc / used : 0.0;
}

}  // namespace

RetraceReport billiard_retrace(const BilliardSystem& sys, std::int64_t n_orbits, std::int64_t n_steps,
                               double tolerance, std::uint64_t seed, Exec exec) {
  const auto& cfg = sys.config();
  struct One {
    bool ok = false;
    std::int64_t horizon = 0;
    double worst = 0.0;
    std::int64_t mismatches = 0;
    double lyapunov = 0.0;
  };
  std::vector<One> res(static_cast<std::size_t>(n_orbits));
  for_each_task(res.size(), exec, [&](std::size_t i) {
    CounterRng rng = task_stream(seed, kStreamBilliard + 1, i);
    std::vector<CollisionState> fwd;
    retry_grazing([&]() {
      fwd.assign(1, sys.sample_invariant(rng));
      for (std::int64_t k = 0; k < n_steps; ++k) fwd.push_back(next_collision(fwd.back(), cfg).next);
      return 0;
    });
    One& o = res[i];
    o.horizon = n_steps;
    CollisionState r = time_reverse(fwd.back());
    bool broken = false;
    for (std::int64_t j = 1; j <= n_steps; ++j) {
      const CollisionState& target = fwd[static_cast<std::size_t>(n_steps - j)];
      double err = std::numeric_limits<double>::infinity();
      if (!broken) {
        try {
          r = next_collision(r, cfg).next;
          if (r.disk_id == target.disk_id && r.global_x_cell == target.global_x_cell) {
            err = cfg.disks[r.disk_id].radius * norm(r.normal - target.normal);
          } else {
            ++o.mismatches;
          }
        } catch (const Error&) {
          broken = true;
        }
      }
      if (broken) ++o.mismatches;
      o.worst = std::max(o.worst, err);
      if (err > tolerance && o.horizon == n_steps) o.horizon = j - 1;
    }
    o.ok = o.worst <= tolerance && o.mismatches == 0;
    try {
      o.lyapunov = benettin(sys, fwd.front(), static_cast<int>(std::min<std::int64_t>(n_steps, 200)), 1e-9);
    } catch (const Error&) {
      o.lyapunov = std::numeric_limits<double>::quiet_NaN();
    }
  });
  RetraceReport rep;
  rep.orbits = n_orbits;
  rep.steps = n_steps;
  rep.tolerance = tolerance;
  std::vector<double> horizons;
  double lyap = 0.0;
  std::int64_t lyap_n = 0;
  for (const auto& o : res) {
    rep.orbits_within_tol += o.ok ? 1 : 0;
    rep.id_mismatches += o.mismatches;
    rep.worst_error = std::max(rep.worst_error, o.worst);
    horizons.push_back(static_cast<double>(o.horizon));
    if (std::isfinite(o.lyapunov)) {
      lyap += o.lyapunov;
      ++lyap_n;
    }
  }
  std::nth_element(horizons.begin(), horizons.begin() + static_cast<std::ptrdiff_t>(horizons.size() / 2), horizons.end());
  rep.median_horizon = horizons[horizons.size() / 2];
  rep.lyapunov = lyap_n ? lyap / static_cast<double>(lyap_n) : 0.0;
  return rep;
}

InvarianceReport billiard_invariance(const BilliardSystem& sys, std::int64_t n_samples, int n_steps,
                                     std::uint64_t seed, Exec exec) {
  const auto& cfg = sys.config();
  std::vector<double> disk(static_cast<std::size_t>(n_samples)), alpha(disk.size()), theta(disk.size());
  std::vector<std::int64_t> discarded(disk.size(), 0);
  for_each_task(disk.size(), exec, [&](std::size_t i) {
    CounterRng rng = task_stream(seed, kStreamBilliard + 2, i);
    const CollisionState s = retry_grazing(
        [&]() {
          CollisionState c = sys.sample_invariant(rng);
          for (int k = 0; k < n_steps; ++k) c = next_collision(c, cfg).next;
          return c;
        },
        64, &discarded[i]);
    disk[i] = static_cast<double>(s.disk_id);
    alpha[i] = s.boundary_angle();
    theta[i] = s.outgoing_angle();
  });
  InvarianceReport rep;
  rep.samples = n_samples;
  for (auto d : discarded) rep.grazing_discarded += d;
  double total = 0.0;
  for (const auto& d : cfg.disks) total += d.radius;
  double cum = 0.0, emp = 0.0;
  for (std::size_t j = 0; j < cfg.disks.size(); ++j) {
    cum += cfg.disks[j].radius / total;
    emp += static_cast<double>(std::count(disk.begin(), disk.end(), static_cast<double>(j))) /
           static_cast<double>(disk.size());
    rep.ks_disk = std::max(rep.ks_disk, std::fabs(cum - emp));
  }
  rep.ks_boundary_angle = ks_distance(alpha, [](double a) { return std::clamp(a / (2.0 * std::numbers::pi), 0.0, 1.0); });
  rep.ks_outgoing_angle = ks_distance(theta, [](double t) { return std::clamp(0.5 * (1.0 + std::sin(t)), 0.0, 1.0); });
  return rep;
}

GreenKuboModel toy_exact_model(const std::vector<CylinderObservable>& h, const std::vector<LevelWeights>& psi,
                               int l_max, Exec exec) {
  if (h.size() != psi.size() || h.empty()) throw ContractViolation("toy_exact_model: one psi per h");
  const int P = static_cast<int>(h.size());
  std::int64_t A = 0;
  for (const auto& w : psi)
    if (!w.empty()) A = std::max({A, std::abs(w.min_level()), std::abs(w.max_level())});
  const auto conv = detail::level_convolution(psi, A);
  GreenKuboModel m;
  m.l_max = l_max;
  m.forward.assign(static_cast<std::size_t>(l_max) + 1, Matrix::Zero(P, P));
  for (int l = 0; l <= l_max; ++l) {
    for (int p = 0; p < P; ++p) {
      for (int q = 0; q < P; ++q) {
        const int depth = std::max(h[p].depth, l + h[q].depth);
        m.forward[l](p, q) = cylinder_mean(
            [&](std::uint64_t head) {
              const int ones = l == 0 ? 0 : std::popcount(head >> (64 - l));
              const Matrix* w = conv.at(l - 2 * ones);
              if (!w || (*w)(p, q) == 0.0) return 0.0;
              return h[p].fn(head) * h[q].fn(head << l) * (*w)(p, q);
            },
            depth, exec);
      }
    }
  }
  m.sym_terms = 0.5 * (m.forward[0] + m.forward[0].transpose());
  for (int l = 1; l <= l_max; ++l) m.sym_terms += m.forward[l] + m.forward[l].transpose();
  m.sym_cov = Matrix::Zero(P * P, P * P);
  return m;
}

// ---------------------------------------------------------------------------
// Acceptance suite

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

FieldSpec toy_field_spec(const std::string& g_kind, double g_s, const std::string& h_kind, int k, double scale) {
  FieldSpec f;
  f.dim = 1;
  TermSpec t;
  t.g.kind = g_kind;
  t.g.v = {1.0};
  t.g.s = g_s;
  t.h.kind = h_kind;
  t.h.k = k;
  t.h.scale = scale;
  t.psi = {{0, 1.0}};
  t.label = h_kind + "_at_level_0";
  f.terms = {t};
  f.drift.kind = "linear";
  f.drift.a = {{-1.0}};
  return f;
}

/// F = 1{a=0} φ(ω̄), g ≡ 1: a ≡ 1 exactly.
FieldSpec constant_a_field() { return toy_field_spec("constant", 0.0, "phi", 1, 1.0); }
/// F = (1 + ½ sin x) 1{a=0} φ(ω̄), F̄(x) = −x.
FieldSpec main_field() { return toy_field_spec("sin", 0.5, "phi", 1, 1.0); }
/// F = 3 1{a=0} (U_4 − 15/32).
FieldSpec gk_field() { return toy_field_spec("constant", 0.0, "bits", 4, 3.0); }

CylinderObservable scaled(const CylinderObservable& o, double s) {
  return {[f = o.fn, s](std::uint64_t h) { return s * f(h); }, o.depth};
}

double exact_constant_a() {
  return toy_exact_model({toy_phi_observable()}, {LevelWeights::delta(0)}, 20).sym_terms(0, 0);
}

std::vector<double> first_coord(const std::vector<Vector>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x(0));
  return out;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  double m = v[v.size() / 2];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2)));
  }
  return m;
}

CriterionResult named(int id, std::string name) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

double rel_err(double value, double target) { return std::fabs(value - target) / std::fabs(target); }

CriterionResult c1_averaged_exactness(const AcceptanceOptions&) {
  CriterionResult r = named(1, "averaged ODE exactness");
  r.budget_seconds = 1.0;
  const auto t0 = Clock::now();
  const TrajectoryGrid w = solve_averaged(Vector::Constant(1, 1.0), Drift::linear(Matrix::Constant(1, 1, -1.0)), 1.0, 1e-3);
  r.seconds = seconds_since(t0);
  const double err = std::fabs(w.back()(0) - std::exp(-1.0));
  r.pass = err < 1e-8 && r.seconds < r.budget_seconds;
  r.summary = "|w_1 - e^-1| = " + fmt(err, 3) + " (< 1e-8)";
  r.metrics = {{"w1", w.back()(0)}, {"abs_error", err}, {"dt", 1e-3}};
  return r;
}

CriterionResult c2_toy_sigma(const AcceptanceOptions& o) {
  CriterionResult r = named(2, "toy sigma");
  r.budget_seconds = 10.0;
  const auto t0 = Clock::now();
  SigmaOptions so;
  so.k_max = 20;
  so.n_samples = 100000;
  so.seed = o.seed;
  so.exec = o.exec;
  const SigmaEstimate est = estimate_sigma(ShiftToy{}, so);
  const double exact = toy_sigma();
  r.seconds = seconds_since(t0);
  const bool mc_ok = est.value >= 0.95 && est.value <= 1.05;
  const bool exact_ok = std::fabs(exact - 1.0) <= 1e-12;
  r.pass = mc_ok && exact_ok && r.seconds < r.budget_seconds;
  r.summary = "MC sigma = " + fmt(est.value, 5) + " +- " + fmt(est.se, 2) + " (in [0.95,1.05]); exact = " +
              fmt(exact, 15);
  r.metrics = {{"mc", est.value}, {"mc_se", est.se}, {"exact", exact}, {"k_max", 20}, {"n_samples", 100000}};
  return r;
}

CriterionResult c3_local_time(const AcceptanceOptions& o) {
  CriterionResult r = named(3, "local-time moments");
  r.budget_seconds = 120.0;
  const auto t0 = Clock::now();
  const double dt = 1e-4;
  bool pass = true;
  std::string summary;
  for (double sigma : {1.0, 2.0}) {
    const auto ens = local_time_ensemble(sigma, 1.0, dt, 2.0 * std::sqrt(sigma * dt), 100000, o.seed, o.exec,
                                         1.0, kStreamBrownian + static_cast<std::uint64_t>(sigma));
    std::vector<double> l, l2;
    for (const auto& s : ens) {
      l.push_back(s.local_time);
      l2.push_back(s.local_time * s.local_time);
    }
    const double m1 = mean(l), m2 = mean(l2);
    const double t1 = std::sqrt(2.0 / (std::numbers::pi * sigma)), t2 = 1.0 / sigma;
    const double e1 = rel_err(m1, t1), e2 = rel_err(m2, t2);
    pass = pass && e1 < 0.03 && e2 < 0.05;
    summary += "Sigma=" + fmt(sigma, 2) + ": E L=" + fmt(m1, 5) + " (rel " + fmt(e1, 2) + "), E L^2=" + fmt(m2, 5) +
               " (rel " + fmt(e2, 2) + "); ";
    r.metrics["sigma_" + fmt(sigma, 2)] = {{"mean_L", m1}, {"target_mean", t1}, {"rel_err_mean", e1},
                                           {"second_moment", m2}, {"target_second", t2}, {"rel_err_second", e2}};
  }
  r.seconds = seconds_since(t0);
  r.pass = pass && r.seconds < r.budget_seconds;
  r.summary = summary;
  return r;
}

CriterionResult c4_time_change(const AcceptanceOptions& o) {
  CriterionResult r = named(4, "time-changed BM variance and kurtosis");
  r.budget_seconds = 120.0;
  const auto t0 = Clock::now();
  const double dt = 1e-4;
  const auto ens = local_time_ensemble(1.0, 1.0, dt, 2.0 * std::sqrt(dt), 100000, o.seed, o.exec, 1.0, kStreamTimeChange);
  std::vector<double> l, z;
  for (const auto& s : ens) {
    l.push_back(s.local_time);
    z.push_back(s.time_changed);
  }
  const double el = mean(l);
  const auto mom = empirical_moments(z, 4);
  const double var = variance(z);
  double m2 = 0.0, m4 = 0.0;
  for (double x : z) {
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m2 /= static_cast<double>(z.size());
  m4 /= static_cast<double>(z.size());
  const double kurt = m4 / (m2 * m2);
  const double target_k = 1.5 * std::numbers::pi;
  const double ev = rel_err(var, el), ek = rel_err(kurt, target_k);
  r.seconds = seconds_since(t0);
  r.pass = ev < 0.03 && ek < 0.10 && r.seconds < r.budget_seconds;
  r.summary = "Var(B_L)=" + fmt(var, 5) + " vs E L=" + fmt(el, 5) + " (rel " + fmt(ev, 2) + "); kurtosis " +
              fmt(kurt, 5) + " vs 3pi/2 (rel " + fmt(ek, 2) + ")";
  r.metrics = {{"var_B", var}, {"mean_L", el}, {"rel_err_var", ev}, {"kurtosis", kurt},
               {"target_kurtosis", target_k}, {"rel_err_kurtosis", ek}, {"third_central", mom.moments[2]}};
  return r;
}

CriterionResult c5_dubins_schwarz(const AcceptanceOptions& o) {
  CriterionResult r = named(5, "Dubins-Schwarz identification");
  r.budget_seconds = 60.0;
  const auto t0 = Clock::now();
  const double a = 2.0, dt = 1e-4, delta = 2.0 * std::sqrt(dt);
  const std::int64_t n = 10000;
  std::vector<double> ito(static_cast<std::size_t>(n)), clock(static_cast<std::size_t>(n));
  const std::vector<Matrix> root{psd_sqrt(Matrix::Constant(1, 1, a))};
  for_each_task(ito.size(), o.exec, [&](std::size_t i) {
    CounterRng rng = task_stream(o.seed, kStreamDubinsSchwarz, i);
    const LocalTimePath lt = local_time_occupation(simulate_bm(1.0, 1.0, dt, rng), delta);
    ito[i] = ito_sqrt_a_integral(root, time_changed_bm(lt, 1, rng)).back()(0);
  });
  const auto scaled_clock = local_time_ensemble(1.0, 1.0, dt, delta, n, o.seed, o.exec, a, kStreamDubinsSchwarz + 1);
  for (std::size_t i = 0; i < clock.size(); ++i) clock[i] = scaled_clock[i].time_changed;
  const double ks = ks_distance(ito, clock);
  r.seconds = seconds_since(t0);
  r.pass = ks < 0.02 && r.seconds < r.budget_seconds;
  r.summary = "KS(int sqrt(a) dB_L, B_{aL}) = " + fmt(ks, 4) + " (< 0.02; 95% critical " +
              fmt(ks_critical_value(ito.size(), clock.size()), 3) + ")";
  r.metrics = {{"ks", ks}, {"a", a}, {"n_each", n}, {"critical_95", ks_critical_value(ito.size(), clock.size())}};
  return r;
}

struct BirkhoffSweep {
  std::vector<double> eps{1e-2, 1e-3, 1e-4};
  std::vector<double> second_moment;
  std::vector<double> second_moment_se;
  std::vector<std::int64_t> violations;
  std::vector<double> worst_ratio;
  std::vector<double> bound;
  std::vector<double> mean_gap;
  double target = 0.0;
  double a = 0.0;
};

BirkhoffSweep birkhoff_sweep(const AcceptanceOptions& o) {
  BirkhoffSweep s;
  const auto field = build_toy_field(constant_a_field());
  s.a = exact_constant_a();
  s.target = s.a * std::sqrt(2.0 / (std::numbers::pi * toy_sigma()));
  const Vector x0 = Vector::Constant(1, 1.0);
  for (double eps : s.eps) {
    OrbitOptions oo;
    oo.eps = eps;
    oo.t_end = 1.0;
    oo.n = 10000;
    oo.seed = o.seed;
    oo.exec = o.exec;
    oo.stream = kStreamToyOrbits + 6;
    const auto runs = birkhoff_ensemble(ShiftToy{}, field, x0, oo);
    const TrajectoryGrid w = averaged_for_birkhoff(x0, field.drift(), eps, 1.0, oo.substeps);
    const double bound = birkhoff_gap_bound(field, w, eps, 1.0);
    std::vector<double> sq;
    std::int64_t viol = 0;
    double worst = 0.0, gap = 0.0;
    for (const auto& run : runs) {
      sq.push_back(run.vtilde_end(0) * run.vtilde_end(0));
      if (run.gap_sup > bound) ++viol;
      worst = std::max(worst, run.gap_sup / bound);
      gap += run.gap_sup;
    }
    s.second_moment.push_back(mean(sq));
    s.second_moment_se.push_back(mean_se(sq));
    s.violations.push_back(viol);
    s.worst_ratio.push_back(worst);
    s.bound.push_back(bound);
    s.mean_gap.push_back(gap / static_cast<double>(runs.size()));
  }
  return s;
}

CriterionResult c6_perturbed_second_moment(const AcceptanceOptions& o) {
  CriterionResult r = named(6, "perturbed-sum second moment");
  r.budget_seconds = 600.0;
  const auto t0 = Clock::now();
  const BirkhoffSweep s = birkhoff_sweep(o);
  r.seconds = seconds_since(t0);
  std::vector<double> dist;
  for (double m : s.second_moment) dist.push_back(std::fabs(m - s.target));
  const bool close = rel_err(s.second_moment.back(), s.target) < 0.10;
  const bool monotone = dist[0] > dist[1] && dist[1] > dist[2];
  r.pass = close && monotone && r.seconds < r.budget_seconds;
  r.summary = "E[vt_1^2] = " + fmt(s.second_moment[0], 4) + ", " + fmt(s.second_moment[1], 4) + ", " +
              fmt(s.second_moment[2], 4) + " at eps=1e-2,1e-3,1e-4 vs target " + fmt(s.target, 5) + " (rel " +
              fmt(rel_err(s.second_moment.back(), s.target), 2) + "); monotone " + (monotone ? "yes" : "no");
  r.metrics = {{"eps", s.eps}, {"second_moment", s.second_moment}, {"se", s.second_moment_se},
               {"target", s.target}, {"a", s.a}, {"monotone", monotone}};
  return r;
}

CriterionResult c7_main_theorem(const AcceptanceOptions& o) {
  CriterionResult r = named(7, "main averaging theorem (KS)");
  r.budget_seconds = 1800.0;
  const auto t0 = Clock::now();
  const auto spec = main_field();
  const auto field = build_toy_field(spec);
  const Vector x0 = Vector::Constant(1, 1.0);
  const GreenKuboModel model = toy_exact_model({toy_phi_observable()}, {LevelWeights::delta(0)}, 20);
  const double sigma = toy_sigma();
  const double dt = 1e-4;
  auto a_of_x = [&](const Vector& x) { return model.a(term_matrix(field, x)).m; };
  const LimitCoefficients coef = limit_coefficients(field.drift(), a_of_x, x0, 1.0, dt);
  const auto y = first_coord(limit_ensemble(coef, sigma, 1.0, 10000, o.seed, o.exec));
  std::vector<double> eps{1e-2, 1e-3, 1e-4}, ks;
  for (double e : eps) {
    OrbitOptions oo;
    oo.eps = e;
    oo.n = 10000;
    oo.seed = o.seed;
    oo.exec = o.exec;
    oo.stream = kStreamToyOrbits + 7;
    ks.push_back(ks_distance(first_coord(error_ensemble(ShiftToy{}, field, x0, oo)), y));
  }
  r.seconds = seconds_since(t0);
  const bool decreasing = ks[0] > ks[1] && ks[1] > ks[2];
  r.pass = ks.back() < 0.05 && decreasing && r.seconds < r.budget_seconds;
  r.summary = "KS(eps^-3/4 e_1, y_1) = " + fmt(ks[0], 4) + ", " + fmt(ks[1], 4) + ", " + fmt(ks[2], 4) +
              " at eps=1e-2,1e-3,1e-4 (last < 0.05, decreasing " + (decreasing ? "yes" : "no") + ")";
  r.metrics = {{"eps", eps}, {"ks", ks}, {"n_orbits", 10000}, {"n_paths", 10000}, {"dt", dt}};
  return r;
}

CriterionResult c8_birkhoff_gap(const AcceptanceOptions& o) {
  CriterionResult r = named(8, "v vs vtilde gap bound");
  r.budget_seconds = 600.0;
  const auto t0 = Clock::now();
  const BirkhoffSweep s = birkhoff_sweep(o);
  r.seconds = seconds_since(t0);
  std::int64_t viol = 0;
  for (auto v : s.violations) viol += v;
  r.pass = viol == 0 && r.seconds < r.budget_seconds;
  r.summary = std::to_string(viol) + " of 30000 runs exceed eps^1/4 (T C_F + |F|_inf); worst ratio " +
              fmt(*std::max_element(s.worst_ratio.begin(), s.worst_ratio.end()), 4) + "; mean sup gap / bound = " +
              fmt(s.mean_gap.back() / s.bound.back(), 3) + " at eps=1e-4";
  r.metrics = {{"eps", s.eps}, {"violations", s.violations}, {"worst_ratio", s.worst_ratio},
               {"bound", s.bound}, {"mean_sup_gap", s.mean_gap}};
  return r;
}

CriterionResult c9_shift_sensitivity(const AcceptanceOptions& o) {
  CriterionResult r = named(9, "shift-sensitivity exponent");
  r.budget_seconds = 600.0;
  const auto t0 = Clock::now();
  const auto field = build_toy_field(main_field());
  const Vector x0 = Vector::Constant(1, 1.0);
  std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5}, med;
  std::vector<std::pair<double, double>> pairs;
  for (double e : eps) {
    OrbitOptions oo;
    oo.eps = e;
    oo.n = 400;
    oo.seed = o.seed;
    oo.exec = o.exec;
    oo.stream = kStreamToyOrbits + 9;
    med.push_back(median(shift_sensitivity_ensemble(ShiftToy{}, field, x0, oo)));
    pairs.emplace_back(e, med.back());
  }
  const ScalingFit fit = scaling_regression(pairs, 1000, 0.95, o.seed);
  r.seconds = seconds_since(t0);
  r.pass = fit.slope >= 0.15 && fit.slope <= 0.35 && r.seconds < r.budget_seconds;
  r.summary = "slope " + fmt(fit.slope, 4) + " (in [0.15,0.35]); medians " + fmt(med[0], 3) + ", " + fmt(med[1], 3) +
              ", " + fmt(med[2], 3) + ", " + fmt(med[3], 3);
  r.metrics = {{"eps", eps}, {"median", med}, {"slope", fit.slope},
               {"slope_ci", {fit.slope_ci.lo, fit.slope_ci.hi}}, {"n_orbits", 400}};
  return r;
}

CriterionResult c10_billiard(const AcceptanceOptions& o) {
  CriterionResult r = named(10, "billiard physical invariants");
  r.budget_seconds = 300.0;
  const auto t0 = Clock::now();
  const BilliardSystem sys(default_billiard());
  const BilliardAudit audit = billiard_audit(sys, 1000, 1000, o.seed, o.exec);
  const RetraceReport retrace = billiard_retrace(sys, 1000, 100, 1e-8, o.seed, o.exec);
  const InvarianceReport inv = billiard_invariance(sys, 100000, 10, o.seed, o.exec);
  r.seconds = seconds_since(t0);
  const double phi_tol = 3.0 * audit.phi_std / std::sqrt(static_cast<double>(audit.collisions));
  const bool speed = audit.speed_drift < 1e-12;
  const bool refl = audit.reflection_residual < 1e-12;
  const bool flight = audit.max_flight <= 2.5 && audit.horizon_violations == 0;
  const bool centered = std::fabs(audit.phi_mean) <= phi_tol && audit.phi_bound_violations == 0;
  const bool retr = retrace.orbits_within_tol == retrace.orbits;
  const bool ks = inv.ks_disk < 0.02 && inv.ks_boundary_angle < 0.02 && inv.ks_outgoing_angle < 0.02;
  r.pass = speed && refl && flight && centered && retr && ks && r.seconds < r.budget_seconds;
  auto mark = [](bool b) { return b ? "ok" : "FAIL"; };
  r.summary = std::string("speed ") + mark(speed) + " (" + fmt(audit.speed_drift, 2) + "), reflection " + mark(refl) +
              " (" + fmt(audit.reflection_residual, 2) + "), flight " + mark(flight) + " (" +
              fmt(audit.max_flight, 4) + "), phi mean " + mark(centered) + " (" + fmt(audit.phi_mean, 2) + "), retrace " +
              mark(retr) + " (" + std::to_string(retrace.orbits_within_tol) + "/" + std::to_string(retrace.orbits) +
              " orbits, median horizon " + fmt(retrace.median_horizon, 3) + " steps, lyapunov " +
              fmt(retrace.lyapunov, 3) + "), invariance KS " + mark(ks) + " (" + fmt(inv.ks_disk, 2) + "/" +
              fmt(inv.ks_boundary_angle, 2) + "/" + fmt(inv.ks_outgoing_angle, 2) + ")";
  r.metrics = {{"collisions", audit.collisions},
               {"speed_drift", audit.speed_drift},
               {"reflection_residual", audit.reflection_residual},
               {"max_flight", audit.max_flight},
               {"horizon_violations", audit.horizon_violations},
               {"grazing_discarded", audit.grazing_discarded},
               {"phi_mean", audit.phi_mean},
               {"phi_std", audit.phi_std},
               {"phi_tolerance", phi_tol},
               {"retrace_orbits_ok", retrace.orbits_within_tol},
               {"retrace_orbits", retrace.orbits},
               {"retrace_median_horizon", retrace.median_horizon},
               {"retrace_worst_error", retrace.worst_error},
               {"lyapunov_per_collision", retrace.lyapunov},
               {"ks_disk", inv.ks_disk},
               {"ks_boundary_angle", inv.ks_boundary_angle},
               {"ks_outgoing_angle", inv.ks_outgoing_angle}};
  return r;
}

CriterionResult c11_green_kubo(const AcceptanceOptions& o) {
  CriterionResult r = named(11, "Green-Kubo oracle agreement");
  r.budget_seconds = 120.0;
  const auto t0 = Clock::now();
  const auto field = build_toy_field(gk_field());
  GkOptions go;
  go.l_max = 20;
  go.n_samples = 100000;
  go.seed = o.seed;
  go.exec = o.exec;
  const VarianceMatrix est = estimate_a(ShiftToy{}, field, Vector::Constant(1, 1.0), go);
  const double exact = toy_exact_green_kubo(scaled(centered_bits_observable(4), 3.0), LevelWeights::delta(0), 20, o.exec);
  r.seconds = seconds_since(t0);
  const double err = rel_err(est.m(0, 0), exact);
  r.pass = err < 0.05 && r.seconds < r.budget_seconds;
  r.summary = "a = " + fmt(est.m(0, 0), 5) + " +- " + fmt(est.se(0, 0), 2) + " vs exact " + fmt(exact, 6) + " (rel " +
              fmt(err, 2) + ", < 0.05)";
  r.metrics = {{"estimate", est.m(0, 0)}, {"se", est.se(0, 0)}, {"exact", exact}, {"rel_err", err}};
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
  switch (id) {
    case 1: return c1_averaged_exactness(opts);
    case 2: return c2_toy_sigma(opts);
    case 3: return c3_local_time(opts);
    case 4: return c4_time_change(opts);
    case 5: return c5_dubins_schwarz(opts);
    case 6: return c6_perturbed_second_moment(opts);
    case 7: return c7_main_theorem(opts);
    case 8: return c8_birkhoff_gap(opts);
    case 9: return c9_shift_sensitivity(opts);
    case 10: return c10_billiard(opts);
    case 11: return c11_green_kubo(opts);
    default: throw ContractViolation("no acceptance criterion " + std::to_string(id));
  }
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream s;
  s << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.summary << " ("
    << fmt(r.seconds, 3) << " s, budget " << fmt(r.budget_seconds, 4) << " s)";
  return s.str();
}

json to_json(const CriterionResult& r) {
  return {{"id", r.id},           {"name", r.name},       {"pass", r.pass},
          {"summary", r.summary}, {"seconds", r.seconds}, {"budget_seconds", r.budget_seconds},
          {"metrics", r.metrics}};
}

json run_diagnostics(const AcceptanceOptions& o) {
  json d;
  d["local_time_convention"] =
      "occupation density: L'_t(0) = lim (2 delta)^-1 Leb{s <= t : |B'_s| <= delta}, so L'_t(0) ~ sqrt(t/Sigma)|N(0,1)|";
  d["sigma_convention"] = "two-sided: E[phi^2] + 2 sum_{k>=1} E[phi phi o T^k]";

  const BilliardSystem sys(default_billiard());
  SigmaOptions so;
  so.n_samples = 20000;
  so.window = 64;
  so.seed = o.seed;
  so.exec = o.exec;
  so.k_max = 80;
  const SigmaEstimate s80 = estimate_sigma(sys, so);
  json partial = json::object();
  double acc = s80.lag_means[0];
  double s20 = 0.0, s40 = 0.0;
  for (int k = 1; k <= so.k_max; ++k) {
    acc += 2.0 * s80.lag_means[static_cast<std::size_t>(k)];
    if (k == 20) s20 = acc;
    if (k == 40) s40 = acc;
    if (k % 10 == 0) partial[std::to_string(k)] = acc;
  }
  d["billiard_sigma"] = {{"k_max_20", s20},
                         {"k_max_40", s40},
                         {"k_max_80", s80.value},
                         {"se_80", s80.se},
                         {"relative_change_20_40", std::fabs(s40 - s20) / std::fabs(s40)},
                         {"partial_sums", partial},
                         {"grazing_discarded", s80.grazing_discarded}};

  FieldSpec spec;
  spec.dim = 1;
  TermSpec t;
  t.h.kind = "normal_x";
  t.psi = {{0, 1.0}};
  t.label = "normal_x_at_level_0";
  spec.terms = {t};
  const auto bfield = build_billiard_field(spec, sys);
  GkOptions go;
  go.l_max = 20;
  go.n_samples = 20000;
  go.seed = o.seed;
  go.exec = o.exec;
  go.backward = true;
  const GreenKuboModel gm = green_kubo_model(sys, bfield, go);
  const Matrix g = term_matrix(bfield, Vector::Constant(1, 0.0));
  const VarianceMatrix a_sym = gm.a(g, GkForm::Symmetrized);
  const VarianceMatrix a_inv = gm.a(g, GkForm::Invertible);
  d["billiard_green_kubo"] = {{"symmetrized", a_sym.m(0, 0)},
                              {"symmetrized_se", a_sym.se(0, 0)},
                              {"invertible", a_inv.m(0, 0)},
                              {"invertible_se", a_inv.se(0, 0)},
                              {"difference", a_inv.m(0, 0) - a_sym.m(0, 0)},
                              {"tail_ratio", gm.tail_ratio},
                              {"tail_warning", gm.tail_warning}};

  json lt = json::array();
  for (double dt : {4e-4, 2e-4, 1e-4}) {
    const auto ens = local_time_ensemble(1.0, 1.0, dt, 2.0 * std::sqrt(dt), 20000, o.seed, o.exec, 1.0,
                                         kStreamBrownian + 100);
    std::vector<double> l;
    for (const auto& s : ens) l.push_back(s.local_time);
    lt.push_back({{"dt", dt}, {"mean_L", mean(l)}, {"se", mean_se(l)}});
  }
  d["local_time_refinement"] = {{"target", std::sqrt(2.0 / std::numbers::pi)}, {"runs", lt}};

  const auto field = build_toy_field(main_field());
  const GreenKuboModel model = toy_exact_model({toy_phi_observable()}, {LevelWeights::delta(0)}, 20);
  auto a_of_x = [&](const Vector& x) { return model.a(term_matrix(field, x)).m; };
  json yc = json::array();
  std::vector<std::pair<double, double>> pairs;
  for (double dt : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
    const LimitCoefficients coef = limit_coefficients(field.drift(), a_of_x, Vector::Constant(1, 1.0), 1.0, dt);
    std::vector<double> gaps(100);
    for_each_task(gaps.size(), o.exec, [&](std::size_t i) {
      CounterRng rng = task_stream(o.seed, kStreamLimitY + 1, i);
      const LocalTimePath ltp = local_time_occupation(simulate_bm(1.0, 1.0, dt, rng), 2.0 * std::sqrt(dt));
      const LimitPath y = limit_y(coef, time_changed_bm(ltp, 1, rng));
      double gap = 0.0;
      for (std::size_t k = 0; k < y.euler.size(); ++k)
        gap = std::max(gap, (y.euler.state(k) - y.closed.state(k)).norm());
      gaps[i] = gap;
    });
    const double m = mean(gaps);
    yc.push_back({{"dt", dt}, {"mean_sup_gap", m}});
    pairs.emplace_back(dt, m);
  }
  d["limit_y_constructions"] = {{"runs", yc}, {"loglog_slope", scaling_regression(pairs, 200, 0.95, o.seed).slope}};
  return d;
}

}  // namespace infavg
