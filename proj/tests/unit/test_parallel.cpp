#include <doctest.h>

#include <stdexcept>

#include "infavg/experiments.hpp"
#include "infavg/stats.hpp"
#include "support.hpp"

using namespace infavg;

namespace {

struct ManyThreads {
  int saved = max_threads();
  ManyThreads() { set_threads(4); }
  ~ManyThreads() { set_threads(saved); }
};

bool same(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i].array() == b[i].array()).all()) return false;
  return true;
}

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("toy ensembles are bit-identical serial and parallel") {
  ManyThreads guard;
  const auto field = build_toy_field(test::toy_spec("phi", {{0, 1.0}}, {"sin", {1.0}, 0.5}));
  OrbitOptions o{1e-3, 1.0, 4, 300, 3, Exec::Serial, kStreamToyOrbits};
  const auto s = error_ensemble(ShiftToy{}, field, test::vec1(1.0), o);
  o.exec = Exec::Parallel;
  CHECK(same(s, error_ensemble(ShiftToy{}, field, test::vec1(1.0), o)));
}

TEST_CASE("billiard ensembles are bit-identical serial and parallel") {
  ManyThreads guard;
  const BilliardSystem sys(default_billiard());
  FieldSpec spec = test::toy_spec("sin_theta");
  const auto field = build_billiard_field(spec, sys);
  OrbitOptions o{1e-2, 1.0, 4, 200, 4, Exec::Serial, kStreamBilliard};
  const auto s = birkhoff_ensemble(sys, field, test::vec1(1.0), o);
  o.exec = Exec::Parallel;
  const auto p = birkhoff_ensemble(sys, field, test::vec1(1.0), o);
  REQUIRE(s.size() == p.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK((s[i].vtilde_end.array() == p[i].vtilde_end.array()).all());
    CHECK(s[i].gap_sup == p[i].gap_sup);
  }
}

TEST_CASE("Green-Kubo and Sigma reductions merge in a fixed order") {
  ManyThreads guard;
  const auto field = build_toy_field(test::toy_spec("bits", {{0, 1.0}, {1, 0.5}}));
  GkOptions o;
  o.n_samples = 5000;
  o.l_max = 10;
  o.exec = Exec::Serial;
  const auto a = green_kubo_model(ShiftToy{}, field, o);
  o.exec = Exec::Parallel;
  const auto b = green_kubo_model(ShiftToy{}, field, o);
  CHECK(a.sym_terms == b.sym_terms);
  CHECK(a.sym_cov == b.sym_cov);

  const BilliardSystem sys(default_billiard());
  SigmaOptions so;
  so.n_samples = 3000;
  so.exec = Exec::Serial;
  const auto s1 = estimate_sigma(sys, so);
  so.exec = Exec::Parallel;
  const auto s2 = estimate_sigma(sys, so);
  CHECK(s1.value == s2.value);
  CHECK(s1.se == s2.se);
}

TEST_CASE("limit and local-time ensembles are bit-identical serial and parallel") {
  ManyThreads guard;
  const auto s = local_time_ensemble(1.0, 1.0, 1e-3, 2.0 * std::sqrt(1e-3), 500, 5, Exec::Serial);
  const auto p = local_time_ensemble(1.0, 1.0, 1e-3, 2.0 * std::sqrt(1e-3), 500, 5, Exec::Parallel);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].local_time == p[i].local_time);
    CHECK(s[i].time_changed == p[i].time_changed);
  }
  const auto coef = limit_coefficients(Drift::neg_sin(1, 1.0), [](const Vector&) { return Matrix(Matrix::Identity(1, 1)); },
                                       test::vec1(1.0), 1.0, 1e-3);
  CHECK(same(limit_ensemble(coef, 1.0, 1.0, 300, 6, Exec::Serial), limit_ensemble(coef, 1.0, 1.0, 300, 6, Exec::Parallel)));

  const auto data = test::first(limit_ensemble(coef, 1.0, 1.0, 300, 7, Exec::Serial));
  const auto fn = [](std::span<const double> v) { return mean(v); };
  const auto c1 = bootstrap_ci(data, fn, 400, 0.9, 8, Exec::Serial);
  const auto c2 = bootstrap_ci(data, fn, 400, 0.9, 8, Exec::Parallel);
  CHECK(c1.lo == c2.lo);
  CHECK(c1.hi == c2.hi);
}

TEST_CASE("the lowest failing task decides the exception") {
  ManyThreads guard;
  for (Exec e : {Exec::Serial, Exec::Parallel}) {
    std::string what;
    try {
      for_each_task(1000, e, [](std::size_t i) {
        if (i % 100 == 37) throw std::runtime_error("task " + std::to_string(i));
      });
    } catch (const std::runtime_error& err) {
      what = err.what();
    }
    CHECK(what == "task 37");
  }
}

}
