#include <doctest.h>

#include <cmath>
#include <limits>

#include "infavg/experiments.hpp"
#include "infavg/slowfast.hpp"
#include "support.hpp"

using namespace infavg;
using test::vec1;

namespace {

DrivenVectorField<BitStreamPoint> main_toy_field() { return build_toy_field(test::toy_spec("phi", {{0, 1.0}}, {"sin", {1.0}, 0.5})); }

ZPoint<BitStreamPoint> random_start(std::uint64_t i) {
  CounterRng rng = task_stream(21, 1, i);
  return {BitStreamPoint(rng.split()), 0};
}

}  // namespace

TEST_SUITE("slowfast") {

TEST_CASE("averaged equation oracles") {
  const auto w = solve_averaged(vec1(1.0), Drift::linear(Matrix::Constant(1, 1, -1.0)), 1.0, 1e-3);
  CHECK(std::fabs(w.back()(0) - std::exp(-1.0)) < 1e-8);

  const auto still = solve_averaged(Vector::Constant(2, 0.7), Drift::zero(2), 1.0, 1e-2);
  for (std::size_t k = 0; k < still.size(); ++k) CHECK(still.state(k) == Vector::Constant(2, 0.7));

  Matrix rot(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  Vector x0(2);
  x0 << 0.6, 0.8;
  const auto r = solve_averaged(x0, Drift::linear(rot), 10.0, 1e-3);
  double drift = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) drift = std::max(drift, std::fabs(r.state(k).norm() - 1.0));
  CHECK(drift < 1e-8);
}

TEST_CASE("zero field reproduces the averaged solution") {
  const auto field = build_toy_field(test::zero_spec());
  const auto x = solve_perturbed(ShiftToy{}, field, vec1(1.0), random_start(0), 1e-2, 1.0);
  const auto w = averaged_on_segments(vec1(1.0), field.drift(), 1e-2, 1.0, 4);
  const auto e = error_process(x, w);
  CHECK(e.sup_norm() == 0.0);
  const auto ref = solve_averaged(vec1(1.0), field.drift(), 1.0, 2.5e-3);
  CHECK(std::fabs(x.back()(0) - ref.back()(0)) < 1e-10);
}

TEST_CASE("one frozen segment when eps exceeds T") {
  const auto field = main_toy_field();
  const auto start = random_start(1);
  const auto x = solve_perturbed(ShiftToy{}, field, vec1(1.0), start, 2.0, 1.0);
  REQUIRE(x.size() == 2);

  std::vector<double> c;
  const bool active = field.coefficients(start.base, start.level, c);
  Rk4Workspace ws(1);
  Vector y = vec1(1.0);
  rk4_steps(
      y, 0.25, 4,
      [&](const ConstVecRef& z, VecRef out) {
        field.drift().f(z, out);
        if (active) {
          field.centered_from_coefficients(z, c, ws.rhs_extra, ws.rhs_scratch);
          out += ws.rhs_extra;
        }
      },
      ws);
  CHECK(x.back()(0) == y(0));
}

TEST_CASE("perturbed runs are deterministic") {
  const auto field = main_toy_field();
  const auto a = solve_perturbed(ShiftToy{}, field, vec1(1.0), random_start(2), 1e-3, 1.0);
  const auto b = solve_perturbed(ShiftToy{}, field, vec1(1.0), random_start(2), 1e-3, 1.0);
  CHECK(a.data() == b.data());
  CHECK(a.times() == b.times());
}

TEST_CASE("error process starts at zero and needs matching grids") {
  const auto field = main_toy_field();
  const auto x = solve_perturbed(ShiftToy{}, field, vec1(1.0), random_start(3), 1e-2, 1.0);
  const auto w = averaged_on_segments(vec1(1.0), field.drift(), 1e-2, 1.0, 4);
  CHECK(error_process(x, w).state(0)(0) == 0.0);
  const auto coarse = averaged_on_segments(vec1(1.0), field.drift(), 2e-2, 1.0, 4);
  CHECK_THROWS_AS(error_process(x, coarse), GridMismatch);
}

TEST_CASE("halving the RK4 step leaves trajectories unchanged to 1e-6") {
  const auto field = main_toy_field();
  const auto a = solve_perturbed(ShiftToy{}, field, vec1(1.0), random_start(4), 1e-2, 1.0, {4, 1});
  const auto b = solve_perturbed(ShiftToy{}, field, vec1(1.0), random_start(4), 1e-2, 1.0, {8, 1});
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) gap = std::max(gap, (a.state(k) - b.state(k)).norm());
  CHECK(gap < 1e-6);
}

TEST_CASE("scaled error stays O(1) across eps") {
  const auto field = main_toy_field();
  std::vector<double> q99;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto w = averaged_on_segments(vec1(1.0), field.drift(), eps, 1.0, 4);
    std::vector<double> sup(1000);
    for_each_task(sup.size(), Exec::Parallel, [&](std::size_t i) {
      const auto x = solve_perturbed(ShiftToy{}, field, vec1(1.0), random_start(100 + i), eps, 1.0);
      sup[i] = std::pow(eps, -0.75) * error_process(x, w).sup_norm();
    });
    std::sort(sup.begin(), sup.end());
    q99.push_back(sup[989]);
  }
  const double lo = *std::min_element(q99.begin(), q99.end());
  const double hi = *std::max_element(q99.begin(), q99.end());
  CHECK(hi / lo < 2.0);
}

TEST_CASE("Birkhoff sums of the zero field vanish") {
  const auto field = build_toy_field(test::zero_spec());
  const auto w = averaged_for_birkhoff(vec1(1.0), field.drift(), 1e-2, 1.0, 4);
  const auto s = birkhoff_sums(ShiftToy{}, field, random_start(5), 1e-2, 1.0, w);
  CHECK(s.v.sup_norm() == 0.0);
  CHECK(s.vtilde.sup_norm() == 0.0);
  CHECK(zwei_shift_sensitivity(ShiftToy{}, field, vec1(1.0), random_start(5), 1e-2, 1.0) == 0.0);
}

TEST_CASE("discrete sum is empty before the first step") {
  const auto field = main_toy_field();
  const auto w = averaged_for_birkhoff(vec1(1.0), field.drift(), 0.1, 1.0, 4);
  const auto vt = discrete_vtilde(ShiftToy{}, field, random_start(6), 0.1, 1.0, w);
  CHECK(vt.time(0) == 0.0);
  CHECK(vt.state(0)(0) == 0.0);
}

TEST_CASE("v carries exactly the eps^(1/4) prefactor on a frozen orbit") {
  std::map<std::int64_t, double> wide;
  for (int a = -200; a <= 200; ++a) wide[a] = 1.0;
  const auto field = build_toy_field(test::toy_spec("phi", wide));
  const ZPoint<BitStreamPoint> zeros{BitStreamPoint::from_prefix(0, 0, CounterRng(1)), 0};
  for (double eps : {1.0 / 64, 1.0 / 128}) {
    const auto w = averaged_for_birkhoff(vec1(1.0), field.drift(), eps, 1.0, 4);
    const auto v = perturbed_birkhoff_v(ShiftToy{}, field, zeros, eps, 1.0, w);
    CHECK(v.back()(0) == doctest::Approx(std::pow(eps, 0.25) / eps).epsilon(1e-12));
  }
}

TEST_CASE("x-independent field: v and vtilde are scaled Birkhoff sums") {
  const auto field = build_toy_field(test::toy_spec());
  const ShiftToy toy;
  const double eps = 1e-3;
  const auto w = averaged_for_birkhoff(vec1(1.0), field.drift(), eps, 1.0, 4);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto start = random_start(200 + i);
    const auto s = birkhoff_sums(toy, field, start, eps, 1.0, w);
    auto p = start;
    double f0 = 0.0, sum = 0.0, fn = 0.0;
    f0 = p.level == 0 ? static_cast<double>(toy.phi(p.base)) : 0.0;
    for (int k = 1; k <= 1000; ++k) {
      step_z_inplace(toy, p);
      fn = p.level == 0 ? static_cast<double>(toy.phi(p.base)) : 0.0;
      sum += fn;
    }
    const double scale = std::pow(eps, 0.25);
    CHECK(s.vtilde.back()(0) == doctest::Approx(scale * sum).epsilon(1e-12));
    CHECK(s.v.back()(0) - s.vtilde.back()(0) == doctest::Approx(scale * (f0 - fn)).epsilon(1e-9));
  }
}

}
