#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "infavg/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite: one PASS/FAIL line per criterion"};
  std::vector<int> ids;
  std::uint64_t seed = 20261018;
  int threads = 0;
  bool serial = false;
  std::string json_path;
  app.add_option("--criterion,-c", ids, "criterion ids to run (default: all)")->check(CLI::Range(1, infavg::kCriterionCount));
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the default)");
  app.add_flag("--serial", serial, "use the serial reference kernels");
  app.add_option("--json", json_path, "also write the results as JSON");
  CLI11_PARSE(app, argc, argv);

  if (ids.empty())
    for (int i = 1; i <= infavg::kCriterionCount; ++i) ids.push_back(i);
  infavg::set_threads(threads);
  infavg::AcceptanceOptions opts;
  opts.seed = seed;
  opts.exec = serial ? infavg::Exec::Serial : infavg::Exec::Parallel;

  nlohmann::json report = nlohmann::json::array();
  bool all = true;
  for (int id : ids) {
    infavg::CriterionResult r;
    try {
      r = infavg::run_criterion(id, opts);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.summary = std::string("error: ") + e.what();
    }
    std::cout << infavg::format_line(r) << std::endl;
    report.push_back(infavg::to_json(r));
    all = all && r.pass;
  }
  if (!json_path.empty()) std::ofstream(json_path) << report.dump(2) << '\n';
  return all ? 0 : 1;
}
