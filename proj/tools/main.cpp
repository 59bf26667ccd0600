// Copyright 2026 The arraylight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <Eigen/Core>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "arraylight/scenario.hpp"

#ifndef ARRAYLIGHT_VERSION
#define ARRAYLIGHT_VERSION "unknown"
#endif

using namespace arraylight;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out = "results";
  int workers = 1;
  std::optional<long long> seed;
  std::optional<std::string> solver;
};

ScenarioConfig resolve(const Options& opt) {
  std::ifstream in(opt.config);
  if (!in) fail(ErrorKind::Io, "cannot read config " + opt.config);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Schema, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::Schema, "<root>: expected an object");
  if (opt.seed) doc["seed"] = *opt.seed;
  if (opt.solver) doc["solver"] = *opt.solver;
  ScenarioConfig c = parse_config(doc);
  check_capabilities(c);
  return c;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

json run_info(const std::string& command, const Options& opt, double seconds) {
  return {{"command", command},
          {"config_path", opt.config},
          {"workers", opt.workers},
          {"wall_seconds", seconds},
          {"timestamp", utc_timestamp()},
          {"versions",
           {{"arraylight", ARRAYLIGHT_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}}}};
}

int execute(const std::string& command, const Options& opt) {
  const ScenarioConfig config = resolve(opt);
  if (command == "validate") {
    std::cout << to_json(config).dump(2) << "\n";
    return exit_status::kOk;
  }
  if (command == "modes") {
    const ScenarioOutput out = modes_output(config);
    const Table& values = out.table("mode_values");
    std::cout << "mode,decay_rate\n";
    for (const auto& row : values.rows) std::cout << row[0] << ',' << row[3] << '\n';
    for (const auto& p : write_outputs(out, config, opt.out, run_info(command, opt, 0.0))) std::cerr << "wrote " << p.string() << "\n";
    return exit_status::kOk;
  }
  const auto start = std::chrono::steady_clock::now();
  const ScenarioOutput out = command == "run" ? run_scenario(config, opt.workers) : sweep_scenario(config, opt.workers);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& p : write_outputs(out, config, opt.out, run_info(command, opt, seconds))) {
    std::cerr << "wrote " << p.string() << "\n";
  }
  if (out.failures > 0) {
    std::cerr << out.failures << " sweep member(s) failed; see metadata\n";
    return exit_status::kMemberFailures;
  }
  return exit_status::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective light scattering from fixed two-level atom arrays"};
  app.require_subcommand(1);
  Options opt;
  long long seed = 0;
  std::string solver;
  auto add_common = [&](CLI::App* sub, bool outputs) {
    sub->add_option("--config", opt.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the config seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--solver", solver, "Override the solver: exact, mf1, mf2, mf3, linear");
    if (outputs) {
      sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
      sub->add_option("--workers", opt.workers, "Worker threads for sweep members")
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
    }
  };
  add_common(app.add_subcommand("run", "Run the scenario at its base parameters"), true);
  add_common(app.add_subcommand("sweep", "Run the scenario over its sweep axis"), true);
  add_common(app.add_subcommand("modes", "Dump the collective eigenmodes of the geometry"), true);
  add_common(app.add_subcommand("validate", "Check a config and print it fully resolved"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_status::kOk : exit_status::kUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--solver")) opt.solver = solver;
  try {
    return execute(sub->get_name(), opt);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_status::kInternal;
  }
}
