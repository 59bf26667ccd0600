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


#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "arraylight/core.hpp"
#include "arraylight/integrate.hpp"

namespace arraylight {

enum class ScenarioKind { CollectiveShift, NormalMode, DickeDecay, G2 };
enum class SolverKind { Exact, Mf1, Mf2, Mf3, Linear };
enum class SweepAxis { None, Detuning, Intensity, Angle, Ensemble };

const char* to_string(ScenarioKind kind) noexcept;
const char* to_string(SolverKind kind) noexcept;
const char* to_string(SweepAxis axis) noexcept;
SolverKind parse_solver(const std::string& name);

struct GeometryConfig {
  enum class Kind { Line, StandingWave } kind = Kind::Line;
  int n_atoms = 7;
  double spacing = 0.4;
  Vec3 axis = Vec3::UnitY();
  TransitionKind transition = TransitionKind::DeltaM0;
  StandingWaveParams standing{};  // seed comes from ScenarioConfig::seed
};

struct DriveConfig {
  enum class Kind { None, PlaneWave, Eigenmode } kind = Kind::PlaneWave;
  double omega = 0.0;
  double detuning = 0.0;
  Vec3 khat = Vec3::UnitX();
  int mode_index = 0;  // position in the descending decay-rate order
};

struct TimeGrid {
  double t_end = 10.0;
  double step = 0.05;
  std::vector<double> points() const;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::G2;
  SolverKind solver = SolverKind::Mf2;
  std::uint64_t seed = 1;
  GeometryConfig geometry{};
  DriveConfig drive{};
  double theta_pi = 0.0;  // detection angle in the xy-plane, units of pi
  TimeGrid times{};       // dicke-decay sampling
  TimeGrid tau{};         // g2 delays
  SweepAxis sweep_axis = SweepAxis::None;
  std::vector<double> sweep_values;
  int ensemble_count = 1;  // configurations averaged per point (standing-wave only)
  StepControl control{};
  SteadyCriterion steady{};
  std::string output_prefix;
};

/// Parses and validates a config document. Unknown keys are rejected.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Capability checks that depend on solver and geometry together.
void check_capabilities(const ScenarioConfig& config);
/// Fully resolved config, parseable by parse_config.
nlohmann::json to_json(const ScenarioConfig& config);

AtomArray build_geometry(const GeometryConfig& geometry, std::uint64_t seed);

struct Table {
  std::string name;
  std::vector<std::string> header;  // "name [unit]"
  std::vector<std::vector<double>> rows;
  std::size_t column(const std::string& prefix) const;  // index of the column whose name starts with prefix
};

std::string format_csv(const Table& table);

struct ScenarioOutput {
  std::vector<Table> tables;
  nlohmann::json diagnostics = nlohmann::json::object();
  int failures = 0;
  const Table& table(const std::string& name) const;
};

/// Single evaluation at the base config values.
ScenarioOutput run_scenario(const ScenarioConfig& config, int workers = 1);
/// Evaluation over the configured sweep axis; member failures are recorded per row.
ScenarioOutput sweep_scenario(const ScenarioConfig& config, int workers = 1);

/// Writes every table as CSV and a metadata document. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const ScenarioOutput& output, const ScenarioConfig& config,
                                                 const std::filesystem::path& dir, const nlohmann::json& run_info);

ScenarioOutput modes_output(const ScenarioConfig& config);

/// Process exit status for each failure class.
namespace exit_status {
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kUsage = 2;
inline constexpr int kMemberFailures = 6;  // sweep finished, some members failed
}  // namespace exit_status
int exit_code(ErrorKind kind) noexcept;

}  // namespace arraylight
