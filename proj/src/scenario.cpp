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


#include "arraylight/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "arraylight/cumulant.hpp"
#include "arraylight/exact.hpp"
#include "arraylight/kernel.hpp"
#include "arraylight/observables.hpp"
#include "arraylight/twotime.hpp"

namespace arraylight {

using nlohmann::json;

const char* to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::CollectiveShift: return "collective-shift";
    case ScenarioKind::NormalMode: return "normal-mode";
    case ScenarioKind::DickeDecay: return "dicke-decay";
    case ScenarioKind::G2: return "g2";
  }
  return "unknown";
}

const char* to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::Exact: return "exact";
    case SolverKind::Mf1: return "mf1";
    case SolverKind::Mf2: return "mf2";
    case SolverKind::Mf3: return "mf3";
    case SolverKind::Linear: return "linear";
  }
  return "unknown";
}

const char* to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::Detuning: return "detuning";
    case SweepAxis::Intensity: return "intensity";
    case SweepAxis::Angle: return "angle";
    case SweepAxis::Ensemble: return "configuration-ensemble";
  }
  return "unknown";
}

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& reason) {
  fail(ErrorKind::Schema, field + ": " + reason);
}

template <class Enum, std::size_t K>
Enum pick(const std::string& field, const std::string& value, const std::pair<const char*, Enum> (&choices)[K]) {
  std::string allowed;
  for (const auto& [name, e] : choices) {
    if (value == name) return e;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  schema_error(field, "'" + value + "' is not one of {" + allowed + "}");
}

constexpr std::pair<const char*, ScenarioKind> kScenarioNames[] = {
    {"collective-shift", ScenarioKind::CollectiveShift},
    {"normal-mode", ScenarioKind::NormalMode},
    {"dicke-decay", ScenarioKind::DickeDecay},
    {"g2", ScenarioKind::G2}};
constexpr std::pair<const char*, SolverKind> kSolverNames[] = {{"exact", SolverKind::Exact},
                                                               {"mf1", SolverKind::Mf1},
                                                               {"mf2", SolverKind::Mf2},
                                                               {"mf3", SolverKind::Mf3},
                                                               {"linear", SolverKind::Linear}};
constexpr std::pair<const char*, SweepAxis> kAxisNames[] = {{"none", SweepAxis::None},
                                                            {"detuning", SweepAxis::Detuning},
                                                            {"intensity", SweepAxis::Intensity},
                                                            {"angle", SweepAxis::Angle},
                                                            {"configuration-ensemble", SweepAxis::Ensemble}};
constexpr std::pair<const char*, TransitionKind> kTransitionNames[] = {{"delta-m-0", TransitionKind::DeltaM0},
                                                                       {"delta-m-pm1", TransitionKind::DeltaMpm1}};
constexpr std::pair<const char*, GeometryConfig::Kind> kGeometryNames[] = {
    {"line", GeometryConfig::Kind::Line}, {"standing-wave", GeometryConfig::Kind::StandingWave}};
constexpr std::pair<const char*, DriveConfig::Kind> kDriveNames[] = {{"none", DriveConfig::Kind::None},
                                                                     {"plane-wave", DriveConfig::Kind::PlaneWave},
                                                                     {"eigenmode", DriveConfig::Kind::Eigenmode}};
constexpr std::pair<const char*, StepMethod> kMethodNames[] = {{"rk4", StepMethod::FixedRk4},
                                                               {"rk45", StepMethod::AdaptiveRk45}};

template <class Enum, std::size_t K>
const char* name_of(Enum e, const std::pair<const char*, Enum> (&choices)[K]) {
  for (const auto& [name, v] : choices)
    if (v == e) return name;
  return "unknown";
}

// Reads one JSON object, remembering which keys were consumed.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) schema_error(where(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) schema_error(where(key), "must be finite");
    return x;
  }

  double required_number(const std::string& key) {
    if (!has(key)) schema_error(where(key), "required field is missing");
    return number(key, 0.0);
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) schema_error(where(key), "expected an integer");
    return v.get<long long>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) schema_error(where(key), "expected a string");
    return v.get<std::string>();
  }

  std::string required_string(const std::string& key) {
    if (!has(key)) schema_error(where(key), "required field is missing");
    return string(key, "");
  }

  Vec3 vector(const std::string& key, const Vec3& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 3) schema_error(where(key), "expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) schema_error(where(key), "expected an array of 3 numbers");
      out(i) = v[i].get<double>();
    }
    if (!out.allFinite()) schema_error(where(key), "must be finite");
    return out;
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const json& v = raw(key);
    if (!v.is_array()) schema_error(where(key), "expected an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
      if (!x.is_number()) schema_error(where(key), "expected an array of numbers");
      const double d = x.get<double>();
      if (!std::isfinite(d)) schema_error(where(key), "values must be finite");
      out.push_back(d);
    }
    return out;
  }

  Fields object(const std::string& key) {
    static const json empty = json::object();
    return Fields(has(key) ? raw(key) : empty, where(key));
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) schema_error(where(item.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& reason) {
  if (!ok) schema_error(field, reason);
}

Vec3 unit_or_fail(const Vec3& v, const std::string& field) {
  require(std::abs(v.norm() - 1.0) < 1e-9, field, "must be a unit vector");
  return v;
}

TimeGrid parse_grid(Fields f, const TimeGrid& fallback) {
  TimeGrid g;
  g.t_end = f.number("t_end", fallback.t_end);
  g.step = f.number("step", fallback.step);
  require(g.t_end >= 0.0, f.where("t_end"), "must be >= 0");
  require(g.step > 0.0, f.where("step"), "must be > 0");
  require(g.t_end / g.step <= 1e7, f.where("step"), "grid has too many points");
  f.finish();
  return g;
}

int order_of(SolverKind solver) {
  switch (solver) {
    case SolverKind::Mf1:
    case SolverKind::Linear: return 1;
    case SolverKind::Mf2: return 2;
    case SolverKind::Mf3: return 3;
    case SolverKind::Exact: return 0;
  }
  return 0;
}

}  // namespace

SolverKind parse_solver(const std::string& name) { return pick("solver", name, kSolverNames); }

std::vector<double> TimeGrid::points() const {
  const long count = std::lround(std::floor(t_end / step + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count + 1));
  for (long k = 0; k <= count; ++k) out.push_back(static_cast<double>(k) * step);
  return out;
}

ScenarioConfig parse_config(const json& doc) {
  ScenarioConfig c;
  Fields root(doc, "");
  c.scenario = pick("scenario", root.required_string("scenario"), kScenarioNames);
  c.solver = pick("solver", root.required_string("solver"), kSolverNames);
  const long long seed = root.integer("seed", 1);
  require(seed >= 0, "seed", "must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);

  {
    if (!root.has("geometry")) schema_error("geometry", "required field is missing");
    Fields g = root.object("geometry");
    c.geometry.kind = pick("geometry.kind", g.required_string("kind"), kGeometryNames);
    const TransitionKind default_transition = c.geometry.kind == GeometryConfig::Kind::Line
                                                  ? TransitionKind::DeltaM0
                                                  : TransitionKind::DeltaMpm1;
    c.geometry.transition = pick("geometry.transition", g.string("transition", name_of(default_transition, kTransitionNames)),
                                 kTransitionNames);
    if (c.geometry.kind == GeometryConfig::Kind::Line) {
      const long long n = g.integer("n_atoms", 7);
      require(n >= 1 && n <= 100000, g.where("n_atoms"), "must be a positive integer");
      c.geometry.n_atoms = static_cast<int>(n);
      c.geometry.spacing = g.number("spacing", 0.4);
      require(c.geometry.spacing > 0.0, g.where("spacing"), "must be > 0");
      c.geometry.axis = unit_or_fail(g.vector("axis", Vec3::UnitY()), g.where("axis"));
    } else {
      StandingWaveParams& s = c.geometry.standing;
      const long long sites = g.integer("n_sites", s.n_sites);
      require(sites >= 1 && sites <= 100000, g.where("n_sites"), "must be a positive integer");
      s.n_sites = static_cast<int>(sites);
      s.fill_probability = g.number("fill_probability", s.fill_probability);
      require(s.fill_probability >= 0.0 && s.fill_probability <= 1.0, g.where("fill_probability"), "must be in [0, 1]");
      s.trap_wavelength_ratio = g.number("trap_wavelength_ratio", s.trap_wavelength_ratio);
      require(s.trap_wavelength_ratio > 0.0, g.where("trap_wavelength_ratio"), "must be > 0");
      s.waist = g.number("waist", s.waist);
      require(s.waist > 0.0, g.where("waist"), "must be > 0");
      s.sigma_rho = g.number("sigma_rho", s.sigma_rho);
      require(s.sigma_rho >= 0.0, g.where("sigma_rho"), "must be >= 0");
      s.transition = c.geometry.transition;
      c.geometry.n_atoms = s.n_sites;
    }
    g.finish();
  }

  {
    Fields d = root.object("drive");
    const DriveConfig::Kind fallback =
        c.scenario == ScenarioKind::DickeDecay ? DriveConfig::Kind::None : DriveConfig::Kind::PlaneWave;
    c.drive.kind = pick("drive.kind", d.string("kind", name_of(fallback, kDriveNames)), kDriveNames);
    require(!(d.has("omega") && d.has("intensity")), "drive", "give either omega or intensity, not both");
    if (d.has("intensity")) {
      const double ratio = d.number("intensity", 0.0);
      require(ratio >= 0.0, d.where("intensity"), "must be >= 0");
      c.drive.omega = omega_from_intensity(ratio);
    } else {
      c.drive.omega = d.number("omega", 0.0);
      require(c.drive.omega >= 0.0, d.where("omega"), "must be >= 0");
    }
    c.drive.detuning = d.number("detuning", 0.0);
    c.drive.khat = unit_or_fail(d.vector("khat", Vec3::UnitX()), d.where("khat"));
    const long long mode = d.integer("mode_index", 0);
    require(mode >= 0, d.where("mode_index"), "must be >= 0");
    c.drive.mode_index = static_cast<int>(mode);
    if (c.drive.kind == DriveConfig::Kind::Eigenmode && c.geometry.kind == GeometryConfig::Kind::Line) {
      require(mode < c.geometry.n_atoms, d.where("mode_index"), "must be below the atom count");
    }
    if (c.drive.kind == DriveConfig::Kind::None) {
      require(c.drive.omega == 0.0, d.where("omega"), "a drive of kind none carries no field");
    }
    d.finish();
  }

  {
    Fields det = root.object("detection");
    c.theta_pi = det.number("theta_pi", 0.0);
    det.finish();
  }
  c.times = parse_grid(root.object("times"), TimeGrid{10.0, 0.05});
  c.tau = parse_grid(root.object("tau"), TimeGrid{10.0, 0.05});

  {
    Fields s = root.object("sweep");
    c.sweep_axis = pick("sweep.axis", s.string("axis", "none"), kAxisNames);
    c.sweep_values = s.numbers("values");
    if (c.sweep_axis == SweepAxis::None) {
      require(c.sweep_values.empty(), s.where("values"), "must be empty when the axis is none");
    } else {
      require(!c.sweep_values.empty(), s.where("values"), "must be a nonempty list");
    }
    s.finish();
  }
  {
    Fields e = root.object("ensemble");
    const long long count = e.integer("count", 1);
    require(count >= 1 && count <= 1000000, e.where("count"), "must be a positive integer");
    c.ensemble_count = static_cast<int>(count);
    e.finish();
  }
  {
    Fields in = root.object("integrator");
    c.control.method = pick("integrator.method", in.string("method", "rk4"), kMethodNames);
    c.control.dt = in.number("dt", c.control.dt);
    c.control.rtol = in.number("rtol", c.control.rtol);
    c.control.atol = in.number("atol", c.control.atol);
    c.control.t_max = in.number("t_max", c.control.t_max);
    c.control.dt_min = in.number("dt_min", c.control.dt_min);
    require(c.control.dt > 0.0, in.where("dt"), "must be > 0");
    require(c.control.rtol > 0.0, in.where("rtol"), "must be > 0");
    require(c.control.atol > 0.0, in.where("atol"), "must be > 0");
    require(c.control.t_max > 0.0, in.where("t_max"), "must be > 0");
    require(c.control.dt_min > 0.0, in.where("dt_min"), "must be > 0");
    Fields st = in.object("steady");
    c.steady.window = st.number("window", c.steady.window);
    c.steady.rel_tol = st.number("rel_tol", c.steady.rel_tol);
    c.steady.abs_floor = st.number("abs_floor", c.steady.abs_floor);
    require(c.steady.window > 0.0, st.where("window"), "must be > 0");
    require(c.steady.rel_tol > 0.0, st.where("rel_tol"), "must be > 0");
    require(c.steady.abs_floor > 0.0, st.where("abs_floor"), "must be > 0");
    st.finish();
    in.finish();
  }
  {
    Fields o = root.object("output");
    c.output_prefix = o.string("prefix", to_string(c.scenario));
    require(!c.output_prefix.empty() && c.output_prefix.find_first_of("/\\") == std::string::npos,
            o.where("prefix"), "must be a nonempty file name without separators");
    o.finish();
  }
  root.finish();

  // Cross-field rules.
  const bool standing = c.geometry.kind == GeometryConfig::Kind::StandingWave;
  if (c.scenario == ScenarioKind::DickeDecay) {
    require(c.drive.kind == DriveConfig::Kind::None, "drive.kind", "dicke-decay runs without a drive");
  } else {
    require(c.drive.kind != DriveConfig::Kind::None, "drive.kind", "this scenario needs a drive");
  }
  if (c.scenario == ScenarioKind::NormalMode) {
    require(c.drive.kind == DriveConfig::Kind::Eigenmode, "drive.kind", "normal-mode uses an eigenmode drive");
  }
  if (c.scenario == ScenarioKind::CollectiveShift) {
    require(c.drive.kind == DriveConfig::Kind::PlaneWave, "drive.kind", "collective-shift uses a plane-wave drive");
  }
  switch (c.sweep_axis) {
    case SweepAxis::Angle:
      require(c.scenario == ScenarioKind::G2, "sweep.axis", "the angle axis applies to the g2 scenario");
      break;
    case SweepAxis::Detuning:
    case SweepAxis::Intensity:
      require(c.scenario != ScenarioKind::DickeDecay, "sweep.axis", "dicke-decay has no drive to sweep");
      if (c.sweep_axis == SweepAxis::Intensity) {
        for (double v : c.sweep_values) require(v >= 0.0, "sweep.values", "intensities must be >= 0");
      }
      break;
    case SweepAxis::Ensemble:
      require(standing, "sweep.axis", "the configuration-ensemble axis needs a standing-wave geometry");
      for (double v : c.sweep_values) {
        require(v >= 0.0 && v == std::floor(v) && v < 9.007199254740992e15, "sweep.values",
                "seeds must be nonnegative integers");
      }
      break;
    case SweepAxis::None: break;
  }
  require(c.ensemble_count == 1 || standing, "ensemble.count", "averaging needs a standing-wave geometry");
  return c;
}

void check_capabilities(const ScenarioConfig& c) {
  const int atoms = c.geometry.n_atoms;  // upper bound for standing-wave geometries
  if (c.solver == SolverKind::Exact && atoms > kMaxExactAtoms) {
    fail(ErrorKind::Capability, "solver exact supports at most " + std::to_string(kMaxExactAtoms) + " atoms, config allows " +
                                    std::to_string(atoms));
  }
  if (c.scenario == ScenarioKind::G2 && !(c.solver == SolverKind::Exact || c.solver == SolverKind::Mf2 ||
                                          c.solver == SolverKind::Mf3)) {
    fail(ErrorKind::Capability, std::string("g2 needs solver exact, mf2 or mf3, not ") + to_string(c.solver));
  }
  if (c.scenario == ScenarioKind::DickeDecay && c.solver == SolverKind::Linear) {
    fail(ErrorKind::Capability, "the linear model has no excited-state population; dicke-decay needs another solver");
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Schema, "config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

json to_json(const ScenarioConfig& c) {
  auto vec = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
  json geometry;
  geometry["kind"] = name_of(c.geometry.kind, kGeometryNames);
  geometry["transition"] = name_of(c.geometry.transition, kTransitionNames);
  if (c.geometry.kind == GeometryConfig::Kind::Line) {
    geometry["n_atoms"] = c.geometry.n_atoms;
    geometry["spacing"] = c.geometry.spacing;
    geometry["axis"] = vec(c.geometry.axis);
  } else {
    const StandingWaveParams& s = c.geometry.standing;
    geometry["n_sites"] = s.n_sites;
    geometry["fill_probability"] = s.fill_probability;
    geometry["trap_wavelength_ratio"] = s.trap_wavelength_ratio;
    geometry["waist"] = s.waist;
    geometry["sigma_rho"] = s.sigma_rho;
  }
  json drive;
  drive["kind"] = name_of(c.drive.kind, kDriveNames);
  if (c.drive.kind != DriveConfig::Kind::None) {
    drive["omega"] = c.drive.omega;
    drive["detuning"] = c.drive.detuning;
    if (c.drive.kind == DriveConfig::Kind::PlaneWave) drive["khat"] = vec(c.drive.khat);
    if (c.drive.kind == DriveConfig::Kind::Eigenmode) drive["mode_index"] = c.drive.mode_index;
  }
  json out;
  out["scenario"] = to_string(c.scenario);
  out["solver"] = to_string(c.solver);
  out["seed"] = c.seed;
  out["geometry"] = geometry;
  out["drive"] = drive;
  out["detection"] = {{"theta_pi", c.theta_pi}};
  out["times"] = {{"t_end", c.times.t_end}, {"step", c.times.step}};
  out["tau"] = {{"t_end", c.tau.t_end}, {"step", c.tau.step}};
  out["sweep"] = {{"axis", to_string(c.sweep_axis)}, {"values", c.sweep_values}};
  out["ensemble"] = {{"count", c.ensemble_count}};
  out["integrator"] = {{"method", name_of(c.control.method, kMethodNames)},
                       {"dt", c.control.dt},
                       {"rtol", c.control.rtol},
                       {"atol", c.control.atol},
                       {"t_max", c.control.t_max},
                       {"dt_min", c.control.dt_min},
                       {"steady",
                        {{"window", c.steady.window}, {"rel_tol", c.steady.rel_tol}, {"abs_floor", c.steady.abs_floor}}}};
  out["output"] = {{"prefix", c.output_prefix}};
  return out;
}

AtomArray build_geometry(const GeometryConfig& g, std::uint64_t seed) {
  if (g.kind == GeometryConfig::Kind::Line) return build_line_array(g.n_atoms, g.spacing, g.axis, g.transition);
  StandingWaveParams p = g.standing;
  p.seed = seed;
  p.transition = g.transition;
  return build_standing_wave_array(p);
}

std::size_t Table::column(const std::string& prefix) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& h = header[i];
    if (h.compare(0, prefix.size(), prefix) == 0 &&
        (h.size() == prefix.size() || h[prefix.size()] == ' ' || h[prefix.size()] == '[')) {
      return i;
    }
  }
  fail(ErrorKind::InvalidArgument, "table " + name + " has no column " + prefix);
}

const Table& ScenarioOutput::table(const std::string& name) const {
  for (const Table& t : tables)
    if (t.name == name) return t;
  fail(ErrorKind::InvalidArgument, "no output table named " + name);
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  char buf[64];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (std::isnan(row[i])) {
        out += "nan";
      } else {
        const auto res = std::to_chars(buf, buf + sizeof buf, row[i]);
        out.append(buf, res.ptr);
      }
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solvers

namespace {

struct Problem {
  AtomArray array;
  CouplingSet couplings;
};

Problem make_problem(const ScenarioConfig& c, std::uint64_t seed) {
  AtomArray array = build_geometry(c.geometry, seed);
  if (c.solver == SolverKind::Exact && array.size() > static_cast<std::size_t>(kMaxExactAtoms)) {
    fail(ErrorKind::Capability, "solver exact supports at most " + std::to_string(kMaxExactAtoms) + " atoms, geometry has " +
                                    std::to_string(array.size()));
  }
  CouplingSet cs = coupling_set(array);
  return {std::move(array), std::move(cs)};
}

DriveField make_drive(const ScenarioConfig& c, const Problem& p, double omega, double detuning) {
  switch (c.drive.kind) {
    case DriveConfig::Kind::None: return zero_drive(p.array);
    case DriveConfig::Kind::PlaneWave: return plane_wave_drive(p.array, omega, c.drive.khat, detuning);
    case DriveConfig::Kind::Eigenmode: {
      const ModeSet modes = eigenmodes(p.couplings);
      if (c.drive.mode_index >= modes.size()) fail(ErrorKind::InvalidArgument, "drive.mode_index exceeds the mode count");
      DriveField d = eigenmode_drive(p.array, modes.modes.col(c.drive.mode_index), omega);
      d.detuning.setConstant(detuning);
      return d;
    }
  }
  return zero_drive(p.array);
}

// Steady state in whichever representation the solver uses.
struct Steady {
  std::optional<DensityMatrix> rho;
  std::optional<HierarchyState> state;
  SteadyResult info;
};

Steady solve_steady(const ScenarioConfig& c, const Problem& p, const DriveField& drive, SolverKind solver,
                    const Steady* warm = nullptr) {
  Steady out;
  const int n = static_cast<int>(p.array.size());
  if (solver == SolverKind::Exact) {
    ExactEvolutionOptions opt{c.control, c.steady};
    const DensityMatrix start = warm && warm->rho ? *warm->rho : ground_state(n);
    ExactSteadyState ss = exact_steady_state(start, drive, p.couplings, opt);
    out.rho = std::move(ss.rho);
    out.info = std::move(ss.info);
  } else {
    HierarchyOptions opt{c.control, c.steady};
    const HierarchyState start = warm && warm->state ? *warm->state : initial_ground(n, order_of(solver));
    HierarchySteadyState ss = hierarchy_steady_state(start, one_atom_terms(drive), two_atom_tensors(p.couplings),
                                                     solver == SolverKind::Linear, opt);
    out.state = std::move(ss.state);
    out.info = std::move(ss.info);
  }
  return out;
}

ScatterRates rates_of(const Steady& s, const CouplingSet& cs) {
  return s.rho ? scattering_rates(*s.rho, cs) : scattering_rates(*s.state, cs);
}

double mean_excitation(const Steady& s) {
  const Eigen::VectorXcd singles = s.rho ? exact_singles(*s.rho) : hierarchy_singles(*s.state);
  const Eigen::Index n = singles.size() / 3;
  double sum = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) sum += singles(3 * a + 1).real();
  return sum / static_cast<double>(n);
}

// Most negative populations, a monitor for unphysical closures.
json negativity_monitor(const Steady& s) {
  json m;
  if (s.rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.rho->data, Eigen::EigenvaluesOnly);
    m["min_density_eigenvalue"] = es.eigenvalues().minCoeff();
    return m;
  }
  const HierarchyState& h = *s.state;
  const int n = h.layout().n_atoms;
  double min_single = std::numeric_limits<double>::infinity();
  double min_pair = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) min_single = std::min(min_single, h.single(a, 0).real());
  if (h.layout().order >= 2) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < a; ++b) min_pair = std::min(min_pair, h.pair(a, 0, b, 0).real());
  }
  m["min_single_excitation"] = min_single;
  if (std::isfinite(min_pair)) m["min_pair_excitation"] = min_pair;
  return m;
}

json steady_diagnostics(const Steady& s) {
  json d = negativity_monitor(s);
  d["t_steady"] = s.info.t_steady;
  d["steady_residual"] = s.info.residual;
  return d;
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. Errors are returned per index.
std::vector<std::optional<Error>> parallel_for(std::size_t count, int workers,
                                               const std::function<void(std::size_t)>& fn) {
  std::vector<std::optional<Error>> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (const Error& e) {
        errors[i] = e;
      } catch (const std::exception& e) {
        errors[i] = Error(ErrorKind::NumericalFailure, e.what());
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return errors;
}

json error_json(const Error& e) { return {{"kind", to_string(e.kind())}, {"message", e.what()}}; }

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Scenario evaluators

ScenarioOutput dicke_decay(const ScenarioConfig& c) {
  const Problem p = make_problem(c, c.seed);
  const DriveField drive = zero_drive(p.array);
  const std::vector<double> times = c.times.points();
  Table curve{"gamma_t",
              {"time [1/Gamma]", "gamma [Gamma]", "gamma_coherent [Gamma]", "gamma_incoherent [Gamma]",
               "mean_excitation [1]"},
              {}};
  const int n = static_cast<int>(p.array.size());
  double min_single = std::numeric_limits<double>::infinity();
  auto record = [&](double t, const ScatterRates& r, const Eigen::VectorXcd& singles) {
    double e = 0.0;
    for (int a = 0; a < n; ++a) {
      e += singles(3 * a + 1).real();
      min_single = std::min(min_single, singles(3 * a + 1).real());
    }
    curve.rows.push_back({t, r.gamma_total, r.gamma_coherent, r.gamma_incoherent, e / n});
  };
  if (c.solver == SolverKind::Exact) {
    DensityMatrix rho = all_excited_state(n);
    evolve_exact(rho, drive, p.couplings, c.control, times, [&](double t, const DensityMatrix& r) {
      record(t, scattering_rates(r, p.couplings), exact_singles(r));
    });
  } else {
    HierarchyState s = initial_all_excited(n, order_of(c.solver));
    evolve_hierarchy(s, one_atom_terms(drive), two_atom_tensors(p.couplings), false, c.control, times,
                     [&](double t, const HierarchyState& h) {
                       record(t, scattering_rates(h, p.couplings), hierarchy_singles(h));
                     });
  }
  double peak = -std::numeric_limits<double>::infinity(), t_peak = 0.0;
  for (const auto& row : curve.rows) {
    if (row[1] > peak) {
      peak = row[1];
      t_peak = row[0];
    }
  }
  ScenarioOutput out;
  out.tables.push_back(curve);
  out.tables.push_back(Table{"summary",
                             {"n_atoms [1]", "gamma_initial [Gamma]", "gamma_peak [Gamma]", "t_peak [1/Gamma]"},
                             {{static_cast<double>(n), curve.rows.empty() ? 0.0 : curve.rows.front()[1], peak, t_peak}}});
  out.diagnostics["min_single_excitation"] = min_single;
  return out;
}

ScenarioOutput g2_angles(const ScenarioConfig& c, const std::vector<double>& thetas, int workers) {
  const Problem p = make_problem(c, c.seed);
  const DriveField drive = make_drive(c, p, c.drive.omega, c.drive.detuning);
  const Steady steady = solve_steady(c, p, drive, c.solver);
  const std::vector<double> tau = c.tau.points();
  std::vector<std::vector<double>> curves(thetas.size());
  std::vector<std::vector<double>> rows(thetas.size());
  std::vector<json> diags(thetas.size());
  const auto errors = parallel_for(thetas.size(), workers, [&](std::size_t i) {
    const DetectionDirection dir = detection_direction(p.array, xy_direction(thetas[i] * std::numbers::pi));
    if (steady.rho) {
      const G2Curve g = g2_exact_from_state(*steady.rho, drive, p.couplings, dir, tau, c.control);
      curves[i] = g.g2;
      rows[i] = {thetas[i], g.intensity, g.g2.front(), g.g2.back(), std::nan(""), std::nan("")};
    } else {
      const G2HierarchyResult g = g2_hierarchy_from_state(*steady.state, drive, p.couplings, dir, tau, c.control);
      curves[i] = g.g2;
      rows[i] = {thetas[i],
                 g.diagnostics.intensity,
                 g.g2.front(),
                 g.diagnostics.asymptote,
                 g.diagnostics.min_pair_excitation,
                 g.diagnostics.max_pair_excitation};
      diags[i] = {{"conjugation_defect", g.diagnostics.conjugation_defect}};
    }
  });
  ScenarioOutput out;
  Table summary{"intensity",
                {"theta [pi]", "intensity [Gamma]", "g2_zero [1]", "g2_last [1]", "min_pair_excitation_after_reset [1]",
                 "max_pair_excitation_after_reset [1]", "failed [1]"},
                {}};
  Table curve{"g2", {"tau [1/Gamma]"}, {}};
  curve.rows.assign(tau.size(), {});
  for (std::size_t k = 0; k < tau.size(); ++k) curve.rows[k].push_back(tau[k]);
  out.diagnostics["steady"] = steady_diagnostics(steady);
  json per_angle = json::array();
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    curve.header.push_back("g2[theta=" + format_number(thetas[i]) + "pi] [1]");
    if (errors[i]) {
      ++out.failures;
      summary.rows.push_back({thetas[i], NAN, NAN, NAN, NAN, NAN, 1.0});
      for (auto& row : curve.rows) row.push_back(NAN);
      per_angle.push_back({{"theta_pi", thetas[i]}, {"error", error_json(*errors[i])}});
      continue;
    }
    rows[i].push_back(0.0);
    summary.rows.push_back(rows[i]);
    for (std::size_t k = 0; k < tau.size(); ++k) curve.rows[k].push_back(curves[i][k]);
    json d = diags[i].is_null() ? json::object() : diags[i];
    d["theta_pi"] = thetas[i];
    per_angle.push_back(d);
  }
  out.diagnostics["angles"] = per_angle;
  out.tables.push_back(summary);
  out.tables.push_back(curve);
  return out;
}

struct NormalModePoint {
  std::vector<double> row;
  json diagnostics;
};

NormalModePoint normal_mode_point(const ScenarioConfig& c, const Problem& p, double omega, double detuning) {
  const DriveField drive = make_drive(c, p, omega, detuning);
  const Steady s = solve_steady(c, p, drive, c.solver);
  const Steady lin = c.solver == SolverKind::Linear ? s : solve_steady(c, p, drive, SolverKind::Linear);
  const ScatterRates r = rates_of(s, p.couplings);
  const ScatterRates rl = rates_of(lin, p.couplings);
  if (std::abs(r.gamma_coherent) < 1e-14) fail(ErrorKind::Domain, "coherent scattering rate vanishes");
  const double dgc = (rl.gamma_coherent - r.gamma_coherent) / r.gamma_coherent;
  NormalModePoint out;
  out.row = {intensity_ratio(omega), omega,         detuning,  r.gamma_total, r.gamma_coherent, r.gamma_incoherent,
             r.gamma_incoherent / r.gamma_coherent, rl.gamma_coherent, dgc};
  out.diagnostics = steady_diagnostics(s);
  out.diagnostics["linear_t_steady"] = lin.info.t_steady;
  return out;
}

const std::vector<std::string> kNormalModeHeader = {
    "intensity_ratio [I_s]", "omega [Gamma]",          "detuning [Gamma]",
    "gamma [Gamma]",         "gamma_coherent [Gamma]", "gamma_incoherent [Gamma]",
    "incoherent_over_coherent [1]", "gamma_coherent_linear [Gamma]", "delta_gamma_coherent [1]"};

ScenarioOutput normal_mode(const ScenarioConfig& c, const std::vector<double>& omegas, const std::vector<double>& detunings,
                           int workers) {
  const Problem p = make_problem(c, c.seed);
  const ModeSet modes = eigenmodes(p.couplings);
  std::vector<NormalModePoint> points(omegas.size());
  const auto errors = parallel_for(omegas.size(), workers, [&](std::size_t i) {
    points[i] = normal_mode_point(c, p, omegas[i], detunings[i]);
  });
  ScenarioOutput out;
  Table t{"scattering", kNormalModeHeader, {}};
  t.header.push_back("failed [1]");
  json per_point = json::array();
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (errors[i]) {
      ++out.failures;
      std::vector<double> row(kNormalModeHeader.size(), NAN);
      row[0] = intensity_ratio(omegas[i]);
      row[1] = omegas[i];
      row[2] = detunings[i];
      row.push_back(1.0);
      t.rows.push_back(row);
      per_point.push_back({{"error", error_json(*errors[i])}});
      continue;
    }
    points[i].row.push_back(0.0);
    t.rows.push_back(points[i].row);
    per_point.push_back(points[i].diagnostics);
  }
  out.tables.push_back(t);
  out.diagnostics["mode_index"] = c.drive.mode_index;
  out.diagnostics["mode_decay_rate"] = modes.decay_rates(c.drive.mode_index);
  out.diagnostics["points"] = per_point;
  return out;
}

// Per-configuration detuning scan with warm starts; returns mean excitation per detuning.
std::vector<double> excitation_scan(const ScenarioConfig& c, std::uint64_t seed, const std::vector<double>& detunings,
                                    json& diag) {
  const Problem p = make_problem(c, seed);
  std::vector<double> out;
  Steady previous;
  bool have_previous = false;
  double max_t = 0.0;
  for (double delta : detunings) {
    const DriveField drive = make_drive(c, p, c.drive.omega, delta);
    Steady s = solve_steady(c, p, drive, c.solver, have_previous ? &previous : nullptr);
    out.push_back(mean_excitation(s));
    max_t = std::max(max_t, s.info.t_steady);
    previous = std::move(s);
    have_previous = true;
  }
  diag = {{"seed", seed}, {"n_atoms", p.array.size()}, {"max_t_steady", max_t}};
  return out;
}

ScenarioOutput collective_shift(const ScenarioConfig& c, const std::vector<double>& detunings, int workers) {
  // Scan in ascending detuning so warm starts follow a continuous path.
  std::vector<std::size_t> order(detunings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return detunings[a] < detunings[b]; });
  std::vector<double> sorted;
  for (std::size_t i : order) sorted.push_back(detunings[i]);

  const std::size_t members = static_cast<std::size_t>(c.ensemble_count);
  std::vector<std::vector<double>> values(members);
  std::vector<json> diags(members);
  const auto errors = parallel_for(members, workers, [&](std::size_t m) {
    values[m] = excitation_scan(c, c.seed + m, sorted, diags[m]);
  });

  ScenarioOutput out;
  Table mean{"excitation",
             {"detuning [Gamma]", "mean_excitation [1]", "standard_error [1]", "configurations [1]", "failed [1]"},
             {}};
  Table each{"excitation_members", {"seed [1]", "detuning [Gamma]", "mean_excitation [1]"}, {}};
  json member_diag = json::array();
  std::size_t ok = 0;
  for (std::size_t m = 0; m < members; ++m) {
    if (errors[m]) {
      ++out.failures;
      member_diag.push_back({{"seed", c.seed + m}, {"error", error_json(*errors[m])}});
      continue;
    }
    ++ok;
    member_diag.push_back(diags[m]);
    for (std::size_t k = 0; k < sorted.size(); ++k)
      each.rows.push_back({static_cast<double>(c.seed + m), sorted[k], values[m][k]});
  }
  std::vector<double> x, y;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t m = 0; m < members; ++m) {
      if (errors[m]) continue;
      sum += values[m][k];
      sq += values[m][k] * values[m][k];
    }
    const double avg = ok ? sum / ok : NAN;
    const double var = ok > 1 ? std::max(0.0, (sq - ok * avg * avg) / (ok - 1)) : 0.0;
    const double se = ok > 1 ? std::sqrt(var / ok) : (ok ? 0.0 : NAN);
    mean.rows.push_back({sorted[k], avg, se, static_cast<double>(ok), static_cast<double>(members - ok)});
    if (ok) {
      x.push_back(sorted[k]);
      y.push_back(avg);
    }
  }
  out.tables.push_back(mean);
  out.tables.push_back(each);
  out.diagnostics["members"] = member_diag;
  if (x.size() >= 8) {
    try {
      const LorentzianFit fit = lorentzian_fit(x, y);
      out.tables.push_back(Table{"fit",
                                 {"center [Gamma]", "half_width [Gamma]", "amplitude [1]", "offset [1]", "rms_residual [1]",
                                  "iterations [1]"},
                                 {{fit.center, fit.width, fit.amplitude, fit.offset, fit.residual,
                                   static_cast<double>(fit.iterations)}}});
      out.diagnostics["fit"] = {{"center", fit.center}, {"residual", fit.residual}};
    } catch (const Error& e) {
      ++out.failures;
      out.diagnostics["fit"] = {{"error", error_json(e)}};
    }
  } else {
    out.diagnostics["fit"] = "skipped: fewer than 8 successful detunings";
  }
  return out;
}

ScenarioOutput evaluate(const ScenarioConfig& c, int workers) {
  switch (c.scenario) {
    case ScenarioKind::DickeDecay: return dicke_decay(c);
    case ScenarioKind::G2: return g2_angles(c, {c.theta_pi}, workers);
    case ScenarioKind::NormalMode: return normal_mode(c, {c.drive.omega}, {c.drive.detuning}, workers);
    case ScenarioKind::CollectiveShift: return collective_shift(c, {c.drive.detuning}, workers);
  }
  return {};
}

// Stacks member outputs along an axis column. Tables whose first column is shared
// (curves) gain one column per member instead.
ScenarioOutput stack_members(const std::string& axis_header, const std::vector<double>& axis,
                             const std::vector<std::optional<ScenarioOutput>>& members,
                             const std::vector<std::optional<Error>>& errors) {
  ScenarioOutput out;
  const ScenarioOutput* first = nullptr;
  for (const auto& m : members)
    if (m) {
      first = &*m;
      break;
    }
  json per_member = json::array();
  for (std::size_t i = 0; i < members.size(); ++i) {
    json d = {{"axis_value", axis[i]}};
    if (errors[i]) {
      d["error"] = error_json(*errors[i]);
      ++out.failures;
    } else {
      d["diagnostics"] = members[i]->diagnostics;
      out.failures += members[i]->failures;
    }
    per_member.push_back(d);
  }
  out.diagnostics["members"] = per_member;
  if (!first) return out;
  const std::string axis_name = axis_header.substr(0, axis_header.find(' '));
  for (std::size_t t = 0; t < first->tables.size(); ++t) {
    const Table& proto = first->tables[t];
    const bool curve = proto.name == "g2" || proto.name == "gamma_t";
    Table merged{proto.name, {}, {}};
    if (curve) {
      merged.header.push_back(proto.header[0]);
      for (const auto& row : proto.rows) merged.rows.push_back({row[0]});
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t col = 1; col < proto.header.size(); ++col) {
          const std::string& h = proto.header[col];
          const std::size_t split = h.find(' ');
          merged.header.push_back(h.substr(0, split) + "[" + axis_name + "=" + format_number(axis[i]) + "]" +
                                  (split == std::string::npos ? "" : h.substr(split)));
          for (std::size_t k = 0; k < merged.rows.size(); ++k) {
            merged.rows[k].push_back(members[i] ? members[i]->tables[t].rows[k][col] : NAN);
          }
        }
      }
    } else {
      merged.header.push_back(axis_header);
      merged.header.insert(merged.header.end(), proto.header.begin(), proto.header.end());
      merged.header.push_back("member_failed [1]");
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (!members[i]) {
          std::vector<double> row(merged.header.size(), NAN);
          row.front() = axis[i];
          row.back() = 1.0;
          merged.rows.push_back(row);
          continue;
        }
        for (const auto& r : members[i]->tables[t].rows) {
          std::vector<double> row{axis[i]};
          row.insert(row.end(), r.begin(), r.end());
          row.push_back(0.0);
          merged.rows.push_back(row);
        }
      }
    }
    out.tables.push_back(std::move(merged));
  }
  return out;
}

// Mean, standard error and member count of every column over ensemble members.
Table aggregate(const Table& stacked) {
  const std::size_t failed_col = stacked.header.size() - 1;
  Table agg{stacked.name + "_aggregate", {"statistic [0=mean 1=standard_error 2=members]"}, {}};
  agg.header.insert(agg.header.end(), stacked.header.begin() + 1, stacked.header.begin() + failed_col);
  std::vector<double> mean_row{0.0}, se_row{1.0}, count_row{2.0};
  for (std::size_t col = 1; col < failed_col; ++col) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& row : stacked.rows) {
      if (row[failed_col] != 0.0 || std::isnan(row[col])) continue;
      sum += row[col];
      sq += row[col] * row[col];
      ++n;
    }
    const double mean = n ? sum / n : NAN;
    const double se = n > 1 ? std::sqrt(std::max(0.0, (sq - n * mean * mean) / (n - 1)) / n) : (n ? 0.0 : NAN);
    mean_row.push_back(mean);
    se_row.push_back(se);
    count_row.push_back(static_cast<double>(n));
  }
  agg.rows = {mean_row, se_row, count_row};
  return agg;
}

}  // namespace

ScenarioOutput run_scenario(const ScenarioConfig& config, int workers) {
  check_capabilities(config);
  return evaluate(config, workers);
}

ScenarioOutput sweep_scenario(const ScenarioConfig& config, int workers) {
  check_capabilities(config);
  const ScenarioConfig& c = config;
  const std::vector<double>& v = c.sweep_values;
  switch (c.sweep_axis) {
    case SweepAxis::None: return evaluate(c, workers);
    case SweepAxis::Angle: return g2_angles(c, v, workers);
    case SweepAxis::Detuning:
      if (c.scenario == ScenarioKind::CollectiveShift) return collective_shift(c, v, workers);
      if (c.scenario == ScenarioKind::NormalMode) {
        return normal_mode(c, std::vector<double>(v.size(), c.drive.omega), v, workers);
      }
      break;
    case SweepAxis::Intensity:
      if (c.scenario == ScenarioKind::NormalMode) {
        std::vector<double> omegas;
        for (double ratio : v) omegas.push_back(omega_from_intensity(ratio));
        return normal_mode(c, omegas, std::vector<double>(v.size(), c.drive.detuning), workers);
      }
      break;
    case SweepAxis::Ensemble: break;
  }
  // Generic path: independent member runs stacked along the axis.
  std::vector<std::optional<ScenarioOutput>> members(v.size());
  const auto errors = parallel_for(v.size(), workers, [&](std::size_t i) {
    ScenarioConfig m = c;
    m.sweep_axis = SweepAxis::None;
    m.sweep_values.clear();
    switch (c.sweep_axis) {
      case SweepAxis::Detuning: m.drive.detuning = v[i]; break;
      case SweepAxis::Intensity: m.drive.omega = omega_from_intensity(v[i]); break;
      case SweepAxis::Ensemble:
        m.seed = static_cast<std::uint64_t>(v[i]);
        m.ensemble_count = 1;
        break;
      default: break;
    }
    members[i] = evaluate(m, 1);
  });
  const std::string header = c.sweep_axis == SweepAxis::Detuning    ? "detuning [Gamma]"
                             : c.sweep_axis == SweepAxis::Intensity ? "intensity_ratio [I_s]"
                                                                    : "seed [1]";
  ScenarioOutput out = stack_members(header, v, members, errors);
  if (c.sweep_axis == SweepAxis::Ensemble) {
    const std::size_t count = out.tables.size();
    for (std::size_t t = 0; t < count; ++t) {
      if (out.tables[t].header.front() == header) out.tables.push_back(aggregate(out.tables[t]));
    }
  }
  return out;
}

ScenarioOutput modes_output(const ScenarioConfig& config) {
  const AtomArray array = build_geometry(config.geometry, config.seed);
  const ModeSet modes = eigenmodes(coupling_set(array));
  ScenarioOutput out;
  Table values{"mode_values",
               {"mode [1]", "eigenvalue_re [Gamma]", "eigenvalue_im [Gamma]", "decay_rate [Gamma]"},
               {}};
  Table vectors{"mode_vectors", {"mode [1]", "atom [1]", "amplitude_re [1]", "amplitude_im [1]"}, {}};
  Table positions{"positions", {"atom [1]", "x [lambda]", "y [lambda]", "z [lambda]"}, {}};
  for (Eigen::Index a = 0; a < modes.size(); ++a) {
    values.rows.push_back({static_cast<double>(a), modes.eigenvalues(a).real(), modes.eigenvalues(a).imag(),
                           modes.decay_rates(a)});
    for (Eigen::Index n = 0; n < modes.modes.rows(); ++n) {
      vectors.rows.push_back({static_cast<double>(a), static_cast<double>(n), modes.modes(n, a).real(),
                              modes.modes(n, a).imag()});
    }
  }
  for (std::size_t n = 0; n < array.size(); ++n) {
    const Vec3& r = array.position(n);
    positions.rows.push_back({static_cast<double>(n), r.x(), r.y(), r.z()});
  }
  out.tables = {values, vectors, positions};
  return out;
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Schema: return 3;
    case ErrorKind::Capability: return 4;
    case ErrorKind::Io: return 5;
    case ErrorKind::InvalidArgument: return 10;
    case ErrorKind::Domain: return 11;
    case ErrorKind::Singularity: return 12;
    case ErrorKind::DimensionMismatch: return 13;
    case ErrorKind::NumericalFailure: return 14;
    case ErrorKind::NumericalConsistency: return 15;
    case ErrorKind::ProjectionDegenerate: return 16;
    case ErrorKind::IntegrationFailure: return 17;
    case ErrorKind::SteadyStateFailure: return 18;
    case ErrorKind::FitFailure: return 19;
    case ErrorKind::Eigensolver: return 20;
  }
  return exit_status::kInternal;
}

std::vector<std::filesystem::path> write_outputs(const ScenarioOutput& output, const ScenarioConfig& config,
                                                 const std::filesystem::path& dir, const json& run_info) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
  // Write to temporary names first so a failed write leaves no partial result set.
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  for (const Table& t : output.tables) {
    files.emplace_back(dir / (config.output_prefix + "_" + t.name + ".csv"), format_csv(t));
  }
  json meta;
  meta["config"] = to_json(config);
  meta["run"] = run_info;
  meta["diagnostics"] = output.diagnostics;
  meta["member_failures"] = output.failures;
  json tables = json::array();
  for (const Table& t : output.tables) tables.push_back({{"name", t.name}, {"columns", t.header}, {"rows", t.rows.size()}});
  meta["tables"] = tables;
  files.emplace_back(dir / (config.output_prefix + "_metadata.json"), meta.dump(2) + "\n");

  std::vector<std::filesystem::path> written;
  for (const auto& [path, body] : files) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    std::ofstream f(tmp, std::ios::binary);
    f << body;
    f.close();
    if (!f) {
      for (const auto& [p, b] : files) {
        std::filesystem::path t = p;
        t += ".partial";
        std::filesystem::remove(t, ec);
      }
      fail(ErrorKind::Io, "cannot write " + tmp.string());
    }
  }
  for (const auto& [path, body] : files) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
    written.push_back(path);
  }
  return written;
}

}  // namespace arraylight
