// Copyright 2026 The tdvp-langevin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tdvpl/config.hpp"

#include <cmath>
#include <set>

#include "json.hpp"
#include "tdvpl/errors.hpp"
#include "tdvpl/hashing.hpp"
#include "tdvpl/io.hpp"

namespace tdvpl {

using json = nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& j, const std::string& key, const T& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

double positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name + " must be positive");
  return v;
}

long ratio(double a, double b, const std::string& what) {
  const double r = a / b;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, std::abs(r))) throw ConfigError(what);
  return static_cast<long>(n);
}

BathParams parse_bath(const json& j, const std::string& where) {
  check_keys(j, {"gamma", "temperature", "noise"}, where);
  const double gamma = get<double>(j, "gamma", 0.0, where);
  const bool has_t = j.contains("temperature");
  const bool has_noise = j.contains("noise");
  if (has_t && has_noise) throw ConfigError(where + ": give either temperature or noise, not both");
  try {
    if (has_noise) {
      BathParams b{gamma, get<double>(j, "noise", 0.0, where)};
      b.validate();
      return b;
    }
    return BathParams::from_temperature(gamma, get<double>(j, "temperature", 0.0, where));
  } catch (const ContractViolation& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

json bath_json(const BathParams& b) { return json{{"gamma", b.gamma}, {"noise", b.noise}}; }

IsingParams parse_ising(const json& j) {
  check_keys(j, {"J", "h", "g"}, "ising");
  IsingParams p;
  p.J = get<double>(j, "J", p.J, "ising");
  p.h = get<double>(j, "h", p.h, "ising");
  p.g = get<double>(j, "g", p.g, "ising");
  return p;
}

NoiseScheme parse_scheme(const std::string& s) {
  if (s == "stratonovich") return NoiseScheme::stratonovich;
  if (s == "explicit") return NoiseScheme::explicit_euler;
  throw ConfigError("scheme must be 'stratonovich' or 'explicit'");
}

std::string scheme_name(NoiseScheme s) { return s == NoiseScheme::stratonovich ? "stratonovich" : "explicit"; }

MetropolisOptions parse_metropolis(const json& j, const std::string& where) {
  check_keys(j, {"burn_in_sweeps", "sweeps_between_samples", "redraw_probability", "initial_step"}, where);
  MetropolisOptions m;
  m.burn_in_sweeps = get<int>(j, "burn_in_sweeps", m.burn_in_sweeps, where);
  m.sweeps_between_samples = get<int>(j, "sweeps_between_samples", m.sweeps_between_samples, where);
  m.redraw_probability = get<double>(j, "redraw_probability", m.redraw_probability, where);
  m.initial_step = get<double>(j, "initial_step", m.initial_step, where);
  if (m.burn_in_sweeps < 0 || m.sweeps_between_samples < 1) throw ConfigError(where + ": invalid sweep counts");
  return m;
}

json metropolis_json(const MetropolisOptions& m) {
  return json{{"burn_in_sweeps", m.burn_in_sweeps},
              {"sweeps_between_samples", m.sweeps_between_samples},
              {"redraw_probability", m.redraw_probability},
              {"initial_step", m.initial_step}};
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

long RunConfig::total_steps() const { return ratio(t_final, dt, "t_final must be a multiple of dt"); }
long RunConfig::steps_per_snapshot() const {
  return ratio(snapshot_interval, dt, "snapshot_interval must be a multiple of dt");
}
long RunConfig::steps_per_checkpoint() const {
  return ratio(checkpoint_interval, snapshot_interval, "checkpoint_interval must be a multiple of snapshot_interval") *
         steps_per_snapshot();
}
int RunConfig::noise_substeps() const {
  return static_cast<int>(ratio(dt, noise_dt, "dt must be a multiple of noise_dt"));
}

LangevinPlan RunConfig::langevin_plan() const {
  LangevinPlan plan;
  plan.sweep.dt = dt;
  plan.sweep.krylov = krylov;
  plan.scheme = scheme;
  plan.dense_brackets = dense_brackets;
  return plan;
}

double RunConfig::scan_value(std::size_t point) const {
  const BathParams& b = baths.at(point);
  if (scan_parameter == "gamma") return b.gamma;
  if (scan_parameter == "temperature") return b.temperature();
  return b.noise;
}

RunConfig parse_run_config(std::string_view json_text) {
  const json j = parse_text(json_text);
  check_keys(j,
             {"L", "D", "ising", "bath", "bath_grid", "scan_parameter", "dt", "noise_dt", "t_final",
              "snapshot_interval", "checkpoint_interval", "trajectories", "seed", "initial_state", "scheme",
              "dense_brackets", "krylov", "workers", "output", "save_final_states"},
             "config");
  RunConfig c;
  c.length = get<int>(j, "L", c.length, "config");
  if (c.length < 2) throw ConfigError("L must be at least 2");
  if (j.contains("D")) {
    const json& d = j.at("D");
    c.bond_dims.clear();
    if (d.is_number_integer()) {
      c.bond_dims.push_back(d.get<Eigen::Index>());
    } else if (d.is_array() && !d.empty()) {
      for (const auto& x : d) {
        if (!x.is_number_integer()) throw ConfigError("D entries must be integers");
        c.bond_dims.push_back(x.get<Eigen::Index>());
      }
    } else {
      throw ConfigError("D must be an integer or a non-empty list");
    }
  }
  for (std::size_t i = 0; i < c.bond_dims.size(); ++i) {
    if (c.bond_dims[i] < 1) throw ConfigError("D entries must be positive");
    if (i > 0 && c.bond_dims[i] <= c.bond_dims[i - 1]) throw ConfigError("D list must be strictly ascending");
  }
  if (j.contains("ising")) c.ising = parse_ising(j.at("ising"));
  if (j.contains("bath") && j.contains("bath_grid")) throw ConfigError("give either bath or bath_grid, not both");
  if (j.contains("bath")) c.baths = {parse_bath(j.at("bath"), "bath")};
  if (j.contains("bath_grid")) {
    const json& g = j.at("bath_grid");
    if (!g.is_array() || g.empty()) throw ConfigError("bath_grid must be a non-empty list");
    c.baths.clear();
    for (std::size_t i = 0; i < g.size(); ++i) c.baths.push_back(parse_bath(g[i], "bath_grid[" + std::to_string(i) + "]"));
  }
  c.scan_parameter = get<std::string>(j, "scan_parameter", c.baths.size() > 1 ? "noise" : "", "config");
  if (!c.scan_parameter.empty() && c.scan_parameter != "noise" && c.scan_parameter != "gamma" &&
      c.scan_parameter != "temperature") {
    throw ConfigError("scan_parameter must be noise, gamma or temperature");
  }
  c.dt = positive(get<double>(j, "dt", c.dt, "config"), "dt");
  c.noise_dt = positive(get<double>(j, "noise_dt", c.dt, "config"), "noise_dt");
  c.t_final = get<double>(j, "t_final", c.t_final, "config");
  if (!(c.t_final >= 0.0)) throw ConfigError("t_final must be non-negative");
  c.snapshot_interval = positive(get<double>(j, "snapshot_interval", 0.1, "config"), "snapshot_interval");
  c.checkpoint_interval =
      positive(get<double>(j, "checkpoint_interval", std::max(c.snapshot_interval, 1.0), "config"),
               "checkpoint_interval");
  c.trajectories = get<int>(j, "trajectories", c.trajectories, "config");
  if (c.trajectories < 1) throw ConfigError("trajectories must be at least 1");
  c.seed = get<std::uint64_t>(j, "seed", c.seed, "config");
  if (j.contains("initial_state")) {
    const json& s = j.at("initial_state");
    check_keys(s, {"kind", "D", "beta", "metropolis"}, "initial_state");
    const auto kind = get<std::string>(s, "kind", "product_z", "initial_state");
    if (kind == "product_z") {
      c.initial.kind = InitialKind::product_z;
    } else if (kind == "haar") {
      c.initial.kind = InitialKind::haar;
    } else if (kind == "thermal_haar") {
      c.initial.kind = InitialKind::thermal_haar;
    } else {
      throw ConfigError("initial_state.kind must be product_z, haar or thermal_haar");
    }
    c.initial.bond_dim = get<Eigen::Index>(s, "D", 0, "initial_state");
    c.initial.beta = get<double>(s, "beta", 0.0, "initial_state");
    if (c.initial.beta < 0.0) throw ConfigError("initial_state.beta must be non-negative");
    if (s.contains("metropolis")) c.initial.metropolis = parse_metropolis(s.at("metropolis"), "initial_state.metropolis");
  }
  if (c.initial.bond_dim == 0) c.initial.bond_dim = c.bond_dims.front();
  if (c.initial.bond_dim > c.bond_dims.front()) throw ConfigError("initial_state.D exceeds the smallest D of the run");
  c.scheme = parse_scheme(get<std::string>(j, "scheme", "stratonovich", "config"));
  c.dense_brackets = get<bool>(j, "dense_brackets", false, "config");
  if (c.dense_brackets && c.length > kMaxDenseBracketLength) {
    throw ConfigError("dense_brackets is limited to L <= " + std::to_string(kMaxDenseBracketLength));
  }
  if (j.contains("krylov")) {
    const json& k = j.at("krylov");
    check_keys(k, {"tolerance", "max_dim"}, "krylov");
    c.krylov.tolerance = positive(get<double>(k, "tolerance", c.krylov.tolerance, "krylov"), "krylov.tolerance");
    c.krylov.max_dim = get<int>(k, "max_dim", c.krylov.max_dim, "krylov");
    if (c.krylov.max_dim < 2) throw ConfigError("krylov.max_dim must be at least 2");
  }
  c.workers = get<int>(j, "workers", c.workers, "config");
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  c.output = get<std::string>(j, "output", c.output.string(), "config");
  c.save_final_states = get<bool>(j, "save_final_states", false, "config");
  // Touch the derived grids so inconsistencies surface at load time.
  (void)c.total_steps();
  (void)c.steps_per_snapshot();
  (void)c.steps_per_checkpoint();
  (void)c.noise_substeps();
  if (c.total_steps() % c.steps_per_snapshot() != 0) throw ConfigError("t_final must be a multiple of snapshot_interval");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  try {
    return parse_run_config(io::read_file(path));
  } catch (const IntegrityError& e) {
    throw ConfigError(e.what());
  }
}

std::string canonical_json(const RunConfig& c) {
  json baths = json::array();
  for (const auto& b : c.baths) baths.push_back(bath_json(b));
  json j{{"L", c.length},
         {"D", c.bond_dims},
         {"ising", {{"J", c.ising.J}, {"h", c.ising.h}, {"g", c.ising.g}}},
         {"bath_grid", baths},
         {"scan_parameter", c.scan_parameter},
         {"dt", c.dt},
         {"noise_dt", c.noise_dt},
         {"t_final", c.t_final},
         {"snapshot_interval", c.snapshot_interval},
         {"checkpoint_interval", c.checkpoint_interval},
         {"trajectories", c.trajectories},
         {"seed", c.seed},
         {"initial_state",
          {{"kind", c.initial.kind == InitialKind::product_z ? "product_z"
                    : c.initial.kind == InitialKind::haar    ? "haar"
                                                             : "thermal_haar"},
           {"D", c.initial.bond_dim},
           {"beta", c.initial.beta},
           {"metropolis", metropolis_json(c.initial.metropolis)}}},
         {"scheme", scheme_name(c.scheme)},
         {"dense_brackets", c.dense_brackets},
         {"krylov", {{"tolerance", c.krylov.tolerance}, {"max_dim", c.krylov.max_dim}}},
         {"save_final_states", c.save_final_states}};
  return j.dump(2);
}

std::uint64_t config_hash(const RunConfig& config) {
  Fnv1a h;
  h.update(canonical_json(config));
  return h.value();
}

HaarConfig parse_haar_config(std::string_view json_text) {
  const json j = parse_text(json_text);
  check_keys(j,
             {"L", "D", "ising", "beta", "temperature", "samples", "sampler", "metropolis", "bins", "seed",
              "fixed_point", "workers", "output"},
             "config");
  HaarConfig c;
  c.length = get<int>(j, "L", c.length, "config");
  if (c.length < 2) throw ConfigError("L must be at least 2");
  c.bond_dim = get<Eigen::Index>(j, "D", c.bond_dim, "config");
  if (c.bond_dim < 1) throw ConfigError("D must be positive");
  if (j.contains("ising")) c.ising = parse_ising(j.at("ising"));
  if (j.contains("beta") && j.contains("temperature")) throw ConfigError("give either beta or temperature");
  c.beta = get<double>(j, "beta", 0.0, "config");
  if (j.contains("temperature")) c.beta = 1.0 / positive(get<double>(j, "temperature", 1.0, "config"), "temperature");
  if (c.beta < 0.0) throw ConfigError("beta must be non-negative");
  c.samples = get<int>(j, "samples", c.samples, "config");
  if (c.samples < 1) throw ConfigError("samples must be at least 1");
  const auto sampler = get<std::string>(j, "sampler", "importance", "config");
  if (sampler == "importance") {
    c.sampler = SamplerKind::importance;
  } else if (sampler == "metropolis") {
    c.sampler = SamplerKind::metropolis;
  } else {
    throw ConfigError("sampler must be importance or metropolis");
  }
  if (j.contains("metropolis")) c.metropolis = parse_metropolis(j.at("metropolis"), "metropolis");
  c.bins = get<int>(j, "bins", c.bins, "config");
  if (c.bins < 2) throw ConfigError("bins must be at least 2");
  c.seed = get<std::uint64_t>(j, "seed", c.seed, "config");
  if (j.contains("fixed_point")) {
    const json& f = j.at("fixed_point");
    check_keys(f, {"bath", "times", "dt", "scheme"}, "fixed_point");
    FixedPointSpec spec;
    if (!f.contains("bath")) throw ConfigError("fixed_point.bath is required");
    spec.bath = parse_bath(f.at("bath"), "fixed_point.bath");
    spec.times = get<std::vector<double>>(f, "times", spec.times, "fixed_point");
    spec.dt = positive(get<double>(f, "dt", spec.dt, "fixed_point"), "fixed_point.dt");
    spec.scheme = parse_scheme(get<std::string>(f, "scheme", "stratonovich", "fixed_point"));
    for (double t : spec.times) ratio(t, spec.dt, "fixed_point.times must be multiples of fixed_point.dt");
    c.fixed_point = spec;
  }
  c.workers = get<int>(j, "workers", c.workers, "config");
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  c.output = get<std::string>(j, "output", c.output.string(), "config");
  return c;
}

HaarConfig load_haar_config(const std::filesystem::path& path) {
  try {
    return parse_haar_config(io::read_file(path));
  } catch (const IntegrityError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace tdvpl
