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

#ifndef TDVPL_CONFIG_HPP
#define TDVPL_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdvpl/haar_thermal.hpp"
#include "tdvpl/hamiltonian.hpp"
#include "tdvpl/langevin.hpp"

namespace tdvpl {

enum class InitialKind { product_z, haar, thermal_haar };

struct InitialStateSpec {
  InitialKind kind = InitialKind::product_z;
  /// Bond dimension the random state is drawn at; 0 means the smallest D of
  /// the run. The draw is embedded into every D of a scan.
  Eigen::Index bond_dim = 0;
  double beta = 0.0;  // thermal_haar only
  MetropolisOptions metropolis{};
  bool deterministic() const { return kind == InitialKind::product_z; }
};

/// One simulation campaign: a grid of bath points, each run for every
/// trajectory id at every bond dimension.
struct RunConfig {
  int length = 15;
  std::vector<Eigen::Index> bond_dims{32};  // ascending; the last is the reference
  IsingParams ising{};
  std::vector<BathParams> baths{BathParams{}};
  std::string scan_parameter;  // noise | gamma | temperature, empty for one point
  double dt = 0.005;
  double noise_dt = 0.005;
  double t_final = 8.0;
  double snapshot_interval = 0.1;
  double checkpoint_interval = 1.0;
  int trajectories = 100;
  std::uint64_t seed = 1;
  InitialStateSpec initial{};
  NoiseScheme scheme = NoiseScheme::stratonovich;
  bool dense_brackets = false;
  KrylovOptions krylov{};
  int workers = 1;
  std::filesystem::path output = "run";
  bool save_final_states = false;

  long total_steps() const;
  long steps_per_snapshot() const;
  long steps_per_checkpoint() const;
  int noise_substeps() const;
  Eigen::Index reference_bond_dim() const { return bond_dims.back(); }
  LangevinPlan langevin_plan() const;
  /// Value of the scanned parameter at a grid point.
  double scan_value(std::size_t point) const;
};

/// Strict JSON parsing: unknown keys, wrong types and inconsistent
/// time grids raise ConfigError.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Normalized echo with every field spelled out; stable across runs.
std::string canonical_json(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

struct FixedPointSpec {
  BathParams bath{};
  std::vector<double> times{1.0, 2.0, 3.0};
  double dt = 0.02;
  NoiseScheme scheme = NoiseScheme::stratonovich;
};

enum class SamplerKind { importance, metropolis };

struct HaarConfig {
  int length = 15;
  Eigen::Index bond_dim = 2;
  IsingParams ising{};
  double beta = 0.0;
  int samples = 500;
  SamplerKind sampler = SamplerKind::importance;
  MetropolisOptions metropolis{};
  int bins = 40;
  std::uint64_t seed = 1;
  std::optional<FixedPointSpec> fixed_point;
  int workers = 1;
  std::filesystem::path output = "haar";
};

HaarConfig parse_haar_config(std::string_view json_text);
HaarConfig load_haar_config(const std::filesystem::path& path);

}  // namespace tdvpl

#endif  // TDVPL_CONFIG_HPP
