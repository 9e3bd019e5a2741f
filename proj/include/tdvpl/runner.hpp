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

#ifndef TDVPL_RUNNER_HPP
#define TDVPL_RUNNER_HPP

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tdvpl/config.hpp"
#include "tdvpl/hashing.hpp"
#include "tdvpl/mps.hpp"

namespace tdvpl {

/// One CSV row.
struct SnapshotRow {
  double time = 0.0;
  double entropy = 0.0;  // center bond
  double energy = 0.0;
  double overlap_ref = 0.0;  // |<psi_ref|psi_D>|, NaN outside a scan
  RealVector sz;
  RealVector bond_entropies;  // bonds 1..L-1
};

struct TrajectoryRecord {
  std::size_t point = 0;
  int id = 0;
  std::uint64_t seed = 0;
  Eigen::Index bond_dim = 0;
  std::vector<SnapshotRow> rows;
  std::uint64_t noise_checksum = Fnv1a{}.value();
  std::optional<std::string> failure;
  double max_friction_condition = 1.0;
  double friction_condition_bound = 1.0;
};

/// Stable trajectory seed: a hash of (base seed, id). Independent of D and
/// of the grid point, so every point of a scan sees the same normal draws
/// scaled by its own noise strength.
std::uint64_t trajectory_seed(std::uint64_t base_seed, int id);

MpsState initial_state(const RunConfig& config, std::uint64_t seed, Eigen::Index bond_dim);

/// Interruption and checkpoint hooks for one task.
struct TaskControl {
  std::filesystem::path checkpoint;  // empty: no checkpointing
  std::atomic<long>* step_budget = nullptr;  // stop when it reaches zero
  bool interrupted = false;
};

/// Evolves trajectory `id` at grid point `point` for every D of the run
/// in lockstep with one shared noise stream; the largest D is the reference
/// for overlap_ref. Integration failures truncate the affected record.
std::vector<TrajectoryRecord> run_trajectory_scan(const RunConfig& config, std::size_t point, int id,
                                                  TaskControl* control = nullptr);

/// Single-D convenience form; overlap_ref is NaN.
TrajectoryRecord run_trajectory(const RunConfig& config, std::size_t point, int id, Eigen::Index bond_dim);

std::string trajectory_csv_header(int length);
std::string trajectory_csv(const TrajectoryRecord& record, int length);
/// Parses a trajectory CSV back into rows; only `rows` is filled.
TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path);

struct RunOptions {
  bool resume = false;
  /// Simulated interruption: stop after this many steps in total.
  std::optional<long> stop_after_steps;
  std::optional<int> workers;
};

struct RunOutcome {
  bool complete = false;
  int tasks = 0;
  int failed_records = 0;
  bool deduplicated = false;
};

/// Executes every (grid point, trajectory) task and writes the run
/// directory: config.json, meta.json, summary.csv, p<i>/traj_<id>_D<D>.csv.
RunOutcome run_ensemble(const RunConfig& config, const RunOptions& options = {});

std::filesystem::path trajectory_csv_path(const std::filesystem::path& run, std::size_t point, int id,
                                          Eigen::Index bond_dim);

}  // namespace tdvpl

#endif  // TDVPL_RUNNER_HPP
