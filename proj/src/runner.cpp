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

#include "tdvpl/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tdvpl/errors.hpp"
#include "tdvpl/haar_thermal.hpp"
#include "tdvpl/hamiltonian.hpp"
#include "tdvpl/io.hpp"
#include "tdvpl/langevin.hpp"
#include "tdvpl/parallel.hpp"

#ifndef TDVPL_VERSION
#define TDVPL_VERSION "unknown"
#endif

namespace tdvpl {

using json = nlohmann::json;

namespace {

constexpr char kCheckpointMagic[8] = {'T', 'D', 'V', 'P', 'L', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint64_t kInitialStateStream = 0x696e697469616cULL;  // "initial"

std::pair<double, double> mean_and_error(const std::vector<double>& v) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (v.empty()) return {nan, nan};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(v.size());
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Eigen::Index initial_bond_dim(const RunConfig& config) {
  return config.initial.bond_dim > 0 ? config.initial.bond_dim : config.bond_dims.front();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

SnapshotRow measure(const MpsState& state, const Mpo& hamiltonian, double time, const MpsState* reference) {
  const int length = state.length();
  SnapshotRow row;
  row.time = time;
  const auto spectra = all_schmidt_spectra(state);
  row.bond_entropies.resize(length - 1);
  for (int b = 0; b + 1 < length; ++b) row.bond_entropies(b) = von_neumann_entropy(spectra[b]);
  row.entropy = row.bond_entropies(center_bond(length) - 1);
  row.energy = energy(state, hamiltonian);
  row.sz.resize(length);
  for (int n = 0; n < length; ++n) row.sz(n) = expect_local(state, pauli::z(), n);
  row.overlap_ref = reference ? std::abs(overlap(*reference, state)) : std::numeric_limits<double>::quiet_NaN();
  return row;
}

struct Lane {
  MpsState state;
  TrajectoryRecord record;
  Fnv1a checksum;
  bool alive = true;
};

void write_row(io::BinaryWriter& out, const SnapshotRow& r) {
  out.value(r.time);
  out.value(r.entropy);
  out.value(r.energy);
  out.value(r.overlap_ref);
  out.bytes(r.sz.data(), sizeof(double) * static_cast<std::size_t>(r.sz.size()));
  out.bytes(r.bond_entropies.data(), sizeof(double) * static_cast<std::size_t>(r.bond_entropies.size()));
}

SnapshotRow read_row(io::BinaryReader& in, int length) {
  SnapshotRow r;
  r.time = in.value<double>();
  r.entropy = in.value<double>();
  r.energy = in.value<double>();
  r.overlap_ref = in.value<double>();
  r.sz.resize(length);
  in.bytes(r.sz.data(), sizeof(double) * length);
  r.bond_entropies.resize(length - 1);
  in.bytes(r.bond_entropies.data(), sizeof(double) * (length - 1));
  return r;
}

void save_checkpoint(const std::filesystem::path& path, const RunConfig& config, std::size_t point, int id, long step,
                     const std::vector<Lane>& lanes) {
  io::BinaryWriter out;
  out.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
  out.value<std::uint32_t>(kCheckpointVersion);
  out.string(TDVPL_VERSION);
  out.value<std::uint64_t>(config_hash(config));
  out.value<std::uint64_t>(point);
  out.value<std::int64_t>(id);
  out.value<std::int64_t>(step);
  out.value<std::uint32_t>(static_cast<std::uint32_t>(lanes.size()));
  for (const auto& lane : lanes) {
    out.value<std::uint8_t>(lane.alive ? 1 : 0);
    out.string(lane.record.failure.value_or(""));
    out.value<std::uint64_t>(lane.checksum.value());
    out.value(lane.record.max_friction_condition);
    out.value(lane.record.friction_condition_bound);
    out.value<std::uint64_t>(lane.record.rows.size());
    for (const auto& r : lane.record.rows) write_row(out, r);
    io::write_snapshot(out, lane.state);
  }
  out.seal();
  io::write_file_atomic(path, out.buffer());
}

long load_checkpoint(const std::filesystem::path& path, const RunConfig& config, std::size_t point, int id,
                     std::vector<Lane>& lanes) {
  io::BinaryReader in(io::read_file(path), path.string());
  char magic[sizeof(kCheckpointMagic)];
  in.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) in.fail("not a checkpoint");
  if (in.value<std::uint32_t>() != kCheckpointVersion) throw ConfigError(path.string() + ": checkpoint format version mismatch");
  const std::string version = in.string();
  if (version != TDVPL_VERSION) {
    throw ConfigError(path.string() + ": written by code version " + version + ", this is " + TDVPL_VERSION);
  }
  if (in.value<std::uint64_t>() != config_hash(config)) {
    throw ConfigError(path.string() + ": checkpoint belongs to a different configuration");
  }
  if (in.value<std::uint64_t>() != point || in.value<std::int64_t>() != id) in.fail("checkpoint for another task");
  const long step = static_cast<long>(in.value<std::int64_t>());
  if (in.value<std::uint32_t>() != lanes.size()) in.fail("lane count mismatch");
  for (auto& lane : lanes) {
    lane.alive = in.value<std::uint8_t>() != 0;
    const std::string failure = in.string();
    if (!failure.empty()) lane.record.failure = failure;
    lane.checksum = Fnv1a(in.value<std::uint64_t>());
    lane.record.max_friction_condition = in.value<double>();
    lane.record.friction_condition_bound = in.value<double>();
    const auto rows = in.value<std::uint64_t>();
    lane.record.rows.clear();
    for (std::uint64_t k = 0; k < rows; ++k) lane.record.rows.push_back(read_row(in, config.length));
    lane.state = io::read_snapshot(in);
  }
  in.verify_seal();
  if (!in.at_end()) in.fail("trailing bytes");
  return step;
}

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t base_seed, int id) {
  return mix_seed(base_seed, static_cast<std::uint64_t>(id));
}

MpsState initial_state(const RunConfig& config, std::uint64_t seed, Eigen::Index bond_dim) {
  const InitialStateSpec& spec = config.initial;
  MpsState start;
  switch (spec.kind) {
    case InitialKind::product_z: {
      Vector up = Vector::Zero(kPhysDim);
      up(0) = 1.0;
      start = product_state(config.length, up);
      break;
    }
    case InitialKind::haar: {
      Rng rng(mix_seed(seed, kInitialStateStream));
      start = haar_random_mps(config.length, initial_bond_dim(config), rng);
      break;
    }
    case InitialKind::thermal_haar: {
      Rng rng(mix_seed(seed, kInitialStateStream));
      const auto h = build_tilted_ising(config.ising, config.length);
      start = sample_metropolis_ensemble(h, config.length, initial_bond_dim(config), spec.beta, 1, rng, spec.metropolis)
                  .samples[0];
      break;
    }
  }
  return embed_in_bond_dims(start, bond_dim);
}

std::vector<TrajectoryRecord> run_trajectory_scan(const RunConfig& config, std::size_t point, int id,
                                                  TaskControl* control) {
  const int length = config.length;
  const BathParams& bath = config.baths.at(point);
  const auto h = build_tilted_ising(config.ising, length);
  const auto plan = config.langevin_plan();
  const std::uint64_t seed = trajectory_seed(config.seed, id);
  const NoiseStream noise(seed, length, bath, config.noise_dt);
  const int substeps = config.noise_substeps();
  const long total = config.total_steps();
  const long per_snapshot = config.steps_per_snapshot();
  const long per_checkpoint = config.steps_per_checkpoint();
  const bool scan = config.bond_dims.size() > 1;
  const std::size_t ref = config.bond_dims.size() - 1;

  std::vector<Lane> lanes;
  for (auto d : config.bond_dims) {
    Lane lane;
    lane.record.point = point;
    lane.record.id = id;
    lane.record.seed = seed;
    lane.record.bond_dim = d;
    lanes.push_back(std::move(lane));
  }

  long step = 0;
  const bool resumed = control && !control->checkpoint.empty() && std::filesystem::exists(control->checkpoint);
  if (resumed) {
    step = load_checkpoint(control->checkpoint, config, point, id, lanes);
  } else {
    for (auto& lane : lanes) lane.state = initial_state(config, seed, lane.record.bond_dim);
    for (auto& lane : lanes) {
      lane.record.rows.push_back(measure(lane.state, h, 0.0, scan ? &lanes[ref].state : nullptr));
    }
  }

  auto snapshot = [&] {
    const double time = static_cast<double>(step) * config.dt;
    const MpsState* reference = scan && lanes[ref].alive ? &lanes[ref].state : nullptr;
    for (auto& lane : lanes) {
      if (!lane.alive) continue;
      lane.record.rows.push_back(measure(lane.state, h, time, scan ? reference : nullptr));
      if (scan && !reference) lane.record.rows.back().overlap_ref = std::numeric_limits<double>::quiet_NaN();
    }
  };

  while (step < total) {
    if (control && control->step_budget && control->step_budget->fetch_sub(1) <= 0) {
      control->interrupted = true;
      if (!control->checkpoint.empty()) save_checkpoint(control->checkpoint, config, point, id, step, lanes);
      break;
    }
    const SiteChannelMatrix increment = noise.increment(static_cast<std::int64_t>(step) * substeps, substeps);
    for (auto& lane : lanes) {
      if (!lane.alive) continue;
      lane.checksum.update(increment.data(), sizeof(double) * static_cast<std::size_t>(increment.size()));
      try {
        LangevinStepInfo info;
        lane.state = langevin_step(lane.state, h, bath, increment, plan, &info);
        lane.record.max_friction_condition = std::max(lane.record.max_friction_condition, info.velocities.max_condition);
        lane.record.friction_condition_bound =
            std::max(lane.record.friction_condition_bound, info.velocities.max_condition_bound);
      } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg << "t=" << static_cast<double>(step + 1) * config.dt << ": " << e.what();
        lane.record.failure = msg.str();
        lane.alive = false;
      }
    }
    ++step;
    if (step % per_snapshot == 0) snapshot();
    if (control && !control->checkpoint.empty() && step % per_checkpoint == 0 && step < total) {
      save_checkpoint(control->checkpoint, config, point, id, step, lanes);
    }
  }

  std::vector<TrajectoryRecord> out;
  for (auto& lane : lanes) {
    lane.record.noise_checksum = lane.checksum.value();
    out.push_back(std::move(lane.record));
  }
  if (config.save_final_states && !(control && control->interrupted)) {
    for (std::size_t k = 0; k < lanes.size(); ++k) {
      const auto path = config.output / "states" / ("p" + std::to_string(point)) /
                        ("traj_" + std::to_string(id) + "_D" + std::to_string(lanes[k].record.bond_dim) + ".mps");
      io::save_snapshot(path, lanes[k].state);
    }
  }
  return out;
}

TrajectoryRecord run_trajectory(const RunConfig& config, std::size_t point, int id, Eigen::Index bond_dim) {
  RunConfig single = config;
  single.bond_dims = {bond_dim};
  single.initial.bond_dim = initial_bond_dim(config);
  single.save_final_states = false;
  return run_trajectory_scan(single, point, id).front();
}

std::string trajectory_csv_header(int length) {
  std::string h = "time,bond,entropy,energy,overlap_ref";
  for (int n = 0; n < length; ++n) h += ",sz_site" + std::to_string(n);
  for (int b = 1; b < length; ++b) h += ",entropy_bond" + std::to_string(b);
  return h + "\n";
}

std::string trajectory_csv(const TrajectoryRecord& record, int length) {
  std::string out = trajectory_csv_header(length);
  const std::string bond = std::to_string(center_bond(length));
  for (const auto& r : record.rows) {
    out += io::format_number(r.time) + "," + bond + "," + io::format_number(r.entropy) + "," + io::format_number(r.energy) + "," +
           io::format_number(r.overlap_ref);
    for (Eigen::Index n = 0; n < r.sz.size(); ++n) out += "," + io::format_number(r.sz(n));
    for (Eigen::Index b = 0; b < r.bond_entropies.size(); ++b) out += "," + io::format_number(r.bond_entropies(b));
    out += "\n";
  }
  return out;
}

TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  const std::string source = path.string();
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line)) throw IntegrityError(source + ": empty file");
  const auto header = io::split_csv_line(line);
  const std::size_t columns = header.size();
  if (columns < 6 || (columns - 4) % 2 != 0 || header[0] != "time") {
    throw IntegrityError(source + ": unexpected header");
  }
  const int length = static_cast<int>((columns - 4) / 2);
  if (line + "\n" != trajectory_csv_header(length)) throw IntegrityError(source + ": unexpected header");
  TrajectoryRecord record;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != columns) throw IntegrityError(source + ": row " + std::to_string(record.rows.size() + 1) + " has " +
                                                  std::to_string(f.size()) + " fields");
    SnapshotRow r;
    r.time = io::parse_number(f[0], source);
    r.entropy = io::parse_number(f[2], source);
    r.energy = io::parse_number(f[3], source);
    r.overlap_ref = io::parse_number(f[4], source);
    r.sz.resize(length);
    for (int n = 0; n < length; ++n) r.sz(n) = io::parse_number(f[5 + n], source);
    r.bond_entropies.resize(length - 1);
    for (int b = 0; b + 1 < length; ++b) r.bond_entropies(b) = io::parse_number(f[5 + length + b], source);
    record.rows.push_back(std::move(r));
  }
  return record;
}

std::filesystem::path trajectory_csv_path(const std::filesystem::path& run, std::size_t point, int id,
                                          Eigen::Index bond_dim) {
  return run / ("p" + std::to_string(point)) / ("traj_" + std::to_string(id) + "_D" + std::to_string(bond_dim) + ".csv");
}

namespace {

std::filesystem::path done_path(const std::filesystem::path& run, std::size_t point, int id) {
  return run / ("p" + std::to_string(point)) / ("traj_" + std::to_string(id) + ".done.json");
}

json record_meta(const TrajectoryRecord& r) {
  json j{{"point", r.point},
         {"id", r.id},
         {"seed", r.seed},
         {"D", r.bond_dim},
         {"noise_checksum", hex(r.noise_checksum)},
         {"rows", r.rows.size()},
         {"max_friction_condition", r.max_friction_condition},
         {"friction_condition_bound", r.friction_condition_bound}};
  j["failure"] = r.failure ? json(*r.failure) : json(nullptr);
  return j;
}

void write_task(const RunConfig& config, const std::vector<TrajectoryRecord>& records) {
  json done = json::array();
  for (const auto& r : records) {
    io::write_file_atomic(trajectory_csv_path(config.output, r.point, r.id, r.bond_dim), trajectory_csv(r, config.length));
    done.push_back(record_meta(r));
  }
  io::write_file_atomic(done_path(config.output, records.front().point, records.front().id), done.dump(1) + "\n");
}

std::vector<TrajectoryRecord> failed_task(const RunConfig& config, std::size_t point, int id, const std::string& why) {
  std::vector<TrajectoryRecord> out;
  for (auto d : config.bond_dims) {
    TrajectoryRecord r;
    r.point = point;
    r.id = id;
    r.seed = trajectory_seed(config.seed, id);
    r.bond_dim = d;
    r.failure = why;
    out.push_back(std::move(r));
  }
  return out;
}

std::string summary_csv(const RunConfig& config) {
  std::string out = "point,scan_value,gamma,noise,D,time,n,n_failed,entropy_mean,entropy_se,energy_mean,energy_se\n";
  for (std::size_t p = 0; p < config.baths.size(); ++p) {
    for (auto d : config.bond_dims) {
      std::vector<std::vector<SnapshotRow>> all;
      for (int id = 0; id < config.trajectories; ++id) {
        all.push_back(read_trajectory_csv(trajectory_csv_path(config.output, p, id, d)).rows);
      }
      const long snapshots = config.total_steps() / config.steps_per_snapshot() + 1;
      for (long k = 0; k < snapshots; ++k) {
        std::vector<double> s;
        std::vector<double> e;
        for (const auto& rows : all) {
          if (static_cast<long>(rows.size()) > k) {
            s.push_back(rows[k].entropy);
            e.push_back(rows[k].energy);
          }
        }
        const auto ms = mean_and_error(s);
        const auto me = mean_and_error(e);
        out += std::to_string(p) + "," + io::format_number(config.scan_value(p)) + "," +
               io::format_number(config.baths[p].gamma) + "," + io::format_number(config.baths[p].noise) + "," +
               std::to_string(d) + "," + io::format_number(static_cast<double>(k) * config.snapshot_interval) + "," +
               std::to_string(s.size()) + "," + std::to_string(config.trajectories - static_cast<int>(s.size())) +
               "," + io::format_number(ms.first) + "," + io::format_number(ms.second) + "," + io::format_number(me.first) + "," +
               io::format_number(me.second) + "\n";
      }
    }
  }
  return out;
}

}  // namespace

RunOutcome run_ensemble(const RunConfig& config, const RunOptions& options) {
  const auto& run = config.output;
  const auto config_file = run / "config.json";
  const std::string canonical = canonical_json(config) + "\n";
  if (std::filesystem::exists(config_file)) {
    if (!options.resume) throw ConfigError(run.string() + " already holds a run; pass --resume to continue it");
    if (io::read_file(config_file) != canonical) {
      throw ConfigError(run.string() + ": configuration differs from the one the run was started with");
    }
  } else {
    std::filesystem::create_directories(run);
    io::write_file_atomic(config_file, canonical);
  }

  const bool dedupe = config.initial.deterministic();
  RunOutcome outcome;
  std::vector<std::pair<std::size_t, int>> tasks;
  for (std::size_t p = 0; p < config.baths.size(); ++p) {
    const int distinct = dedupe && config.baths[p].closed() ? 1 : config.trajectories;
    if (distinct < config.trajectories) outcome.deduplicated = true;
    for (int id = 0; id < distinct; ++id) tasks.emplace_back(p, id);
  }
  outcome.tasks = static_cast<int>(tasks.size());

  std::atomic<long> budget{options.stop_after_steps.value_or(std::numeric_limits<long>::max())};
  std::atomic<bool> interrupted{false};
  const int workers = options.workers.value_or(config.workers);
  parallel_for(tasks.size(), workers, [&](std::size_t t) {
    const auto [p, id] = tasks[t];
    if (std::filesystem::exists(done_path(run, p, id))) return;
    TaskControl control;
    control.checkpoint = run / "checkpoints" / ("p" + std::to_string(p) + "_t" + std::to_string(id) + ".ckpt");
    control.step_budget = &budget;
    std::vector<TrajectoryRecord> records;
    try {
      records = run_trajectory_scan(config, p, id, &control);
    } catch (const ConfigError&) {
      throw;
    } catch (const IntegrityError&) {
      throw;
    } catch (const std::exception& first) {
      // One retry, from the last checkpoint if there is one.
      try {
        control.interrupted = false;
        records = run_trajectory_scan(config, p, id, &control);
      } catch (const std::exception& second) {
        records = failed_task(config, p, id, std::string("worker: ") + second.what());
      }
    }
    if (control.interrupted) {
      interrupted = true;
      return;
    }
    write_task(config, records);
    std::filesystem::remove(control.checkpoint);
  });
  if (interrupted) return outcome;

  // Closed runs from a deterministic state: every id equals id 0.
  for (std::size_t p = 0; p < config.baths.size(); ++p) {
    if (!(dedupe && config.baths[p].closed())) continue;
    json source = json::parse(io::read_file(done_path(run, p, 0)));
    for (int id = 1; id < config.trajectories; ++id) {
      if (std::filesystem::exists(done_path(run, p, id))) continue;
      json copy = source;
      for (auto& r : copy) {
        r["id"] = id;
        r["seed"] = trajectory_seed(config.seed, id);
        const auto d = r["D"].get<Eigen::Index>();
        io::write_file_atomic(trajectory_csv_path(run, p, id, d), io::read_file(trajectory_csv_path(run, p, 0, d)));
      }
      io::write_file_atomic(done_path(run, p, id), copy.dump(1) + "\n");
    }
  }

  json records = json::array();
  for (std::size_t p = 0; p < config.baths.size(); ++p) {
    for (int id = 0; id < config.trajectories; ++id) {
      for (const auto& r : json::parse(io::read_file(done_path(run, p, id)))) {
        if (!r["failure"].is_null()) ++outcome.failed_records;
        records.push_back(r);
      }
    }
  }
  json meta{{"code_version", TDVPL_VERSION},
            {"config_hash", hex(config_hash(config))},
            {"config", json::parse(canonical)},
            {"trajectory_seed", "splitmix64(base_seed ^ splitmix64(id + 0x632be59bd9b4e019))"},
            {"deduplicated_closed_trajectories", outcome.deduplicated},
            {"failed_records", outcome.failed_records},
            {"records", records}};
  io::write_file_atomic(run / "meta.json", meta.dump(1) + "\n");
  io::write_file_atomic(run / "summary.csv", summary_csv(config));
  std::error_code ec;
  std::filesystem::remove(run / "checkpoints", ec);
  outcome.complete = true;
  return outcome;
}

}  // namespace tdvpl
