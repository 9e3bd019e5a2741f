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

#include <cmath>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "json.hpp"
#include "tdvpl/errors.hpp"
#include "tdvpl/io.hpp"
#include "tdvpl/runner.hpp"

using namespace tdvpl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "tdvpl_test_runner" / name;
  fs::remove_all(dir);
  return dir;
}

RunConfig small_config(const fs::path& out, const std::string& overrides = "{}") {
  auto j = nlohmann::json::parse(R"({"L": 4, "D": [2, 4], "bath": {"gamma": 0.2, "temperature": 0.3}, "dt": 0.02,
    "t_final": 0.6, "snapshot_interval": 0.1, "checkpoint_interval": 0.2, "trajectories": 3, "seed": 11})");
  j.merge_patch(nlohmann::json::parse(overrides));
  RunConfig c = parse_run_config(j.dump());
  c.output = out;
  return c;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
  }
  return files;
}

}  // namespace

TEST_SUITE("runner") {
  TEST_CASE("zero duration gives one snapshot of the initial state") {
    const auto c = small_config("unused", R"({"t_final": 0})");
    const auto r = run_trajectory(c, 0, 0, 4);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].time == 0.0);
    CHECK(r.rows[0].entropy == 0.0);
    CHECK(r.rows[0].energy == doctest::Approx(energy(product_state(4, Vector::Unit(2, 0)), build_tilted_ising(c.ising, 4))));
    CHECK((r.rows[0].sz.array() == 1.0).all());
  }

  TEST_CASE("trajectory seeds depend only on the base seed and id") {
    CHECK(trajectory_seed(1, 0) == trajectory_seed(1, 0));
    CHECK(trajectory_seed(1, 0) != trajectory_seed(1, 1));
    CHECK(trajectory_seed(1, 0) != trajectory_seed(2, 0));
  }

  TEST_CASE("noise checksum is identical across bond dimensions") {
    const auto c = small_config("unused");
    const auto scan = run_trajectory_scan(c, 0, 1);
    REQUIRE(scan.size() == 2);
    CHECK(scan[0].noise_checksum == scan[1].noise_checksum);
    CHECK(scan[0].noise_checksum != Fnv1a{}.value());
    const auto single = run_trajectory(c, 0, 1, 2);
    CHECK(single.noise_checksum == scan[0].noise_checksum);
    // Lockstep evolution does not change the lower-D trajectory.
    REQUIRE(single.rows.size() == scan[0].rows.size());
    for (std::size_t k = 0; k < single.rows.size(); ++k) CHECK(single.rows[k].entropy == scan[0].rows[k].entropy);
    // The reference overlaps itself.
    for (const auto& row : scan[1].rows) CHECK(row.overlap_ref == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isnan(single.rows[0].overlap_ref));
  }

  TEST_CASE("csv round trip") {
    const auto c = small_config("unused");
    const auto r = run_trajectory_scan(c, 0, 0)[0];
    const auto path = fresh_dir("csv") / "t.csv";
    io::write_file_atomic(path, trajectory_csv(r, c.length));
    const auto back = read_trajectory_csv(path);
    REQUIRE(back.rows.size() == r.rows.size());
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
      CHECK(back.rows[k].time == r.rows[k].time);
      CHECK(back.rows[k].energy == r.rows[k].energy);
      CHECK(back.rows[k].sz == r.rows[k].sz);
      CHECK(back.rows[k].bond_entropies == r.rows[k].bond_entropies);
    }
    CHECK(trajectory_csv_header(3) ==
          "time,bond,entropy,energy,overlap_ref,sz_site0,sz_site1,sz_site2,entropy_bond1,entropy_bond2\n");
  }

  TEST_CASE("reruns are byte identical") {
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    run_ensemble(small_config(a));
    run_ensemble(small_config(b));
    CHECK(tree(a) == tree(b));
    CHECK(tree(a).count("meta.json") == 1);
    CHECK(tree(a).count("p0/traj_2_D4.csv") == 1);
  }

  TEST_CASE("interrupted and resumed runs match uninterrupted ones") {
    const auto full = fresh_dir("resume_full"), cut = fresh_dir("resume_cut");
    run_ensemble(small_config(full));
    RunOptions stop;
    stop.stop_after_steps = 40;  // mid-way through the second trajectory
    const auto first = run_ensemble(small_config(cut), stop);
    CHECK_FALSE(first.complete);
    CHECK(fs::exists(cut / "checkpoints"));
    CHECK_THROWS_AS(run_ensemble(small_config(cut)), ConfigError);
    RunOptions resume;
    resume.resume = true;
    resume.stop_after_steps = 7;  // interrupt once more, off a checkpoint boundary
    CHECK_FALSE(run_ensemble(small_config(cut), resume).complete);
    resume.stop_after_steps.reset();
    CHECK(run_ensemble(small_config(cut), resume).complete);
    CHECK(tree(full) == tree(cut));
  }

  TEST_CASE("resume refuses an altered configuration") {
    const auto dir = fresh_dir("altered");
    RunOptions stop;
    stop.stop_after_steps = 10;
    run_ensemble(small_config(dir), stop);
    RunOptions resume;
    resume.resume = true;
    CHECK_THROWS_AS(run_ensemble(small_config(dir, R"({"seed": 12})"), resume), ConfigError);
  }

  TEST_CASE("corrupt checkpoint is reported with its file name") {
    const auto dir = fresh_dir("corrupt");
    RunOptions stop;
    stop.stop_after_steps = 15;
    run_ensemble(small_config(dir), stop);
    const auto ckpt = dir / "checkpoints" / "p0_t0.ckpt";
    REQUIRE(fs::exists(ckpt));
    const auto bytes = io::read_file(ckpt);
    io::write_file_atomic(ckpt, bytes.substr(0, bytes.size() - 100));
    RunOptions resume;
    resume.resume = true;
    try {
      run_ensemble(small_config(dir), resume);
      FAIL("no exception");
    } catch (const IntegrityError& e) {
      CHECK(std::string(e.what()).find("p0_t0.ckpt") != std::string::npos);
    }
  }

  TEST_CASE("single trajectory summary equals the record") {
    const auto dir = fresh_dir("single");
    auto c = small_config(dir, R"({"D": 4, "trajectories": 1})");
    run_ensemble(c);
    const auto r = read_trajectory_csv(trajectory_csv_path(dir, 0, 0, 4));
    const std::string summary = io::read_file(dir / "summary.csv");
    std::size_t line_start = summary.find('\n') + 1;
    for (const auto& row : r.rows) {
      const auto end = summary.find('\n', line_start);
      const auto f = io::split_csv_line(std::string_view(summary).substr(line_start, end - line_start));
      CHECK(io::parse_number(f[5], "s") == doctest::Approx(row.time));
      CHECK(f[6] == "1");
      CHECK(f[7] == "0");
      CHECK(io::parse_number(f[8], "s") == row.entropy);
      CHECK(io::parse_number(f[9], "s") == 0.0);
      CHECK(io::parse_number(f[10], "s") == row.energy);
      line_start = end + 1;
    }
  }

  TEST_CASE("closed deterministic trajectories are computed once") {
    const auto dir = fresh_dir("closed");
    auto c = small_config(dir, R"({"bath": {"gamma": 0, "temperature": null, "noise": 0}})");
    const auto outcome = run_ensemble(c);
    CHECK(outcome.deduplicated);
    CHECK(outcome.tasks == 1);
    CHECK(io::read_file(trajectory_csv_path(dir, 0, 0, 4)) == io::read_file(trajectory_csv_path(dir, 0, 2, 4)));
  }

  TEST_CASE("ensemble error shrinks as the inverse square root of the size") {
    auto c = small_config("unused", R"({"D": 4, "bath": {"gamma": 0, "temperature": null, "noise": 0}, "t_final": 0.4,
      "initial_state": {"kind": "haar", "D": 2}, "trajectories": 100})");
    std::vector<double> s;
    for (int id = 0; id < 100; ++id) s.push_back(run_trajectory(c, 0, id, 4).rows.back().entropy);
    // Mean standard error over disjoint groups of each size.
    std::vector<double> lx, ly;
    for (int n : {5, 10, 20, 25, 50, 100}) {
      double se_sum = 0.0;
      const int groups = 100 / n;
      for (int g = 0; g < groups; ++g) {
        double m = 0.0, ss = 0.0;
        for (int i = 0; i < n; ++i) m += s[g * n + i];
        m /= n;
        for (int i = 0; i < n; ++i) ss += (s[g * n + i] - m) * (s[g * n + i] - m);
        se_sum += std::sqrt(ss / (n - 1) / n);
      }
      lx.push_back(std::log(n));
      ly.push_back(std::log(se_sum / groups));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    const double exponent = sxy / sxx;
    MESSAGE("fitted exponent " << exponent);
    CHECK(std::abs(exponent + 0.5) < 0.1);
  }
}
