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

#include "doctest.h"
#include "json.hpp"
#include "tdvpl/analysis.hpp"
#include "tdvpl/errors.hpp"
#include "tdvpl/io.hpp"

using namespace tdvpl;
namespace fs = std::filesystem;

namespace {

std::vector<double> grid(double t_final, double step) {
  std::vector<double> t;
  for (int k = 0; k * step <= t_final + 1e-12; ++k) t.push_back(k * step);
  return t;
}

TrajectoryRecord synthetic(const std::vector<double>& t, const std::function<double(double)>& s,
                           const std::function<double(double)>& overlap, std::uint64_t checksum = 42) {
  TrajectoryRecord r;
  r.noise_checksum = checksum;
  for (double x : t) {
    SnapshotRow row;
    row.time = x;
    row.entropy = s(x);
    row.overlap_ref = overlap(x);
    r.rows.push_back(row);
  }
  return r;
}

std::string header(const fs::path& p) {
  const auto text = io::read_file(p);
  return text.substr(0, text.find('\n'));
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("growth rate of a line") {
    const auto t = grid(8.0, 0.1);
    std::vector<double> s;
    for (double x : t) s.push_back(0.3 * x);
    const auto fit = growth_rate(t, s);
    CHECK(fit.slope == doctest::Approx(0.3));
    CHECK(fit.residual < 1e-12);
    CHECK(fit.window_start == 4.0);
    CHECK(fit.window_end == doctest::Approx(8.0));
    const std::vector<double> flat(t.size(), 1.7);
    CHECK(std::abs(growth_rate(t, flat).slope) < 1e-12);
    CHECK_THROWS_AS(growth_rate(t, s, 4.0, 5.0), ContractViolation);
    CHECK(growth_rate(t, s, 4.0, 2.0).window_end == doctest::Approx(6.0));
  }

  TEST_CASE("saturation of constant and relaxing series") {
    const auto t = grid(50.0, 0.1);
    std::vector<double> c(t.size(), 0.8), relax;
    const auto sc = saturation(t, c);
    CHECK(sc.mean == doctest::Approx(0.8));
    CHECK(sc.standard_error == doctest::Approx(0.0));
    CHECK(sc.window_start == doctest::Approx(40.0));
    CHECK(sc.window_end == doctest::Approx(50.0));
    for (double x : t) relax.push_back(1.3 * (1.0 - std::exp(-x / 2.0)));
    CHECK(std::abs(saturation(t, relax).mean / 1.3 - 1.0) < 0.01);
  }

  TEST_CASE("critical coupling") {
    const std::vector<double> g{0.02, 0.05, 0.1, 0.15, 0.2};
    const std::vector<double> ref{1.0, 0.8, 0.6, 0.5, 0.4};
    auto same = critical_coupling(g, {4, 8}, {ref, ref}, "noise");
    REQUIRE(same.size() == 1);
    CHECK(same[0].value == 0.02);
    auto never = critical_coupling(g, {4, 8}, {{2, 2, 2, 2, 2}, ref}, "noise");
    CHECK_FALSE(never[0].value.has_value());
    // Coincides from 0.1 upwards, with a stray agreement at 0.02.
    const std::vector<double> low{1.0, 0.5, 0.59, 0.5, 0.41};
    auto mid = critical_coupling(g, {4, 8}, {low, ref}, "noise");
    CHECK(mid[0].value == 0.1);
    // Larger tolerance never gives a larger value.
    double last = 1.0;
    for (double rho : {0.0, 0.01, 0.05, 0.2, 0.5, 1.0}) {
      const auto v = critical_coupling(g, {4, 8}, {low, ref}, "noise", rho)[0].value.value_or(1.0);
      CHECK(v <= last);
      last = v;
    }
    CHECK_THROWS_AS(critical_coupling(g, {4, 8}, {{1, 2}, ref}, "noise"), ContractViolation);
    CHECK_THROWS_AS(critical_coupling({0.1, 0.05}, {4, 8}, {{1, 2}, {1, 2}}, "noise"), ContractViolation);
  }

  TEST_CASE("t star of a record against itself is unbounded") {
    const auto t = grid(10.0, 0.1);
    const auto r = synthetic(t, [](double x) { return 0.2 * x; }, [](double) { return 1.0; });
    const auto p = t_star(r, r);
    CHECK_FALSE(p.entropy.bounded());
    CHECK_FALSE(p.fidelity.bounded());
  }

  TEST_CASE("t star of a synthetic step") {
    const auto t = grid(10.0, 0.1);
    auto base = [](double x) { return 0.5 + 0.1 * x; };
    const auto ref = synthetic(t, base, [](double) { return 1.0; });
    const auto rec = synthetic(
        t, [&](double x) { return base(x) * (1.0 + 0.1 * (x >= 3.0 - 1e-9 ? 1.0 : 0.0)); },
        [](double x) { return x < 6.0 - 1e-9 ? 1.0 : 0.9; });
    const auto p = t_star(rec, ref);
    CHECK(p.entropy.value == doctest::Approx(3.0));
    CHECK(p.fidelity.value == doctest::Approx(6.0));
    // Larger epsilon never trips earlier.
    double last = 0.0;
    for (double eps : {0.01, 0.05, 0.09, 0.11, 0.5}) {
      const double v = t_star(rec, ref, eps).entropy.value;
      CHECK(v >= last);
      last = v;
    }
    CHECK_FALSE(t_star(rec, ref, 0.11).entropy.bounded());
  }

  TEST_CASE("t star ignores a vanishing reference entropy") {
    const auto t = grid(2.0, 0.1);
    const auto ref = synthetic(t, [](double x) { return 1e-5 * x; }, [](double) { return 1.0; });
    const auto rec = synthetic(t, [](double x) { return 3e-5 * x; }, [](double) { return 1.0; });
    CHECK_FALSE(t_star(rec, ref).entropy.bounded());
  }

  TEST_CASE("t star requires shared noise") {
    const auto t = grid(1.0, 0.1);
    const auto a = synthetic(t, [](double) { return 1.0; }, [](double) { return 1.0; }, 1);
    const auto b = synthetic(t, [](double) { return 1.0; }, [](double) { return 1.0; }, 2);
    CHECK_THROWS_AS(t_star(a, b), IntegrityError);
  }

  TEST_CASE("median, mean and bootstrap") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(std::isinf(median({1.0, kUnbounded, kUnbounded})));
    CHECK(std::isinf(median({1.0, 2.0, kUnbounded, kUnbounded})));
    CHECK(median({1.0, 2.0, 3.0, kUnbounded}) == 2.5);
    CHECK(mean({1.0, 2.0, 3.0}) == 2.0);
    std::vector<double> v;
    Rng rng(1);
    std::normal_distribution<double> normal(5.0, 1.0);
    for (int i = 0; i < 400; ++i) v.push_back(normal(rng));
    auto m = [](const std::vector<double>& x) { return mean(x); };
    const auto a = bootstrap(v, m, 9), b = bootstrap(v, m, 9);
    CHECK(a.low == b.low);
    CHECK(a.high == b.high);
    CHECK(a.low < a.estimate);
    CHECK(a.estimate < a.high);
    // 68% interval of the mean is about one standard error wide on each side.
    CHECK((a.high - a.low) / 2.0 == doctest::Approx(1.0 / std::sqrt(400.0)).epsilon(0.2));
  }

  TEST_CASE("analysis of a run directory is byte stable and follows the documented schemas") {
    const auto dir = fs::temp_directory_path() / "tdvpl_test_analysis" / "run";
    fs::remove_all(dir);
    auto c = parse_run_config(R"({"L": 4, "D": [2, 4], "bath_grid": [{"gamma": 0.2, "temperature": 0.1},
      {"gamma": 0.2, "temperature": 0.3}], "scan_parameter": "temperature", "dt": 0.02, "t_final": 1.0,
      "trajectories": 3, "seed": 5, "initial_state": {"kind": "haar"}})");
    c.output = dir;
    run_ensemble(c);
    AnalysisOptions opt;
    opt.t0 = 0.4;
    analyze_run(dir, opt);
    const std::vector<std::string> names{"growth_rates.csv", "saturation.csv", "critical.csv", "tstar.csv",
                                         "tstar_summary.csv"};
    std::vector<std::string> first;
    for (const auto& n : names) first.push_back(io::read_file(dir / n));
    analyze_run(dir, opt);
    for (std::size_t i = 0; i < names.size(); ++i) CHECK(io::read_file(dir / names[i]) == first[i]);

    CHECK(header(dir / "growth_rates.csv") ==
          "point,scan_parameter,scan_value,gamma,noise,D,n_used,n_failed,slope_mean,slope_lo,slope_hi,slope_median,"
          "intercept_mean,residual_mean_curve,t0,window_start,window_end,config_hash");
    CHECK(header(dir / "saturation.csv") ==
          "point,scan_parameter,scan_value,gamma,noise,D,n_used,n_failed,sbar_mean,sbar_se,sbar_lo,sbar_hi,"
          "window_start,window_end,fraction,config_hash");
    CHECK(header(dir / "critical.csv") == "D,reference_D,scan_parameter,critical_value,reached,tolerance,config_hash");
    CHECK(header(dir / "tstar.csv") ==
          "point,scan_parameter,scan_value,gamma,noise,D,reference_D,id,criterion,epsilon,entropy_gate,t_star,bounded,"
          "config_hash");
    CHECK(header(dir / "tstar_summary.csv") ==
          "point,scan_parameter,scan_value,gamma,noise,D,reference_D,criterion,epsilon,n_used,n_failed,median,"
          "median_lo,median_hi,mean,mean_lo,mean_hi,fraction_unbounded,config_hash");
    CHECK(header(dir / "summary.csv") ==
          "point,scan_value,gamma,noise,D,time,n,n_failed,entropy_mean,entropy_se,energy_mean,energy_se");
    const auto meta = nlohmann::json::parse(io::read_file(dir / "meta.json"));
    for (const char* key : {"code_version", "config_hash", "config", "records"}) CHECK(meta.contains(key));
    CHECK(meta["records"].size() == 2 * 2 * 3);
    for (const auto& r : meta["records"]) {
      for (const char* key : {"point", "id", "seed", "D", "noise_checksum", "failure", "rows"}) CHECK(r.contains(key));
    }
    // 2 points x 1 lower D x 3 trajectories x 2 criteria
    const auto tstar = io::read_file(dir / "tstar.csv");
    CHECK(std::count(tstar.begin(), tstar.end(), '\n') == 1 + 12);
  }
}
