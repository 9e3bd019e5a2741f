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

#include "tdvpl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "json.hpp"
#include "tdvpl/errors.hpp"
#include "tdvpl/hashing.hpp"
#include "tdvpl/io.hpp"

namespace tdvpl {

using json = nlohmann::json;

namespace {

// Grid comparisons on snapshot times tolerate round-off from k * interval.
constexpr double kTimeSlack = 1e-9;

}  // namespace

GrowthRateFit growth_rate(const std::vector<double>& times, const std::vector<double>& entropy, double t0,
                          std::optional<double> window) {
  require(times.size() == entropy.size(), "growth_rate: series lengths differ");
  require(!times.empty(), "growth_rate: empty series");
  const double last = times.back();
  const double w = window.value_or(last - t0);
  require(w > 0.0, "growth_rate: empty fit window");
  const double end = t0 + w;
  if (end > last + kTimeSlack) {
    throw ContractViolation("growth_rate: window [" + io::format_number(t0) + ", " + io::format_number(end) +
                            "] exceeds data ending at " + io::format_number(last));
  }
  double n = 0, sx = 0, sy = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 - kTimeSlack || times[k] > end + kTimeSlack) continue;
    n += 1;
    sx += times[k];
    sy += entropy[k];
  }
  require(n >= 2, "growth_rate: fewer than two samples in the window");
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 - kTimeSlack || times[k] > end + kTimeSlack) continue;
    sxx += (times[k] - mx) * (times[k] - mx);
    sxy += (times[k] - mx) * (entropy[k] - my);
  }
  GrowthRateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.window_start = t0;
  fit.window_end = end;
  double rss = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 - kTimeSlack || times[k] > end + kTimeSlack) continue;
    const double r = entropy[k] - (fit.intercept + fit.slope * times[k]);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

SaturationEstimate saturation(const std::vector<double>& times, const std::vector<double>& entropy, double fraction) {
  require(times.size() == entropy.size(), "saturation: series lengths differ");
  require(!times.empty(), "saturation: empty series");
  require(fraction > 0.0 && fraction <= 1.0, "saturation: fraction must lie in (0, 1]");
  SaturationEstimate est;
  est.window_end = times.back();
  est.window_start = times.back() - fraction * (times.back() - times.front());
  std::vector<double> tail;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= est.window_start - kTimeSlack) tail.push_back(entropy[k]);
  }
  est.mean = mean(tail);
  if (tail.size() > 1) {
    double ss = 0;
    for (double s : tail) ss += (s - est.mean) * (s - est.mean);
    const double m = static_cast<double>(tail.size());
    est.standard_error = std::sqrt(ss / (m - 1) / m);
  }
  return est;
}

std::vector<CriticalCoupling> critical_coupling(const std::vector<double>& grid,
                                                const std::vector<Eigen::Index>& bond_dims,
                                                const std::vector<std::vector<double>>& curves,
                                                const std::string& parameter, double tolerance) {
  require(!grid.empty(), "critical_coupling: empty grid");
  require(tolerance >= 0.0, "critical_coupling: negative tolerance");
  require(bond_dims.size() == curves.size() && !curves.empty(), "critical_coupling: one curve per bond dimension");
  for (std::size_t i = 1; i < grid.size(); ++i) require(grid[i] > grid[i - 1], "critical_coupling: grid not ascending");
  for (const auto& c : curves) require(c.size() == grid.size(), "critical_coupling: curve not aligned with the grid");
  for (std::size_t k = 1; k < bond_dims.size(); ++k) {
    require(bond_dims[k] > bond_dims[k - 1], "critical_coupling: reference must be the largest D");
  }
  const auto& ref = curves.back();
  std::vector<CriticalCoupling> out;
  for (std::size_t k = 0; k + 1 < curves.size(); ++k) {
    CriticalCoupling c;
    c.bond_dim = bond_dims[k];
    c.parameter = parameter;
    c.tolerance = tolerance;
    for (std::size_t i = grid.size(); i-- > 0;) {
      const bool agree = std::abs(curves[k][i] - ref[i]) <= tolerance * std::abs(ref[i]);
      if (!agree) break;
      c.value = grid[i];
    }
    out.push_back(c);
  }
  return out;
}

std::string to_string(TStarCriterion c) { return c == TStarCriterion::entropy ? "entropy" : "fidelity"; }

TStarPair t_star(const TrajectoryRecord& record, const TrajectoryRecord& reference, double epsilon,
                 double entropy_gate) {
  require(epsilon > 0.0 && epsilon < 1.0, "t_star: epsilon must lie in (0, 1)");
  if (record.id != reference.id || record.noise_checksum != reference.noise_checksum) {
    throw IntegrityError("t_star: trajectory " + std::to_string(record.id) + " at D=" +
                         std::to_string(record.bond_dim) + " does not share its noise with the reference");
  }
  TStarPair out;
  out.entropy = {record.bond_dim, TStarCriterion::entropy, epsilon, kUnbounded};
  out.fidelity = {record.bond_dim, TStarCriterion::fidelity, epsilon, kUnbounded};
  const std::size_t rows = std::min(record.rows.size(), reference.rows.size());
  for (std::size_t k = 0; k < rows; ++k) {
    const auto& r = record.rows[k];
    const auto& s = reference.rows[k];
    require(std::abs(r.time - s.time) <= kTimeSlack, "t_star: snapshot times differ");
    if (!out.entropy.bounded() && s.entropy >= entropy_gate &&
        std::abs(s.entropy - r.entropy) / s.entropy > epsilon) {
      out.entropy.value = r.time;
    }
    if (!out.fidelity.bounded() && r.overlap_ref < 1.0 - epsilon) out.fidelity.value = r.time;
  }
  return out;
}

double median(std::vector<double> values) {
  require(!values.empty(), "median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
  require(!values.empty(), "mean of an empty sample");
  double s = 0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

Interval bootstrap(const std::vector<double>& values, const std::function<double(const std::vector<double>&)>& statistic,
                   std::uint64_t seed, int resamples, double level) {
  require(!values.empty(), "bootstrap of an empty sample");
  require(resamples > 0 && level > 0.0 && level < 1.0, "bootstrap: bad resample count or level");
  Interval out;
  out.estimate = statistic(values);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  std::vector<double> sample(values.size());
  for (auto& s : stats) {
    for (auto& x : sample) x = values[pick(rng)];
    s = statistic(sample);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - level);
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1) + 0.5));
    return stats[std::min(idx, stats.size() - 1)];
  };
  out.low = quantile(tail);
  out.high = quantile(1.0 - tail);
  return out;
}

namespace {

struct RunData {
  RunConfig config;
  std::string hash;
  // [point][D index][id]; failed records keep their truncated rows.
  std::vector<std::vector<std::vector<TrajectoryRecord>>> records;
};

RunData load_run(const std::filesystem::path& run) {
  RunData data;
  data.config = parse_run_config(io::read_file(run / "config.json"));
  data.config.output = run;
  const auto meta_path = run / "meta.json";
  json meta;
  try {
    meta = json::parse(io::read_file(meta_path));
  } catch (const json::exception& e) {
    throw IntegrityError(meta_path.string() + ": " + e.what());
  }
  data.hash = meta.at("config_hash").get<std::string>();
  const auto& c = data.config;
  data.records.assign(c.baths.size(), std::vector<std::vector<TrajectoryRecord>>(
                                          c.bond_dims.size(), std::vector<TrajectoryRecord>(c.trajectories)));
  std::vector<std::vector<std::vector<bool>>> seen(
      c.baths.size(), std::vector<std::vector<bool>>(c.bond_dims.size(), std::vector<bool>(c.trajectories, false)));
  for (const auto& m : meta.at("records")) {
    const auto p = m.at("point").get<std::size_t>();
    const auto id = m.at("id").get<int>();
    const auto d = m.at("D").get<Eigen::Index>();
    const auto it = std::find(c.bond_dims.begin(), c.bond_dims.end(), d);
    if (p >= c.baths.size() || id < 0 || id >= c.trajectories || it == c.bond_dims.end()) {
      throw IntegrityError(meta_path.string() + ": record outside the configured grid");
    }
    const auto k = static_cast<std::size_t>(it - c.bond_dims.begin());
    TrajectoryRecord r = read_trajectory_csv(trajectory_csv_path(run, p, id, d));
    r.point = p;
    r.id = id;
    r.bond_dim = d;
    r.seed = m.at("seed").get<std::uint64_t>();
    r.noise_checksum = std::stoull(m.at("noise_checksum").get<std::string>(), nullptr, 16);
    if (!m.at("failure").is_null()) r.failure = m.at("failure").get<std::string>();
    data.records[p][k][id] = std::move(r);
    seen[p][k][id] = true;
  }
  for (const auto& a : seen)
    for (const auto& b : a)
      for (bool s : b)
        if (!s) throw IntegrityError(meta_path.string() + ": run is incomplete");
  return data;
}

std::vector<double> column(const TrajectoryRecord& r, double SnapshotRow::*field) {
  std::vector<double> out;
  for (const auto& row : r.rows) out.push_back(row.*field);
  return out;
}

std::string n(double v) { return io::format_number(v); }

std::string bath_columns(const RunConfig& c, std::size_t p) {
  return std::to_string(p) + "," + (c.scan_parameter.empty() ? "none" : c.scan_parameter) + "," + n(c.scan_value(p)) +
         "," + n(c.baths[p].gamma) + "," + n(c.baths[p].noise);
}

constexpr const char* kBathHeader = "point,scan_parameter,scan_value,gamma,noise";

}  // namespace

void analyze_run(const std::filesystem::path& run, const AnalysisOptions& opt) {
  const RunData data = load_run(run);
  const RunConfig& c = data.config;
  const std::size_t nd = c.bond_dims.size();
  auto seed_for = [&](std::uint64_t a, std::uint64_t b, std::uint64_t tag) {
    return mix_seed(mix_seed(mix_seed(opt.seed, tag), a), b);
  };
  auto mean_fn = [](const std::vector<double>& v) { return mean(v); };
  auto median_fn = [](const std::vector<double>& v) { return median(v); };

  // Growth rates and saturation per (point, D).
  std::string growth = std::string(kBathHeader) +
                       ",D,n_used,n_failed,slope_mean,slope_lo,slope_hi,slope_median,intercept_mean,"
                       "residual_mean_curve,t0,window_start,window_end,config_hash\n";
  std::string sat = std::string(kBathHeader) +
                    ",D,n_used,n_failed,sbar_mean,sbar_se,sbar_lo,sbar_hi,window_start,window_end,fraction,config_hash\n";
  std::vector<std::vector<double>> sbar(nd, std::vector<double>(c.baths.size(), 0.0));
  for (std::size_t p = 0; p < c.baths.size(); ++p) {
    for (std::size_t k = 0; k < nd; ++k) {
      std::vector<double> slopes, intercepts, sbars;
      std::vector<double> mean_curve;
      std::vector<double> times;
      GrowthRateFit window{};
      SaturationEstimate sat_window{};
      int failed = 0;
      for (const auto& r : data.records[p][k]) {
        if (r.failure) {
          ++failed;
          continue;
        }
        const auto t = column(r, &SnapshotRow::time);
        const auto s = column(r, &SnapshotRow::entropy);
        if (times.empty()) {
          times = t;
          mean_curve.assign(s.size(), 0.0);
        }
        for (std::size_t i = 0; i < s.size(); ++i) mean_curve[i] += s[i];
        if (opt.t0 < t.back()) {
          window = growth_rate(t, s, opt.t0, opt.window);
          slopes.push_back(window.slope);
          intercepts.push_back(window.intercept);
        }
        sat_window = saturation(t, s, opt.saturation_fraction);
        sbars.push_back(sat_window.mean);
      }
      const int used = c.trajectories - failed;
      const std::string head = bath_columns(c, p) + "," + std::to_string(c.bond_dims[k]) + "," + std::to_string(used) +
                               "," + std::to_string(failed) + ",";
      const double nan = std::numeric_limits<double>::quiet_NaN();
      if (!slopes.empty()) {
        for (auto& x : mean_curve) x /= static_cast<double>(used);
        const auto fit = growth_rate(times, mean_curve, opt.t0, opt.window);
        const auto ci = bootstrap(slopes, mean_fn, seed_for(p, k, 1), opt.resamples);
        growth += head + n(ci.estimate) + "," + n(ci.low) + "," + n(ci.high) + "," + n(median(slopes)) + "," +
                  n(mean(intercepts)) + "," + n(fit.residual) + "," + n(opt.t0) + "," + n(window.window_start) + "," +
                  n(window.window_end) + "," + data.hash + "\n";
      } else {
        growth += head + "nan,nan,nan,nan,nan,nan," + n(opt.t0) + ",nan,nan," + data.hash + "\n";
      }
      if (!sbars.empty()) {
        const auto ci = bootstrap(sbars, mean_fn, seed_for(p, k, 2), opt.resamples);
        double se = 0;
        if (sbars.size() > 1) {
          double ss = 0;
          for (double x : sbars) ss += (x - ci.estimate) * (x - ci.estimate);
          const double m = static_cast<double>(sbars.size());
          se = std::sqrt(ss / (m - 1) / m);
        }
        sbar[k][p] = ci.estimate;
        sat += head + n(ci.estimate) + "," + n(se) + "," + n(ci.low) + "," + n(ci.high) + "," +
               n(sat_window.window_start) + "," + n(sat_window.window_end) + "," + n(opt.saturation_fraction) + "," +
               data.hash + "\n";
      } else {
        sbar[k][p] = nan;
        sat += head + "nan,nan,nan,nan,nan,nan," + n(opt.saturation_fraction) + "," + data.hash + "\n";
      }
    }
  }
  io::write_file_atomic(run / "growth_rates.csv", growth);
  io::write_file_atomic(run / "saturation.csv", sat);

  // Critical coupling across the grid, ordered by scan value.
  std::string crit = "D,reference_D,scan_parameter,critical_value,reached,tolerance,config_hash\n";
  if (nd > 1 && c.baths.size() > 1 && !c.scan_parameter.empty()) {
    std::vector<std::size_t> order(c.baths.size());
    for (std::size_t p = 0; p < order.size(); ++p) order[p] = p;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return c.scan_value(a) < c.scan_value(b); });
    std::vector<double> grid;
    for (auto p : order) grid.push_back(c.scan_value(p));
    std::vector<std::vector<double>> curves(nd);
    for (std::size_t k = 0; k < nd; ++k)
      for (auto p : order) curves[k].push_back(sbar[k][p]);
    for (const auto& cc : critical_coupling(grid, c.bond_dims, curves, c.scan_parameter, opt.tolerance)) {
      crit += std::to_string(cc.bond_dim) + "," + std::to_string(c.reference_bond_dim()) + "," + cc.parameter + "," +
              (cc.value ? n(*cc.value) : std::string("nan")) + "," + (cc.value ? "1" : "0") + "," + n(cc.tolerance) +
              "," + data.hash + "\n";
    }
  }
  io::write_file_atomic(run / "critical.csv", crit);

  // t* per trajectory against the reference D, then ensemble statistics.
  std::string ts = std::string(kBathHeader) +
                   ",D,reference_D,id,criterion,epsilon,entropy_gate,t_star,bounded,config_hash\n";
  std::string tss = std::string(kBathHeader) +
                    ",D,reference_D,criterion,epsilon,n_used,n_failed,median,median_lo,median_hi,mean,mean_lo,mean_hi,"
                    "fraction_unbounded,config_hash\n";
  if (nd > 1) {
    for (std::size_t p = 0; p < c.baths.size(); ++p) {
      for (std::size_t k = 0; k + 1 < nd; ++k) {
        std::vector<double> ent, fid;
        int failed = 0;
        for (int id = 0; id < c.trajectories; ++id) {
          const auto& r = data.records[p][k][id];
          const auto& ref = data.records[p][nd - 1][id];
          if (r.failure || ref.failure) {
            ++failed;
            continue;
          }
          const auto pair = t_star(r, ref, opt.epsilon, opt.entropy_gate);
          for (const TStar* t : {&pair.entropy, &pair.fidelity}) {
            ts += bath_columns(c, p) + "," + std::to_string(c.bond_dims[k]) + "," +
                  std::to_string(c.reference_bond_dim()) + "," + std::to_string(id) + "," + to_string(t->criterion) +
                  "," + n(opt.epsilon) + "," + n(opt.entropy_gate) + "," + n(t->value) + "," +
                  (t->bounded() ? "1" : "0") + "," + data.hash + "\n";
          }
          ent.push_back(pair.entropy.value);
          fid.push_back(pair.fidelity.value);
        }
        for (auto crit_kind : {TStarCriterion::entropy, TStarCriterion::fidelity}) {
          const auto& v = crit_kind == TStarCriterion::entropy ? ent : fid;
          std::string row = bath_columns(c, p) + "," + std::to_string(c.bond_dims[k]) + "," +
                            std::to_string(c.reference_bond_dim()) + "," + to_string(crit_kind) + "," +
                            n(opt.epsilon) + "," + std::to_string(v.size()) + "," + std::to_string(failed) + ",";
          if (v.empty()) {
            row += "nan,nan,nan,nan,nan,nan,nan";
          } else {
            const auto tag = crit_kind == TStarCriterion::entropy ? 3u : 4u;
            const auto med = bootstrap(v, median_fn, seed_for(p, k, tag), opt.resamples);
            const auto avg = bootstrap(v, mean_fn, seed_for(p, k, tag + 2), opt.resamples);
            const double unbounded =
                static_cast<double>(std::count(v.begin(), v.end(), kUnbounded)) / static_cast<double>(v.size());
            row += n(med.estimate) + "," + n(med.low) + "," + n(med.high) + "," + n(avg.estimate) + "," + n(avg.low) +
                   "," + n(avg.high) + "," + n(unbounded);
          }
          tss += row + "," + data.hash + "\n";
        }
      }
    }
  }
  io::write_file_atomic(run / "tstar.csv", ts);
  io::write_file_atomic(run / "tstar_summary.csv", tss);
}

}  // namespace tdvpl
