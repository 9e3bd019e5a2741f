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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdvpl/analysis.hpp"
#include "tdvpl/config.hpp"
#include "tdvpl/errors.hpp"
#include "tdvpl/haar_thermal.hpp"
#include "tdvpl/io.hpp"
#include "tdvpl/runner.hpp"
#include "tdvpl/verify.hpp"

namespace {

using namespace tdvpl;
using json = nlohmann::json;

int simulate(const std::string& config_path, std::optional<std::string> output, const RunOptions& options) {
  RunConfig config = load_run_config(config_path);
  if (output) config.output = *output;
  const RunOutcome outcome = run_ensemble(config, options);
  if (!outcome.complete) {
    std::printf("interrupted: %s holds checkpoints, rerun with --resume\n", config.output.string().c_str());
    return 3;
  }
  std::printf("%d tasks, %d failed records%s -> %s\n", outcome.tasks, outcome.failed_records,
              outcome.deduplicated ? " (closed deterministic trajectories shared)" : "", config.output.string().c_str());
  return 0;
}

int verify(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : run_oracle_suite(seed)) {
    std::printf("%-4s %-32s %.3e <= %.1e  (%.2fs)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.value, r.bound,
                r.seconds);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_left,bin_right,density\n";
  for (Eigen::Index b = 0; b < h.density.size(); ++b) {
    out += io::format_number(h.edges(b)) + "," + io::format_number(h.edges(b + 1)) + "," +
           io::format_number(h.density(b)) + "\n";
  }
  return out;
}

int haar(const std::string& config_path, std::optional<std::string> output) {
  HaarConfig c = load_haar_config(config_path);
  if (output) c.output = *output;
  const Mpo h = build_tilted_ising(c.ising, c.length);
  Rng rng(c.seed);
  const WeightedEnsemble ensemble =
      c.sampler == SamplerKind::metropolis
          ? sample_metropolis_ensemble(h, c.length, c.bond_dim, c.beta, c.samples, rng, c.metropolis)
          : sample_weighted_ensemble(h, c.length, c.bond_dim, c.beta, c.samples, rng);
  if (!ensemble.warning.empty()) std::fprintf(stderr, "warning: %s\n", ensemble.warning.c_str());

  std::filesystem::create_directories(c.output);
  std::string samples = "index,energy,energy_per_site,weight\n";
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    samples += std::to_string(i) + "," + io::format_number(ensemble.energies(k)) + "," +
               io::format_number(ensemble.energies(k) / c.length) + "," + io::format_number(ensemble.weights(k)) + "\n";
  }
  io::write_file_atomic(c.output / "samples.csv", samples);
  io::write_file_atomic(c.output / "histogram_total.csv", histogram_csv(energy_histogram(ensemble, c.bins)));
  io::write_file_atomic(c.output / "histogram_per_site.csv",
                        histogram_csv(energy_histogram(ensemble, c.bins, EnergyAxis::per_site)));

  json meta{{"L", c.length},
            {"D", c.bond_dim},
            {"beta", c.beta},
            {"samples", c.samples},
            {"seed", c.seed},
            {"effective_sample_size", ensemble.effective_sample_size()},
            {"warning", ensemble.warning}};
  int status = 0;
  if (c.fixed_point) {
    LangevinPlan plan;
    plan.sweep.dt = c.fixed_point->dt;
    plan.scheme = c.fixed_point->scheme;
    const auto report = fixed_point_test(h, c.fixed_point->bath, ensemble, c.fixed_point->times, plan,
                                         mix_seed(c.seed, 0x6670), c.workers);
    std::string fp = "time,ks_statistic,critical_value,passed\n";
    for (std::size_t k = 0; k < report.times.size(); ++k) {
      const bool pass = report.statistic[k] < report.critical[k];
      if (!pass) status = 1;
      fp += io::format_number(report.times[k]) + "," + io::format_number(report.statistic[k]) + "," +
            io::format_number(report.critical[k]) + "," + (pass ? "1" : "0") + "\n";
      std::printf("t=%g  KS=%.4f  critical=%.4f  %s\n", report.times[k], report.statistic[k], report.critical[k],
                  pass ? "pass" : "fail");
    }
    io::write_file_atomic(c.output / "fixed_point.csv", fp);
    meta["fixed_point"] = {{"gamma", c.fixed_point->bath.gamma},
                           {"noise", c.fixed_point->bath.noise},
                           {"dt", c.fixed_point->dt},
                           {"times", c.fixed_point->times}};
  }
  io::write_file_atomic(c.output / "meta.json", meta.dump(1) + "\n");
  std::printf("%zu samples, effective size %.1f -> %s\n", ensemble.size(), ensemble.effective_sample_size(),
              c.output.string().c_str());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TDVP-Langevin trajectories over matrix product states"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run a trajectory ensemble");
  std::string sim_config;
  std::optional<std::string> sim_output;
  RunOptions run_options;
  std::optional<long> stop_after;
  std::optional<int> workers;
  sim->add_option("--config", sim_config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--output", sim_output, "Override the output directory");
  sim->add_flag("--resume", run_options.resume, "Continue an interrupted run");
  sim->add_option("--stop-after-steps", stop_after, "Checkpoint and stop after this many steps in total");
  sim->add_option("--workers", workers, "Worker threads");

  auto* ver = app.add_subcommand("verify", "Quick oracle checks against dense evolution");
  std::uint64_t verify_seed = 1;
  ver->add_option("--seed", verify_seed);

  auto* hr = app.add_subcommand("haar", "Sample the Boltzmann-weighted Haar ensemble");
  std::string haar_config;
  std::optional<std::string> haar_output;
  hr->add_option("--config", haar_config, "Sampler configuration (JSON)")->required()->check(CLI::ExistingFile);
  hr->add_option("--output", haar_output, "Override the output directory");

  auto* an = app.add_subcommand("analyze", "Extract growth rates, saturation, critical couplings and t*");
  std::string run_dir;
  AnalysisOptions ao;
  std::optional<double> window;
  an->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  an->add_option("--t0", ao.t0, "Growth fit start")->capture_default_str();
  an->add_option("--window", window, "Growth fit window length (default: to the end)");
  an->add_option("--fraction", ao.saturation_fraction, "Saturation window fraction")->capture_default_str();
  an->add_option("--tolerance", ao.tolerance, "Critical coupling tolerance")->capture_default_str();
  an->add_option("--epsilon", ao.epsilon, "t* deviation threshold")->capture_default_str();
  an->add_option("--entropy-gate", ao.entropy_gate, "Smallest reference entropy for the relative criterion")
      ->capture_default_str();
  an->add_option("--resamples", ao.resamples, "Bootstrap resamples")->capture_default_str();
  an->add_option("--seed", ao.seed, "Bootstrap seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      run_options.stop_after_steps = stop_after;
      run_options.workers = workers;
      return simulate(sim_config, sim_output, run_options);
    }
    if (*ver) return verify(verify_seed);
    if (*hr) return haar(haar_config, haar_output);
    if (*an) {
      ao.window = window;
      analyze_run(run_dir, ao);
      std::printf("wrote growth_rates.csv saturation.csv critical.csv tstar.csv tstar_summary.csv in %s\n",
                  run_dir.c_str());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
