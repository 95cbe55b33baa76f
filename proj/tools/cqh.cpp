// Copyright 2026 The cqhybrid Authors
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

// cqh: command-line front end for the cqhybrid toolkit.

#include <cstdlib>
#include <iostream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "cqhybrid/commands.hpp"

namespace {

void apply_worker_env() {
  const char* env = std::getenv("CQH_WORKERS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end == '\0' && n > 0) {
    omp_set_num_threads(static_cast<int>(n));
  } else {
    std::cerr << "warning: ignoring CQH_WORKERS='" << env << "'\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  apply_worker_env();

  CLI::App app{"Markovian classical-quantum hybrid dynamics toolkit"};
  app.set_version_flag("--version", cqh::kVersion);
  app.require_subcommand(1);

  cqh::CommandOptions opts;
  unsigned long long seed = 0;
  long trajectories = 0;
  double lambda1 = 0.0;

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "INI configuration file");
    sub->add_option("--scenario", opts.scenario,
                    "built-in preset: cubic-white, cubic-thermal, ou-classical, "
                    "lindblad-frozen, tradeoff-violated");
    sub->add_option("--out", opts.out_dir, "run directory (default runs/<command>-<hash>)");
  };

  with_config(app.add_subcommand("coeffs", "print generator coefficients and dictionary"));
  with_config(app.add_subcommand("moments", "extract local moments and run the FDR check"));
  with_config(app.add_subcommand("check-tradeoff", "certify the Markovian CP conditions"));
  auto* kernel = app.add_subcommand("check-kernel", "certify a discretized nonlocal kernel");
  with_config(kernel);
  kernel->add_option("--kernels", opts.kernels_dir, "directory of kernel CSV files")->required();
  auto* l1 = kernel->add_option("--lambda1", lambda1, "hybrid coupling (overrides config)");
  kernel->add_option("--hbar", opts.hbar, "reduced Planck constant");
  kernel->add_option("--nt", opts.n_t, "number of time points");
  kernel->add_option("--stride", opts.stride, "time step in units of the lag step")
      ->check(CLI::PositiveNumber);
  with_config(app.add_subcommand("evolve", "integrate the master equation"));
  auto* unravel = app.add_subcommand("unravel", "run the stochastic unraveling");
  with_config(unravel);
  auto* traj = unravel->add_option("--trajectories", trajectories, "trajectory count")
                   ->check(CLI::PositiveNumber);
  auto* seed_opt = unravel->add_option("--seed", seed, "master seed");
  unravel->add_option("--compare", opts.evolve_csv, "evolve.csv to compare against");
  auto* compare = app.add_subcommand("compare", "z-scores of unravel output against evolve");
  compare->add_option("evolve", opts.evolve_csv, "evolve.csv")->required();
  compare->add_option("unravel", opts.unravel_csv, "unravel.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return cqh::kExitConfig;
  }

  opts.command = app.get_subcommands().front()->get_name();
  for (int k = 0; k < argc; ++k) opts.invocation += (k ? " " : "") + std::string(argv[k]);
  if (*l1) opts.lambda1 = lambda1;
  if (*traj) opts.trajectories = trajectories;
  if (*seed_opt) opts.seed = seed;
  return cqh::run_command(opts, std::cout, std::cerr);
}
