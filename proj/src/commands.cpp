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

#include "cqhybrid/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <omp.h>

#include "cqhybrid/config.hpp"
#include "cqhybrid/cq_master.hpp"
#include "cqhybrid/json_io.hpp"
#include "cqhybrid/positivity.hpp"
#include "cqhybrid/unraveling.hpp"

namespace cqh {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (header[k] == name) return static_cast<int>(k);
    }
    return -1;
  }
};

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot read " + path);
  Table t;
  std::string line, cell;
  if (!std::getline(in, line)) fail(ErrorKind::io, path + " is empty");
  std::istringstream hs(line);
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream rs(line);
    while (std::getline(rs, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != t.header.size()) fail(ErrorKind::io, path + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_json(const fs::path& path, const json& js) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << js.dump(2) << '\n';
}

fs::path prepare_run_dir(const CommandOptions& opts, const std::string& config_text,
                         std::optional<std::uint64_t> seed) {
  const std::string hash = fnv1a_hex(config_text);
  const fs::path dir = opts.out_dir.empty()
                           ? fs::path("runs") / (opts.command + "-" + hash.substr(0, 8))
                           : fs::path(opts.out_dir);
  fs::create_directories(dir);
  json manifest;
  manifest["command"] = opts.command;
  manifest["invocation"] = opts.invocation;
  manifest["config"] = config_text;
  manifest["config_hash"] = hash;
  manifest["version"] = kVersion;
  manifest["seed"] = seed ? json(*seed) : json(nullptr);
  manifest["workers"] = omp_get_max_threads();
  write_json(dir / "manifest.json", manifest);
  return dir;
}

RunConfig load_config(const CommandOptions& opts) {
  if (!opts.config_path.empty() && !opts.scenario.empty()) {
    throw ConfigError({"give either --config or --scenario, not both"});
  }
  if (!opts.scenario.empty()) return parse_config_text("scenario = " + opts.scenario + "\n");
  if (opts.config_path.empty()) throw ConfigError({opts.command + " needs --config or --scenario"});
  return parse_config(opts.config_path);
}

CQCoefficients coefficients_for(const RunConfig& cfg) {
  return assemble(resolve_moments(cfg), cfg.model);
}

int cmd_coeffs(const CommandOptions& opts, std::ostream& out) {
  const RunConfig cfg = load_config(opts);
  const CQCoefficients c = coefficients_for(cfg);
  json js;
  js["coefficients"] = to_json(c);
  js["dictionary"] = to_json(to_oppenheim(c));
  const fs::path dir = prepare_run_dir(opts, cfg.text, std::nullopt);
  write_json(dir / "coeffs.json", js);
  out << js.dump(2) << '\n';
  return kExitOk;
}

int cmd_moments(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  const fs::path dir = prepare_run_dir(opts, cfg.text, std::nullopt);
  bool decayed = true;
  json js;
  if (cfg.source == MomentSource::environment) {
    const EnvironmentCorrelator corr = make_correlator(cfg.environment);
    const CubicKernels k = build_cubic_kernels(corr, cfg.lambda2, cfg.lambda3);
    const LocalMoments m = moments_from_cubic(k, &decayed);
    fs::create_directories(dir / "kernels");
    write_kernel_csv((dir / "kernels" / "n22.csv").string(), k.noise_psi);
    write_kernel_csv((dir / "kernels" / "d22.csv").string(), k.diss_psi);
    write_kernel_csv((dir / "kernels" / "n33.csv").string(), k.noise_h);
    write_kernel_csv((dir / "kernels" / "d33.csv").string(), k.diss_h);
    js["moments"] = to_json(m);
    js["fdr"] = to_json(fdr_check(m, cfg.environment.temperature, cfg.model.hbar));
  } else {
    js["moments"] = to_json(resolve_moments(cfg, &decayed));
  }
  js["decayed"] = decayed;
  if (!decayed) err << "warning: a kernel has not decayed to 1e-6 of its peak at the window edge\n";
  write_json(dir / "moments.json", js);
  out << js.dump(2) << '\n';
  return kExitOk;
}

int cmd_check_tradeoff(const CommandOptions& opts, std::ostream& out) {
  const RunConfig cfg = load_config(opts);
  const CQCoefficients c = coefficients_for(cfg);
  const MarkovCpReport markov = check_markov_cp(c);
  const CertReport trade = check_tradeoff(to_oppenheim(c));
  json js;
  js["markov_C_M"] = to_json(markov.cm);
  js["classical_diffusion"] = to_json(markov.classical);
  js["tradeoff"] = to_json(trade);
  js["verdicts_agree"] = markov.cm.pass == trade.pass;
  js["pass"] = markov.pass() && trade.pass;
  const fs::path dir = prepare_run_dir(opts, cfg.text, std::nullopt);
  write_json(dir / "certificate.json", js);
  out << js.dump(2) << '\n';
  return markov.pass() && trade.pass ? kExitOk : kExitCpFail;
}

int cmd_check_kernel(const CommandOptions& opts, std::ostream& out) {
  if (opts.kernels_dir.empty()) throw ConfigError({"check-kernel needs --kernels <dir>"});
  double lambda1 = opts.lambda1.value_or(0.0);
  double hbar = opts.hbar;
  std::string text = "kernels=" + fs::absolute(opts.kernels_dir).string();
  if (!opts.config_path.empty() || !opts.scenario.empty()) {
    const RunConfig cfg = load_config(opts);
    lambda1 = opts.lambda1.value_or(cfg.model.lambda1);
    hbar = cfg.model.hbar;
    text += "\n" + cfg.text;
  }
  const fs::path kd(opts.kernels_dir);
  auto load = [&](const char* name, KernelKind kind, KernelPair pair,
                  const NonlocalKernel* like) {
    const fs::path p = kd / (std::string(name) + ".csv");
    if (!fs::exists(p)) {
      if (!like) fail(ErrorKind::io, "missing kernel file " + p.string());
      return NonlocalKernel::zeros(like->grid, kind, pair);
    }
    return read_kernel_csv(p.string(), kind, pair);
  };
  NonMarkovKernels k;
  k.n22 = load("n22", KernelKind::noise, KernelPair::p22, nullptr);
  k.d22 = load("d22", KernelKind::dissipation, KernelPair::p22, &k.n22);
  k.n32 = load("n32", KernelKind::noise, KernelPair::p32, &k.n22);
  k.d32 = load("d32", KernelKind::dissipation, KernelPair::p32, &k.n22);
  k.n33r = fs::exists(kd / "n33r.csv") ? load("n33r", KernelKind::noise, KernelPair::p33, nullptr)
                                       : load("n33", KernelKind::noise, KernelPair::p33, nullptr);
  if (fs::exists(kd / "n23.csv")) {
    k.n23 = load("n23", KernelKind::noise, KernelPair::p23, nullptr);
  }
  const int stride = std::max(opts.stride, 1);
  const int n_t = opts.n_t > 0 ? opts.n_t
                               : std::min(201, (k.n22.grid.half - stride / 2) / stride + 1);
  const CertReport rep = check_nonmarkov_kernel(k, lambda1, hbar, n_t, stride);
  json js = to_json(rep);
  js["n_t"] = n_t;
  js["stride"] = stride;
  js["lambda1"] = lambda1;
  js["hbar"] = hbar;
  const fs::path dir = prepare_run_dir(opts, text, std::nullopt);
  write_json(dir / "certificate.json", js);
  out << js.dump(2) << '\n';
  return rep.pass ? kExitOk : kExitCpFail;
}

int cmd_evolve(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  const CQCoefficients c = coefficients_for(cfg);
  const MarkovCpReport cp = check_markov_cp(c);
  if (!cp.pass()) err << "warning: CP conditions are not certified for this model\n";
  const fs::path dir = prepare_run_dir(opts, cfg.text, std::nullopt);

  const PhaseSpaceGrid grid = make_grid(cfg.grid.h_min, cfg.grid.h_max, cfg.grid.n_h,
                                        cfg.grid.pi_min, cfg.grid.pi_max, cfg.grid.n_pi);
  const SemiWignerState w0 =
      init_gaussian_product(grid, cfg.initial.h0, cfg.initial.pi0, cfg.initial.sigma_h,
                            cfg.initial.sigma_pi, cfg.initial.rho);
  EvolutionConfig ev = cfg.evolution;
  std::ofstream csv(dir / "evolve.csv");
  if (!csv) fail(ErrorKind::io, "cannot write evolve.csv");
  csv << series_header(ev.observables) << '\n';
  ev.on_sample = [&](const Diagnostics& d) { csv << series_row(d) << '\n' << std::flush; };
  if (ev.snapshot_stride > 0) {
    fs::create_directories(dir / "snapshots");
    ev.snapshot_prefix = (dir / "snapshots" / "w").string();
  }
  const EvolutionResult res = evolve(w0, c, ev);
  write_snapshot((dir / "final").string(), res.final_state, res.series.back().t);

  double worst_eig = std::numeric_limits<double>::infinity();
  double worst_trace = 0.0;
  for (const auto& d : res.series) {
    if (!std::isnan(d.min_eig)) worst_eig = std::min(worst_eig, d.min_eig);
    worst_trace = std::max(worst_trace, std::abs(d.trace - 1.0));
  }
  json js;
  js["run_dir"] = dir.string();
  js["samples"] = res.series.size();
  js["max_trace_error"] = worst_trace;
  js["max_hermiticity_error"] = res.series.back().herm_err;
  js["min_eigenvalue"] = std::isfinite(worst_eig) ? json(worst_eig) : json(nullptr);
  js["cp_certified"] = cp.pass();
  out << js.dump(2) << '\n';
  return kExitOk;
}

int cmd_unravel(const CommandOptions& opts, std::ostream& out) {
  const RunConfig cfg = load_config(opts);
  const CQCoefficients c = coefficients_for(cfg);
  const MarkovCpReport cp = check_markov_cp(c);
  if (!cp.pass()) {
    json js = {{"error", "CP conditions not certified; unraveling undefined"},
               {"markov_C_M", to_json(cp.cm)},
               {"classical_diffusion", to_json(cp.classical)}};
    out << js.dump(2) << '\n';
    return kExitCpFail;
  }
  UnravelConfig uc;
  uc.seed = opts.seed.value_or(cfg.unravel.seed);
  uc.trajectories = opts.trajectories.value_or(cfg.unravel.trajectories);
  uc.dt = cfg.unravel.dt;
  uc.t_final = cfg.evolution.t_final;
  uc.output_stride = cfg.unravel.output_stride;
  uc.h0 = cfg.initial.h0;
  uc.pi0 = cfg.initial.pi0;
  uc.sigma_h = cfg.initial.sigma_h;
  uc.sigma_pi = cfg.initial.sigma_pi;
  uc.rho0 = cfg.initial.rho;
  uc.observables = cfg.evolution.observables;

  std::ostringstream effective;
  effective << cfg.text << "; unravel overrides\n; trajectories = " << uc.trajectories
            << "\n; seed = " << uc.seed << '\n';
  const fs::path dir = prepare_run_dir(opts, effective.str(), uc.seed);
  const PhaseSpaceGrid grid = make_grid(cfg.grid.h_min, cfg.grid.h_max, cfg.grid.n_h,
                                        cfg.grid.pi_min, cfg.grid.pi_max, cfg.grid.n_pi);
  const EnsembleRecords rec = run_ensemble(c, uc);
  const EnsembleStats st = reduce(rec, uc.observables, 0, rec.trajectories);
  write_ensemble_csv((dir / "unravel.csv").string(), st);
  double lost = 0.0;
  write_snapshot((dir / "final").string(), deposit(rec, grid, &lost), st.times.back());

  json js;
  js["run_dir"] = dir.string();
  js["trajectories"] = uc.trajectories;
  js["seed"] = uc.seed;
  js["mass_outside_grid"] = lost;
  if (!opts.evolve_csv.empty()) {
    const json cmp = compare_series(opts.evolve_csv, (dir / "unravel.csv").string());
    write_json(dir / "compare.json", cmp);
    js["compare"] = cmp;
  }
  out << js.dump(2) << '\n';
  return kExitOk;
}

int cmd_compare(const CommandOptions& opts, std::ostream& out) {
  if (opts.evolve_csv.empty() || opts.unravel_csv.empty()) {
    throw ConfigError({"compare needs <evolve.csv> <unravel.csv>"});
  }
  const json js = compare_series(opts.evolve_csv, opts.unravel_csv);
  out << js.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::cp_violation:
      return kExitCpFail;
    case ErrorKind::numerical_abort:
      return kExitNumerical;
    default:
      return kExitConfig;
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

json compare_series(const std::string& evolve_csv, const std::string& unravel_csv) {
  const Table ev = read_csv(evolve_csv);
  const Table un = read_csv(unravel_csv);
  const int ev_t = ev.column("t"), un_t = un.column("t");
  if (ev_t < 0 || un_t < 0) fail(ErrorKind::io, "both series need a 't' column");

  json report;
  report["observables"] = json::object();
  double worst = 0.0;
  for (std::size_t k = 0; k < un.header.size(); ++k) {
    const std::string& name = un.header[k];
    const int se_col = un.column(name + "_se");
    const int ev_col = ev.column(name);
    if (name == "t" || se_col < 0 || ev_col < 0) continue;
    json zs = json::array();
    double max_z = 0.0;
    for (const auto& urow : un.rows) {
      for (const auto& erow : ev.rows) {
        if (std::abs(erow[ev_t] - urow[un_t]) > 1e-9 * std::max(1.0, std::abs(urow[un_t]))) {
          continue;
        }
        const double se = urow[se_col];
        const double diff = urow[k] - erow[ev_col];
        const double z = se > 0 ? diff / se : (diff == 0 ? 0.0 : INFINITY);
        max_z = std::max(max_z, std::abs(z));
        zs.push_back({{"t", urow[un_t]}, {"z", std::isfinite(z) ? json(z) : json(nullptr)}});
      }
    }
    report["observables"][name] = {{"max_abs_z", max_z}, {"z", zs}};
    worst = std::max(worst, max_z);
  }
  report["max_abs_z"] = worst;
  report["within_3_se"] = worst <= 3.0;
  return report;
}

int run_command(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.command == "coeffs") return cmd_coeffs(opts, out);
    if (opts.command == "moments") return cmd_moments(opts, out, err);
    if (opts.command == "check-tradeoff") return cmd_check_tradeoff(opts, out);
    if (opts.command == "check-kernel") return cmd_check_kernel(opts, out);
    if (opts.command == "evolve") return cmd_evolve(opts, out, err);
    if (opts.command == "unravel") return cmd_unravel(opts, out);
    if (opts.command == "compare") return cmd_compare(opts, out);
    err << "unknown command '" << opts.command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace cqh
