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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cqhybrid/commands.hpp"
#include "cqhybrid/config.hpp"
#include "cqhybrid/error.hpp"
#include "support.hpp"

using namespace cqh;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "cqh_test_config" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

// Effective config text without its comment lines.
std::string body(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != ';') out += line + '\n';
  }
  return out;
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
  for (const auto& s : v) {
    if (s.find(what) != std::string::npos) return true;
  }
  return false;
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(CommandOptions opts) {
  std::ostringstream out, err;
  const int code = run_command(opts, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("every preset parses") {
  for (const auto& name : preset_names()) {
    INFO(name);
    const RunConfig cfg = parse_config_text("scenario = " + name + "\n");
    CHECK(cfg.scenario == name);
    CHECK_NOTHROW(resolve_moments(cfg));
    // the effective text reproduces the run on its own
    CHECK(parse_config_text(cfg.text).text == body(cfg.text));
  }
  const RunConfig white = parse_config_text("scenario = cubic-white\n");
  CHECK(white.model.lambda1 == 1.0);
  CHECK(white.moments.N22 == 0.25);
  CHECK(white.moments.N33 == 0.25);
  CHECK(white.source == MomentSource::explicit_moments);
  CHECK(white.evolution.observables.size() == 3);
  CHECK(white.unravel.seed == 20240917u);
  CHECK(white.initial.rho.dim() == 2);

  const RunConfig thermal = parse_config_text("scenario = cubic-thermal\n");
  CHECK(thermal.source == MomentSource::environment);
  CHECK(thermal.grid.n_h == 32);
  CHECK(thermal.grid.n_pi == 32);
  bool decayed = false;
  const LocalMoments m = resolve_moments(thermal, &decayed);
  CHECK(decayed);
  CHECK(m.N22 > 0);
  CHECK(m.N33 > 0);

  const RunConfig ou = parse_config_text("scenario = ou-classical\n");
  CHECK(ou.initial.rho.dim() == 1);
  CHECK(ou.model.lambda1 == 0.0);

  CHECK(parse_config_text("scenario = tradeoff-violated\n").moments.N22 == 0.05);
}

TEST_CASE("overrides apply on top of a preset") {
  const RunConfig cfg =
      parse_config_text("scenario = cubic-white\n[moments]\nN22 = 0.5\n[evolution]\ndt = 0.001\n");
  CHECK(cfg.moments.N22 == 0.5);
  CHECK(cfg.moments.N33 == 0.25);
  CHECK(cfg.evolution.dt == 0.001);
  CHECK(cfg.text.find("N22 = 0.5") != std::string::npos);
  CHECK(fnv1a_hex(cfg.text) != fnv1a_hex(parse_config_text("scenario = cubic-white\n").text));
}

TEST_CASE("all violations are reported together") {
  const auto v = violations_of(
      "scenario = cubic-white\n[moments]\nN33 = -1\nN44 = 2\n[grid]\nn_h = 4\n"
      "[evolution]\ndt = fast\n[extra]\nkey = 1\n");
  CHECK(v.size() >= 5);
  CHECK(mentions(v, "unknown key 'moments.N44'"));
  CHECK(mentions(v, "complete positivity requires N33"));
  CHECK(mentions(v, "at least 8 points"));
  CHECK(mentions(v, "evolution.dt = 'fast'"));
  CHECK(mentions(v, "extra.key"));

  CHECK(mentions(violations_of("[model]\nlambda1 = 1\n[moments]\nN22 = 1\n[kernels]\nsource = environment\n"),
                 "both [moments] and [kernels]"));
  CHECK(mentions(violations_of("[model]\nlambda1 = 1\n"), "neither [moments] nor [kernels]"));
  CHECK(mentions(violations_of("scenario = nope\n"), "unknown scenario"));
  CHECK(mentions(violations_of("scenario = cubic-white\n[model]\nhbar = 0\n"), "hbar"));
  CHECK(mentions(violations_of("scenario = cubic-white\n[initial]\nstate = 7\n"), "initial.state"));
  CHECK(mentions(violations_of("scenario = cubic-white\n[evolution]\nintegrator = leapfrog\n"),
                 "rk4 or euler"));
  CHECK_THROWS_AS(parse_config("/nonexistent/run.cfg"), Error);
}

TEST_CASE("observables and initial states") {
  std::vector<std::string> v;
  const auto obs = parse_observables("sx,sz,p1", 2, &v);
  CHECK(v.empty());
  REQUIRE(obs.size() == 3);
  CHECK(obs[2].name == "p1");
  CHECK(obs[2].op.matrix()(1, 1) == cplx(1.0));
  CHECK(obs[2].op.matrix()(0, 0) == cplx(0.0));

  parse_observables("sx", 3, &v);
  CHECK(v.size() == 1);
  parse_observables("p5", 2, &v);
  CHECK(v.size() == 2);

  const auto plus = parse_config_text("scenario = cubic-white\n[initial]\nstate = +\n");
  CHECK(plus.initial.rho.matrix()(0, 1) == cplx(0.5));
  const auto mixed = parse_config_text("scenario = cubic-white\n[initial]\nstate = mixed\n");
  CHECK(mixed.initial.rho.matrix()(1, 1) == cplx(0.5));
}

TEST_CASE("kernel directories") {
  const fs::path dir = scratch("kernels");
  const LagGrid g = make_lag_grid(6.0, 0.01);
  const auto n22 = testing::narrow_noise(g, KernelPair::p22, 0.3, 0.2);
  const auto n33 = testing::narrow_noise(g, KernelPair::p33, 0.4, 0.2);
  auto d22 = NonlocalKernel::zeros(g, KernelKind::dissipation, KernelPair::p22);
  auto d33 = NonlocalKernel::zeros(g, KernelKind::dissipation, KernelPair::p33);
  for (int q = g.zero_index(); q < g.size(); ++q) {
    d33.values[q] = std::exp(-g.tau(q)) * (q == g.zero_index() ? 0.5 : 1.0);
  }
  fs::create_directories(dir / "k");
  write_kernel_csv((dir / "k" / "n22.csv").string(), n22);
  write_kernel_csv((dir / "k" / "d22.csv").string(), d22);
  write_kernel_csv((dir / "k" / "n33.csv").string(), n33);
  write_kernel_csv((dir / "k" / "d33.csv").string(), d33);

  const KernelSet ks = read_kernel_dir((dir / "k").string());
  CHECK_FALSE(ks.has_mixed);
  const LocalMoments m = moments_from_kernel_set(ks);
  CHECK(m.N22 == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(m.N33 == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(m.N22_2 == doctest::Approx(0.3 * 0.04 / 2).epsilon(1e-4));
  CHECK(m.D33 == doctest::Approx(0.5).epsilon(1e-3));

  // a relative kernels.dir resolves next to the config file
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "scenario = cubic-white\n";
  }
  const std::string text = "[model]\nlambda1 = 0.5\nquantum = qubit\n[kernels]\nsource = dir\ndir = k\n";
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << text;
  }
  const RunConfig cfg = parse_config((dir / "run.cfg").string());
  CHECK(cfg.source == MomentSource::kernel_files);
  const LocalMoments viaconfig = resolve_moments(cfg);
  CHECK(viaconfig.N22 == m.N22);
  CHECK(viaconfig.D33_1 == m.D33_1);

  CHECK_THROWS_AS(read_kernel_dir((dir / "missing").string()), Error);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("check-tradeoff exit codes") {
  const fs::path dir = scratch("tradeoff");
  CommandOptions o;
  o.command = "check-tradeoff";
  o.scenario = "cubic-white";
  o.out_dir = (dir / "sat").string();
  const auto sat = run(o);
  CHECK(sat.code == kExitOk);
  const json js = json::parse(sat.out);
  CHECK(js["pass"] == true);
  CHECK(js["verdicts_agree"] == true);
  CHECK(std::abs(js["tradeoff"]["margin"].get<double>()) <= 1e-12);
  CHECK(std::abs(js["markov_C_M"]["margin"].get<double>()) <= 1e-12);
  CHECK(fs::exists(dir / "sat" / "certificate.json"));

  // the manifest alone reproduces the run
  std::ifstream mf(dir / "sat" / "manifest.json");
  const json manifest = json::parse(mf);
  const std::string text = manifest["config"];
  CHECK(manifest["config_hash"] == fnv1a_hex(text));
  CHECK(parse_config_text(text).text == body(text));

  o.scenario = "tradeoff-violated";
  o.out_dir = (dir / "viol").string();
  const auto viol = run(o);
  CHECK(viol.code == kExitCpFail);
  CHECK(json::parse(viol.out)["pass"] == false);
}

TEST_CASE("command failure classes") {
  const fs::path dir = scratch("codes");
  CommandOptions o;
  o.out_dir = (dir / "x").string();

  o.command = "frobnicate";
  auto r = run(o);
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("unknown command") != std::string::npos);

  o.command = "evolve";
  CHECK(run(o).code == kExitConfig);  // neither config nor scenario

  o.config_path = (dir / "cfl.cfg").string();
  {
    std::ofstream f(o.config_path);
    f << "scenario = ou-classical\n[evolution]\ndt = 0.05\n";
  }
  r = run(o);
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("stability bound") != std::string::npos);

  // on a grid too small for the initial state mass leaks out at once
  {
    std::ofstream f(o.config_path);
    f << "scenario = ou-classical\n[grid]\nh_min = -3\nh_max = 3\nn_h = 16\n"
         "pi_min = -3\npi_max = 3\nn_pi = 16\n[evolution]\nt_final = 1\n";
  }
  r = run(o);
  CHECK(r.code == kExitNumerical);
  CHECK(r.err.find("drifted") != std::string::npos);

  o.command = "unravel";
  o.config_path.clear();
  o.scenario = "tradeoff-violated";
  CHECK(run(o).code == kExitCpFail);

  CHECK(exit_code(ErrorKind::cp_violation) == kExitCpFail);
  CHECK(exit_code(ErrorKind::numerical_abort) == kExitNumerical);
  CHECK(exit_code(ErrorKind::config) == kExitConfig);
}

TEST_CASE("evolve, unravel and compare commands") {
  const fs::path dir = scratch("runs");
  CommandOptions o;
  o.command = "evolve";
  o.scenario = "ou-classical";
  o.out_dir = (dir / "evolve").string();
  auto r = run(o);
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(dir / "evolve" / "evolve.csv"));
  CHECK(fs::exists(dir / "evolve" / "manifest.json"));
  CHECK(json::parse(r.out)["max_trace_error"].get<double>() <= 1e-6);

  o.command = "unravel";
  o.out_dir = (dir / "unravel").string();
  o.trajectories = 400;
  o.seed = 5;
  o.evolve_csv = (dir / "evolve" / "evolve.csv").string();
  r = run(o);
  REQUIRE(r.code == kExitOk);
  const json un = json::parse(r.out);
  CHECK(un["trajectories"] == 400);
  CHECK(un["seed"] == 5);
  CHECK(un["compare"]["observables"].contains("mean_h"));
  CHECK(un["compare"]["observables"].contains("var_pi"));
  std::ifstream mf(dir / "unravel" / "manifest.json");
  CHECK(json::parse(mf)["seed"] == 5);

  // identical seed gives an identical CSV
  o.out_dir = (dir / "unravel2").string();
  REQUIRE(run(o).code == kExitOk);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir / "unravel" / "unravel.csv") == slurp(dir / "unravel2" / "unravel.csv"));

  CommandOptions c;
  c.command = "compare";
  c.evolve_csv = (dir / "evolve" / "evolve.csv").string();
  c.unravel_csv = (dir / "unravel" / "unravel.csv").string();
  r = run(c);
  CHECK(r.code == kExitOk);
  CHECK(json::parse(r.out)["max_abs_z"] == un["compare"]["max_abs_z"]);

  o.command = "moments";
  o.scenario = "cubic-thermal";
  o.out_dir = (dir / "moments").string();
  r = run(o);
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "moments" / "kernels" / "n22.csv"));
  CHECK(json::parse(r.out)["decayed"] == true);
}

TEST_CASE("compare_series z-scores") {
  const fs::path dir = scratch("compare");
  {
    std::ofstream e(dir / "e.csv");
    e << "t,trace,mean_h,sz\n0,1,1.0,1.0\n0.5,1,0.8,0.5\n1,1,0.5,0.2\n";
    std::ofstream u(dir / "u.csv");
    u << "t,mean_h,mean_h_se,sz,sz_se\n0,1.0,0,1.0,0\n0.5,0.9,0.05,0.4,0.1\n1,0.45,0.1,0.2,0.01\n";
  }
  const json js = compare_series((dir / "e.csv").string(), (dir / "u.csv").string());
  CHECK(js["observables"]["mean_h"]["max_abs_z"].get<double>() == doctest::Approx(2.0));
  CHECK(js["observables"]["sz"]["max_abs_z"].get<double>() == doctest::Approx(1.0));
  CHECK(js["observables"]["mean_h"]["z"].size() == 3);
  CHECK(js["within_3_se"] == true);
  CHECK_THROWS_AS(compare_series((dir / "none.csv").string(), (dir / "u.csv").string()), Error);
}

TEST_CASE("check-kernel command") {
  const fs::path dir = scratch("check_kernel");
  const LagGrid g = make_lag_grid(14.0, 0.01);
  write_kernel_csv((dir / "n22.csv").string(), testing::narrow_noise(g, KernelPair::p22, 0.5, 0.1));
  write_kernel_csv((dir / "n33.csv").string(), testing::narrow_noise(g, KernelPair::p33, 0.25, 0.1));
  CommandOptions o;
  o.command = "check-kernel";
  o.kernels_dir = dir.string();
  o.out_dir = (dir / "out").string();
  o.stride = 100;
  o.lambda1 = 1.0;
  auto r = run(o);
  CHECK(r.code == kExitOk);
  CHECK(json::parse(r.out)["stride"] == 100);
  o.lambda1 = 3.0;
  CHECK(run(o).code == kExitCpFail);
  o.kernels_dir = (dir / "empty").string();
  CHECK(run(o).code == kExitConfig);
}
