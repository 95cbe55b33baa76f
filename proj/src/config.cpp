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

#include "cqhybrid/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cqhybrid/json_io.hpp"

namespace cqh {
namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

using FlatConfig = std::map<std::string, std::string>;

const std::vector<std::string> kSectionOrder = {"model",  "moments", "kernels",   "environment",
                                                "grid",   "initial", "evolution", "unravel"};

const char* const kCubicWhite = R"(
[model]
hbar = 1
lambda1 = 1
omega_c = 1
quantum = qubit
omega_q = 1
[moments]
N22 = 0.25
N33 = 0.25
[grid]
h_min = -13
h_max = 13
n_h = 120
pi_min = -13
pi_max = 13
n_pi = 120
[initial]
h0 = 1
pi0 = 0
sigma_h = 0.7
sigma_pi = 0.7
state = 0
[evolution]
dt = 0.002
t_final = 2
output_stride = 50
integrator = rk4
monitor_positivity = true
observables = sx,sy,sz
[unravel]
trajectories = 10000
seed = 20240917
dt = 0.002
output_stride = 50
)";

const char* const kCubicThermal = R"(
[model]
hbar = 1
lambda1 = 0.08
omega_c = 0.1
quantum = qubit
omega_q = 1
[kernels]
source = environment
[environment]
kind = thermal_mode
omega = 2
linewidth = 1
temperature = 0.5
lambda2 = 1
lambda3 = 0.2
[grid]
h_min = -27
h_max = 27
n_h = 32
pi_min = -3.2
pi_max = 3.2
n_pi = 32
[initial]
h0 = 0
pi0 = 0
sigma_h = 3
sigma_pi = 0.3
state = 0
[evolution]
dt = 0.0001
t_final = 1
output_stride = 500
integrator = rk4
monitor_positivity = true
observables = sx,sy,sz
[unravel]
trajectories = 10000
seed = 20240917
dt = 0.001
output_stride = 100
)";

const char* const kOuClassical = R"(
[model]
hbar = 1
lambda1 = 0
omega_c = 1
quantum = scalar
[moments]
N33 = 0.5
N33_2 = 0.1
D33_1 = 1
[grid]
h_min = -7.5
h_max = 7.5
n_h = 64
pi_min = -7.5
pi_max = 7.5
n_pi = 64
[initial]
h0 = 1
pi0 = 0
sigma_h = 0.5
sigma_pi = 0.5
[evolution]
dt = 0.0025
t_final = 5
output_stride = 200
integrator = rk4
[unravel]
trajectories = 10000
seed = 20240917
dt = 0.005
output_stride = 100
)";

const char* const kLindbladFrozen = R"(
[model]
hbar = 1
lambda1 = 0
omega_c = 0
quantum = qubit
omega_q = 1
[moments]
N22 = 0.1
N22_2 = 0.05
D22 = 0.2
D22_1 = 0.1
D23 = 0.3
[grid]
h_min = -4
h_max = 4
n_h = 17
pi_min = -4
pi_max = 4
n_pi = 17
[initial]
h0 = 1
pi0 = 0
sigma_h = 0.05
sigma_pi = 0.05
state = +
[evolution]
dt = 0.01
t_final = 10
output_stride = 100
integrator = rk4
monitor_positivity = true
observables = sx,sy,sz
[unravel]
trajectories = 1000
seed = 20240917
dt = 0.01
output_stride = 100
)";

// Preset names map to text; tradeoff-violated reuses cubic-white with weaker decoherence.
std::string lookup_preset(const std::string& name) {
  if (name == "cubic-white") return kCubicWhite;
  if (name == "cubic-thermal") return kCubicThermal;
  if (name == "ou-classical") return kOuClassical;
  if (name == "lindblad-frozen") return kLindbladFrozen;
  if (name == "tradeoff-violated") {
    std::string t = kCubicWhite;
    const auto pos = t.find("N22 = 0.25");
    t.replace(pos, 10, "N22 = 0.05");
    const auto tf = t.find("t_final = 2");
    t.replace(tf, 11, "t_final = 1");
    return t;
  }
  return {};
}

FlatConfig flatten(const std::string& text, std::vector<std::string>& violations) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    violations.push_back(std::string("syntax: ") + e.message() + " (line " +
                         std::to_string(e.line()) + ")");
    return {};
  }
  FlatConfig flat;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      flat[name] = node.data();
      continue;
    }
    for (const auto& [key, leaf] : node) flat[name + "." + key] = leaf.data();
  }
  return flat;
}

std::string render(const FlatConfig& flat, const std::string& scenario) {
  std::ostringstream os;
  if (!scenario.empty()) os << "; preset " << scenario << " with overrides applied\n";
  for (const auto& sec : kSectionOrder) {
    bool header = false;
    for (const auto& [k, v] : flat) {
      if (k.rfind(sec + ".", 0) != 0) continue;
      if (!header) {
        os << '[' << sec << "]\n";
        header = true;
      }
      os << k.substr(sec.size() + 1) << " = " << v << '\n';
    }
  }
  return os.str();
}

class Reader {
 public:
  Reader(const FlatConfig& flat, std::vector<std::string>& violations)
      : flat_(flat), violations_(violations) {}

  bool has(const std::string& key) const { return flat_.count(key) > 0; }
  bool has_section(const std::string& sec) const {
    return std::any_of(flat_.begin(), flat_.end(),
                       [&](const auto& kv) { return kv.first.rfind(sec + ".", 0) == 0; });
  }

  std::string str(const std::string& key, const std::string& fallback = {}) {
    used_.insert(key);
    const auto it = flat_.find(key);
    return it == flat_.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string s = str(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    violations_.push_back(key + " = '" + s + "' is not a finite number");
    return fallback;
  }

  long integer(const std::string& key, long fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string s = str(key);
    try {
      std::size_t pos = 0;
      const long v = std::stol(s, &pos);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    violations_.push_back(key + " = '" + s + "' is not an integer");
    return fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    violations_.push_back(key + " = '" + s + "' is not a boolean");
    return fallback;
  }

  void report_unknown() const {
    for (const auto& [k, v] : flat_) {
      if (!used_.count(k)) violations_.push_back("unknown key '" + k + "'");
    }
  }

 private:
  const FlatConfig& flat_;
  std::vector<std::string>& violations_;
  std::set<std::string> used_;
};

const char* const kMomentKeys[] = {"N22",   "N33",   "N23",   "N32",   "N22_2", "N33_2",
                                   "N23_2", "N32_2", "D22",   "D33",   "D23",   "D32",
                                   "D22_1", "D33_1", "D23_1", "D32_1"};

QuantumOperator basis_state(int dim, int k) {
  CMatrix m = CMatrix::Zero(dim, dim);
  m(k, k) = 1.0;
  return QuantumOperator(m);
}

QuantumOperator initial_rho(const std::string& state, int dim, std::vector<std::string>& v) {
  if (dim == 1) return QuantumOperator::identity(1);
  if (state == "mixed") return (1.0 / dim) * QuantumOperator::identity(dim);
  if (state == "+" || state == "-") {
    if (dim != 2) {
      v.push_back("initial.state '" + state + "' needs a qubit");
      return basis_state(dim, 0);
    }
    const double s = state == "+" ? 1.0 : -1.0;
    CMatrix m(2, 2);
    m << 0.5, 0.5 * s, 0.5 * s, 0.5;
    return QuantumOperator(m);
  }
  try {
    std::size_t pos = 0;
    const int k = std::stoi(state, &pos);
    if (pos == state.size() && k >= 0 && k < dim) return basis_state(dim, k);
  } catch (const std::exception&) {
  }
  v.push_back("initial.state '" + state + "' must be a basis index, +, - or mixed");
  return basis_state(dim, 0);
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"cubic-white", "cubic-thermal", "ou-classical", "lindblad-frozen",
          "tradeoff-violated"};
}

std::string preset_text(const std::string& name) {
  std::string t = lookup_preset(name);
  if (t.empty()) throw ConfigError({"unknown scenario '" + name + "'"});
  return t;
}

std::vector<NamedOperator> parse_observables(const std::string& list, int dim,
                                             std::vector<std::string>* violations) {
  std::vector<NamedOperator> out;
  std::istringstream in(list);
  std::string name;
  while (std::getline(in, name, ',')) {
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (name.empty()) continue;
    if ((name == "sx" || name == "sy" || name == "sz") && dim == 2) {
      out.push_back({name, name == "sx" ? pauli_x() : name == "sy" ? pauli_y() : pauli_z()});
      continue;
    }
    if (name.size() > 1 && name[0] == 'p') {
      try {
        std::size_t pos = 0;
        const int k = std::stoi(name.substr(1), &pos);
        if (pos == name.size() - 1 && k >= 0 && k < dim) {
          out.push_back({name, basis_state(dim, k)});
          continue;
        }
      } catch (const std::exception&) {
      }
    }
    if (violations) {
      violations->push_back("evolution.observables: '" + name +
                            "' is not sx/sy/sz (qubit) or a projector p<k>");
    }
  }
  return out;
}

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  std::vector<std::string> v;
  FlatConfig flat = flatten(text, v);
  if (!v.empty()) throw ConfigError(v);

  RunConfig cfg;
  if (const auto it = flat.find("scenario"); it != flat.end()) {
    cfg.scenario = it->second;
    flat.erase(it);
    const std::string base = lookup_preset(cfg.scenario);
    if (base.empty()) throw ConfigError({"unknown scenario '" + cfg.scenario + "'"});
    FlatConfig merged = flatten(base, v);
    for (const auto& [k, val] : flat) merged[k] = val;
    flat = std::move(merged);
  }
  cfg.text = render(flat, cfg.scenario);
  for (const auto& [k, val] : flat) {
    const auto dot = k.find('.');
    const std::string sec = dot == std::string::npos ? "" : k.substr(0, dot);
    if (std::find(kSectionOrder.begin(), kSectionOrder.end(), sec) == kSectionOrder.end()) {
      v.push_back("unknown section or top-level key '" + k + "'");
    }
  }

  Reader r(flat, v);

  // [model]
  ModelConfig& m = cfg.model;
  m.hbar = r.num("model.hbar", 1.0);
  m.lambda1 = r.num("model.lambda1", 0.0);
  m.omega_c = r.num("model.omega_c", 0.0);
  if (!(m.hbar > 0)) v.push_back("model.hbar must be positive");
  if (!(m.omega_c >= 0)) v.push_back("model.omega_c must be non-negative");
  const std::string quantum = r.str("model.quantum", "qubit");
  const double omega_q = r.num("model.omega_q", 1.0);
  const std::string ops = r.str("model.operators");
  if (quantum == "qubit") {
    if (!(omega_q > 0)) v.push_back("model.omega_q must be positive");
    m.h_psi = cplx(m.hbar * omega_q / 2.0) * pauli_z();
    m.f2 = pauli_x();
  } else if (quantum == "scalar") {
    m.h_psi = QuantumOperator::zero(1);
    m.f2 = QuantumOperator::identity(1);
  } else if (quantum == "file") {
    try {
      const fs::path p = fs::path(base_dir) / ops;
      std::ifstream in(p);
      if (!in) throw Error(ErrorKind::io, "cannot read " + p.string());
      const auto js = nlohmann::json::parse(in);
      m.h_psi = operator_from_json(js.at("H_psi"));
      m.f2 = operator_from_json(js.at("F2"));
      validate(m);
    } catch (const std::exception& e) {
      v.push_back(std::string("model.operators: ") + e.what());
      m.h_psi = QuantumOperator::zero(1);
      m.f2 = QuantumOperator::identity(1);
    }
  } else {
    v.push_back("model.quantum must be qubit, scalar or file");
    m.h_psi = QuantumOperator::zero(1);
    m.f2 = QuantumOperator::identity(1);
  }
  if (quantum != "file" && !ops.empty()) v.push_back("model.operators needs quantum = file");
  const int dim = m.h_psi.dim();

  // [moments] / [kernels]
  const bool has_moments = r.has_section("moments");
  const bool has_kernels = r.has_section("kernels");
  if (has_moments && has_kernels) {
    v.push_back("both [moments] and [kernels] are given; provide exactly one");
  } else if (!has_moments && !has_kernels) {
    v.push_back("neither [moments] nor [kernels] is given; provide exactly one");
  }
  {
    LocalMoments& lm = cfg.moments;
    double* slot[] = {&lm.N22,   &lm.N33,   &lm.N23,   &lm.N32,   &lm.N22_2, &lm.N33_2,
                      &lm.N23_2, &lm.N32_2, &lm.D22,   &lm.D33,   &lm.D23,   &lm.D32,
                      &lm.D22_1, &lm.D33_1, &lm.D23_1, &lm.D32_1};
    for (std::size_t k = 0; k < std::size(kMomentKeys); ++k) {
      *slot[k] = r.num(std::string("moments.") + kMomentKeys[k], 0.0);
    }
  }
  if (cfg.moments.N33 < 0) {
    v.push_back("moments.N33 is negative; complete positivity requires N33 >= 0");
  }
  if (cfg.moments.N33_2 < 0) {
    v.push_back("moments.N33_2 is negative; complete positivity requires N33_2 >= 0");
  }
  cfg.source = MomentSource::explicit_moments;
  const std::string source = r.str("kernels.source", "environment");
  cfg.kernel_dir = r.str("kernels.dir");
  if (has_kernels) {
    if (source == "environment") {
      cfg.source = MomentSource::environment;
    } else if (source == "dir") {
      cfg.source = MomentSource::kernel_files;
      if (cfg.kernel_dir.empty()) v.push_back("kernels.dir is required with source = dir");
      cfg.kernel_dir = (fs::path(base_dir) / cfg.kernel_dir).string();
    } else {
      v.push_back("kernels.source must be environment or dir");
    }
  }

  // [environment]
  EnvironmentParams& env = cfg.environment;
  const std::string kind = r.str("environment.kind", "thermal_mode");
  if (kind == "thermal_mode") {
    env.kind = CorrelatorKind::thermal_mode;
  } else if (kind == "ohmic") {
    env.kind = CorrelatorKind::ohmic;
  } else {
    v.push_back("environment.kind must be thermal_mode or ohmic");
  }
  env.omega = r.num("environment.omega", 1.0);
  env.linewidth = r.num("environment.linewidth", 0.0);
  env.eta = r.num("environment.eta", 1.0);
  env.temperature = r.num("environment.temperature", 1.0);
  env.window = r.num("environment.window", 0.0);
  env.step = r.num("environment.step", 0.0);
  env.hbar = m.hbar;
  cfg.lambda2 = r.num("environment.lambda2", 0.0);
  cfg.lambda3 = r.num("environment.lambda3", 0.0);
  if (cfg.source == MomentSource::environment) {
    if (!(env.omega > 0)) v.push_back("environment.omega must be positive");
    if (!(env.temperature > 0)) v.push_back("environment.temperature must be positive");
    if (env.linewidth < 0) v.push_back("environment.linewidth must be non-negative");
    if (env.window < 0 || env.step < 0) v.push_back("environment window/step must be >= 0");
  }

  // [grid]
  PhaseSpaceGrid& g = cfg.grid;
  g.h_min = r.num("grid.h_min", -8.0);
  g.h_max = r.num("grid.h_max", 8.0);
  g.n_h = static_cast<int>(r.integer("grid.n_h", 64));
  g.pi_min = r.num("grid.pi_min", -8.0);
  g.pi_max = r.num("grid.pi_max", 8.0);
  g.n_pi = static_cast<int>(r.integer("grid.n_pi", 64));
  if (g.n_h < kMinGridPoints || g.n_pi < kMinGridPoints) {
    v.push_back("grid needs at least 8 points per axis");
  }
  if (!(g.h_max > g.h_min) || !(g.pi_max > g.pi_min)) v.push_back("grid ranges must be increasing");

  // [initial]
  InitialState& init = cfg.initial;
  init.h0 = r.num("initial.h0", 0.0);
  init.pi0 = r.num("initial.pi0", 0.0);
  init.sigma_h = r.num("initial.sigma_h", 1.0);
  init.sigma_pi = r.num("initial.sigma_pi", 1.0);
  if (!(init.sigma_h > 0) || !(init.sigma_pi > 0)) v.push_back("initial widths must be positive");
  init.rho = initial_rho(r.str("initial.state", "0"), dim, v);

  // [evolution]
  EvolutionConfig& ev = cfg.evolution;
  ev.dt = r.num("evolution.dt", 1e-3);
  ev.t_final = r.num("evolution.t_final", 1.0);
  ev.output_stride = static_cast<int>(r.integer("evolution.output_stride", 100));
  const std::string integ = r.str("evolution.integrator", "rk4");
  if (integ == "rk4") {
    ev.integrator = Integrator::rk4;
  } else if (integ == "euler") {
    ev.integrator = Integrator::euler;
  } else {
    v.push_back("evolution.integrator must be rk4 or euler");
  }
  ev.monitor_positivity = r.boolean("evolution.monitor_positivity", false);
  ev.monitor_boundary = r.boolean("evolution.monitor_boundary", true);
  ev.snapshot_stride = static_cast<int>(r.integer("evolution.snapshot_stride", 0));
  ev.observables = parse_observables(r.str("evolution.observables"), dim, &v);
  if (!(ev.dt > 0)) v.push_back("evolution.dt must be positive");
  if (!(ev.t_final >= 0)) v.push_back("evolution.t_final must be non-negative");
  if (ev.output_stride < 1) v.push_back("evolution.output_stride must be >= 1");
  if (ev.snapshot_stride < 0) v.push_back("evolution.snapshot_stride must be >= 0");

  // [unravel]
  UnravelSettings& un = cfg.unravel;
  un.trajectories = r.integer("unravel.trajectories", 1000);
  un.seed = static_cast<std::uint64_t>(r.integer("unravel.seed", 1));
  un.dt = r.num("unravel.dt", ev.dt);
  un.output_stride = static_cast<int>(r.integer("unravel.output_stride", ev.output_stride));
  if (un.trajectories < 1) v.push_back("unravel.trajectories must be >= 1");
  if (!(un.dt > 0)) v.push_back("unravel.dt must be positive");
  if (un.output_stride < 1) v.push_back("unravel.output_stride must be >= 1");

  r.report_unknown();
  if (!v.empty()) throw ConfigError(v);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path p(path);
  return parse_config_text(ss.str(), p.has_parent_path() ? p.parent_path().string() : ".");
}

KernelSet read_kernel_dir(const std::string& dir) {
  KernelSet k;
  auto load = [&](const char* name, KernelKind kind, KernelPair pair) {
    return read_kernel_csv((fs::path(dir) / (std::string(name) + ".csv")).string(), kind, pair);
  };
  k.n22 = load("n22", KernelKind::noise, KernelPair::p22);
  k.d22 = load("d22", KernelKind::dissipation, KernelPair::p22);
  k.n33 = load("n33", KernelKind::noise, KernelPair::p33);
  k.d33 = load("d33", KernelKind::dissipation, KernelPair::p33);
  const fs::path mixed = fs::path(dir) / "n23.csv";
  k.has_mixed = fs::exists(mixed);
  if (k.has_mixed) {
    k.n23 = load("n23", KernelKind::noise, KernelPair::p23);
    k.d23 = load("d23", KernelKind::dissipation, KernelPair::p23);
    k.n32 = load("n32", KernelKind::noise, KernelPair::p32);
    k.d32 = load("d32", KernelKind::dissipation, KernelPair::p32);
  }
  return k;
}

LocalMoments moments_from_kernel_set(const KernelSet& k, bool* decayed) {
  LocalMoments m;
  bool ok = true;
  auto take = [&](const NonlocalKernel& kern, double& zeroth, double& higher) {
    const KernelMoments km = extract_moments(kern);
    zeroth = km.zeroth;
    higher = km.higher;
    ok = ok && km.decayed;
  };
  take(k.n22, m.N22, m.N22_2);
  take(k.d22, m.D22, m.D22_1);
  take(k.n33, m.N33, m.N33_2);
  take(k.d33, m.D33, m.D33_1);
  if (k.has_mixed) {
    take(k.n23, m.N23, m.N23_2);
    take(k.d23, m.D23, m.D23_1);
    take(k.n32, m.N32, m.N32_2);
    take(k.d32, m.D32, m.D32_1);
  }
  if (decayed) *decayed = ok;
  return m;
}

LocalMoments resolve_moments(const RunConfig& cfg, bool* decayed) {
  if (decayed) *decayed = true;
  switch (cfg.source) {
    case MomentSource::explicit_moments:
      return cfg.moments;
    case MomentSource::environment: {
      const EnvironmentCorrelator corr = make_correlator(cfg.environment);
      return moments_from_cubic(build_cubic_kernels(corr, cfg.lambda2, cfg.lambda3), decayed);
    }
    case MomentSource::kernel_files:
      return moments_from_kernel_set(read_kernel_dir(cfg.kernel_dir), decayed);
  }
  return cfg.moments;
}

}  // namespace cqh
