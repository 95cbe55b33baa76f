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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cqhybrid/cq_coeffs.hpp"
#include "cqhybrid/cq_master.hpp"
#include "cqhybrid/kernels.hpp"
#include "cqhybrid/semi_wigner.hpp"

namespace cqh {

enum class MomentSource { explicit_moments, environment, kernel_files };

struct InitialState {
  double h0 = 0.0, pi0 = 0.0, sigma_h = 1.0, sigma_pi = 1.0;
  QuantumOperator rho;
};

struct UnravelSettings {
  long trajectories = 1000;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  int output_stride = 100;
};

/// Fully validated run description. `text` is the effective configuration
/// (preset merged with overrides) that reproduces the run.
struct RunConfig {
  std::string scenario;
  std::string text;
  ModelConfig model;
  MomentSource source = MomentSource::explicit_moments;
  LocalMoments moments;
  std::string kernel_dir;
  EnvironmentParams environment;
  double lambda2 = 0.0, lambda3 = 0.0;
  PhaseSpaceGrid grid;
  InitialState initial;
  EvolutionConfig evolution;
  UnravelSettings unravel;
};

/// Built-in presets: cubic-white, cubic-thermal, ou-classical, lindblad-frozen,
/// tradeoff-violated.
std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);

/// Parses INI text. A top-level `scenario = <preset>` line loads the preset
/// first and the remaining keys override it. Relative paths resolve against
/// `base_dir`. Throws ConfigError listing every violation.
RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
RunConfig parse_config(const std::string& path);

/// Moments from whichever source the config names.
LocalMoments resolve_moments(const RunConfig& cfg, bool* decayed = nullptr);

/// Kernel files read from a directory: n22, d22, n33, d33 and optionally
/// n23, d23, n32, d32 (CSV, one file each).
struct KernelSet {
  NonlocalKernel n22, d22, n33, d33, n23, d23, n32, d32;
  bool has_mixed = false;
};
KernelSet read_kernel_dir(const std::string& dir);
LocalMoments moments_from_kernel_set(const KernelSet& k, bool* decayed = nullptr);

/// Quantum observables named in the config ("sx", "sy", "sz" or "p<k>" projectors).
std::vector<NamedOperator> parse_observables(const std::string& list, int dim,
                                             std::vector<std::string>* violations);

}  // namespace cqh
