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

#include <functional>
#include <string>
#include <vector>

#include "cqhybrid/cq_coeffs.hpp"
#include "cqhybrid/semi_wigner.hpp"

namespace cqh {

enum class Integrator { rk4, euler };

struct NamedOperator {
  std::string name;
  QuantumOperator op;
};

struct Diagnostics {
  double t = 0.0;
  double trace = 0.0;
  double min_p = 0.0;
  double min_eig = 0.0;  // NaN unless positivity monitoring is on
  double mean_h = 0.0, mean_pi = 0.0, var_h = 0.0, var_pi = 0.0;
  double herm_err = 0.0;  // largest anti-Hermitian part removed so far, relative to peak
  std::vector<double> observables;  // Tr[rho_psi O]
};

struct EvolutionConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  int output_stride = 100;
  Integrator integrator = Integrator::rk4;
  bool monitor_positivity = false;
  bool monitor_boundary = true;
  std::vector<NamedOperator> observables;
  int snapshot_stride = 0;  // 0 disables snapshots
  std::string snapshot_prefix;
  std::function<void(const Diagnostics&)> on_sample;
};

inline constexpr double kTraceDriftTol = 1e-6;

/// Pointwise Markovian CQ generator, discretized on a fixed grid.
class Generator {
 public:
  Generator(const CQCoefficients& coeffs, const PhaseSpaceGrid& grid);

  /// rate <- L[w]; rate must share w's grid and dimension.
  void apply(const SemiWignerState& w, SemiWignerState& rate) const;

  /// Largest dt allowed by the explicit-stepping bound.
  double stable_dt() const { return stable_dt_; }

 private:
  PhaseSpaceGrid grid_;
  Drift drift_;
  double n33_ = 0.0, n33_2_ = 0.0;
  int dim_ = 0;
  CMatrix k_base_, k_h_, k_pi_;  // K(h, pi) = -(i/hbar) H_eff(h, pi) - P/2
  CMatrix l_[2], y_[2];          // sum_a L_a W Y_a with Y_a = sum_b D_ab L_b^dag
  CMatrix x_h_, x_pi_;
  bool hybrid_h_ = false, hybrid_pi_ = false, lindblad_ = false;
  double stable_dt_ = 0.0;
};

/// Rate of change of w under the master equation.
SemiWignerState generator(const SemiWignerState& w, const CQCoefficients& coeffs);

/// Throws ErrorKind::config when dt exceeds the stability bound.
void check_cfl(const Generator& gen, double dt);

struct EvolutionResult {
  std::vector<Diagnostics> series;
  SemiWignerState final_state;
};

Diagnostics diagnose(const SemiWignerState& w, double t, bool positivity,
                     const std::vector<NamedOperator>& observables);

/// Integrates from w0 to t_final. Aborts with ErrorKind::numerical_abort if the
/// total trace drifts by more than kTraceDriftTol or mass reaches the boundary.
EvolutionResult evolve(const SemiWignerState& w0, const CQCoefficients& coeffs,
                       const EvolutionConfig& cfg);

std::string series_header(const std::vector<NamedOperator>& observables);
std::string series_row(const Diagnostics& d);
void write_series_csv(const std::string& path, const EvolutionResult& result,
                      const std::vector<NamedOperator>& observables);

}  // namespace cqh
