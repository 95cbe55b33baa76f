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

#include <Eigen/Dense>

#include "cqhybrid/cq_coeffs.hpp"
#include "cqhybrid/cq_master.hpp"
#include "cqhybrid/philox.hpp"
#include "cqhybrid/semi_wigner.hpp"

namespace cqh {

/// Noise covariances per unit time: E[eta eta^dag] = cm / dt and
/// Var(xi_h) = var_h / dt, Var(xi_pi) = var_pi / dt.
struct NoiseSpec {
  Eigen::Matrix2cd cm = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd cm_root = Eigen::Matrix2cd::Zero();  // cm_root cm_root^dag = cm
  double var_h = 0.0;   // 2 N33_2
  double var_pi = 0.0;  // 2 N33
};

/// Throws cp_violation when C_M is not PSD or a hybrid direction has no diffusion.
NoiseSpec make_noise_spec(const CQCoefficients& coeffs);
NoiseSpec make_noise_spec(const Eigen::Matrix2cd& cm, double var_h, double var_pi);

struct NoiseSample {
  Eigen::Vector2cd eta = Eigen::Vector2cd::Zero();
  double xi_h = 0.0;
  double xi_pi = 0.0;
};

NoiseSample sample_noise(const NoiseSpec& spec, double dt, TrajectoryRng& rng);

/// Precomputed operators for the Kraus step.
struct StepModel {
  Drift drift;
  CMatrix k_base, k_h, k_pi;  // -(i/hbar) H_eff(h, pi) - P/2 with P from the full D0
  CMatrix x_h, x_pi;          // hybrid operators sum_a d_a L_a
  CMatrix f2, r2;
  double b_h = 0.0, b_pi = 0.0;  // sqrt(2 N33_2), sqrt(2 N33)
};

StepModel make_step_model(const CQCoefficients& coeffs);

/// One stochastic path. rho is kept at unit trace; the discarded norm
/// accumulates in weight.
struct Trajectory {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  double t = 0.0;
  double h = 0.0, pi = 0.0;
  CMatrix rho;
  double weight = 1.0;
};

inline constexpr double kTrajectoryPsdTol = 1e-8;

/// Euler-Maruyama step with the classical noise entering the Kraus operator
/// through a measure change: h and pi pick up the backreaction drift
/// -2 Re Tr[X rho] and K = I + A dt + sum_z B_z dW_z + i (eta . L) dt.
void trajectory_step(Trajectory& traj, const StepModel& model, const NoiseSpec& spec, double dt,
                     TrajectoryRng& rng);

struct UnravelConfig {
  std::uint64_t seed = 1;
  long trajectories = 1000;
  double dt = 1e-3;
  double t_final = 1.0;
  int output_stride = 100;
  double h0 = 0.0, pi0 = 0.0, sigma_h = 1.0, sigma_pi = 1.0;
  QuantumOperator rho0;
  std::vector<NamedOperator> observables;
};

/// Per-trajectory values at each output time: weight, h, pi and Tr[rho O_k].
struct EnsembleRecords {
  std::vector<double> times;
  int n_obs = 0;
  long trajectories = 0;
  std::vector<double> data;  // [traj][time][2 + 1 + n_obs]
  std::vector<Trajectory> final;

  int stride() const { return 3 + n_obs; }
  const double* at(long traj, int time) const {
    return data.data() + (static_cast<std::size_t>(traj) * times.size() + time) * stride();
  }
};

/// Runs all trajectories in parallel; results do not depend on the worker count.
EnsembleRecords run_ensemble(const CQCoefficients& coeffs, const UnravelConfig& cfg);

/// Weighted estimates with delta-method standard errors for
/// mean_h, mean_pi, var_h, var_pi and each quantum observable.
struct EnsembleStats {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> mean;  // [time][observable]
  std::vector<std::vector<double>> se;
};

/// Statistics over trajectories [begin, end), summed in index order.
EnsembleStats reduce(const EnsembleRecords& rec, const std::vector<NamedOperator>& observables,
                     long begin, long end);

/// Cloud-in-cell deposit of the final weighted (h, pi, rho) triples; mass
/// falling outside the grid is dropped and returned in `lost`.
SemiWignerState deposit(const EnsembleRecords& rec, const PhaseSpaceGrid& grid,
                        double* lost = nullptr);

struct EnsembleResult {
  EnsembleStats stats;
  SemiWignerState estimate;
};

EnsembleResult ensemble_average(const CQCoefficients& coeffs, const UnravelConfig& cfg,
                                const PhaseSpaceGrid& grid);

void write_ensemble_csv(const std::string& path, const EnsembleStats& stats);

}  // namespace cqh
