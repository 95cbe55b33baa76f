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

#include <Eigen/Dense>

#include "cqhybrid/hilbert.hpp"
#include "cqhybrid/kernels.hpp"

namespace cqh {

/// Model couplings. The classical sector is a unit-mass oscillator
/// H_c = pi^2/2 + omega_c^2 h^2/2; the quantum sector couples through F2.
struct ModelConfig {
  double hbar = 1.0;
  double lambda1 = 0.0;
  QuantumOperator h_psi;
  QuantumOperator f2;
  double omega_c = 0.0;
};

/// Throws on non-Hermitian operators, mismatched dimensions or invalid constants.
void validate(const ModelConfig& model);

/// A(h, pi) = -omega_c^2 h - damping * pi - restoring * h
struct Drift {
  double omega_c2 = 0.0;
  double damping = 0.0;    // D33_1 / hbar
  double restoring = 0.0;  // D33 / hbar

  double operator()(double h, double pi) const {
    return -(omega_c2 + restoring) * h - damping * pi;
  }
};

/// Scalar couplings of the effective Hamiltonian
///   H_eff = H_psi + h_coeff h F2 + pi_coeff pi F2 + f2_sq F2^2 + anti_fr {F2, R2}
struct HeffCouplings {
  double h_coeff = 0.0;   // lambda1 - D23/hbar
  double pi_coeff = 0.0;  // -D23_1/hbar
  double f2_sq = 0.0;     // D22/(2 hbar)
  double anti_fr = 0.0;   // -D22_1/(4 hbar)
};

struct CQCoefficients {
  double hbar = 1.0;
  double lambda1 = 0.0;
  Drift drift;
  double n33 = 0.0;    // momentum diffusion
  double n33_2 = 0.0;  // position diffusion
  HeffCouplings heff;
  GKSLMatrix d0;
  double gamma = 0.0, nu = 0.0, kappa = 0.0, mu = 0.0;
  Eigen::Vector2cd d_pi = Eigen::Vector2cd::Zero();  // (gamma - i nu, kappa)
  Eigen::Vector2cd d_h = Eigen::Vector2cd::Zero();   // (0, i mu)

  QuantumOperator h_psi, f2, r2;
  // H_eff(h, pi) = heff_base + h * heff_h + pi * heff_pi
  QuantumOperator heff_base, heff_h, heff_pi;

  int dim() const { return h_psi.dim(); }
  QuantumOperator heff_at(double h, double pi) const;
  LindbladPair lindblad() const { return {f2, r2}; }
};

inline constexpr double kMixedSymmetryTol = 1e-12;

CQCoefficients assemble(const LocalMoments& moments, const ModelConfig& model);

/// Coefficient blocks in the general CQ master-equation parametrization.
/// Phase-space directions are ordered (h, pi).
struct OppenheimDictionary {
  Eigen::Matrix2d d2_00 = Eigen::Matrix2d::Zero();  // diag(N33_2, N33)
  Eigen::Vector2cd d1_h = Eigen::Vector2cd::Zero();
  Eigen::Vector2cd d1_pi = Eigen::Vector2cd::Zero();
  GKSLMatrix d0;
  Drift drift;  // D1_00 = (pi, A(h, pi))
};

OppenheimDictionary to_oppenheim(const CQCoefficients& coeffs);

}  // namespace cqh
