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

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "cqhybrid/cq_coeffs.hpp"
#include "cqhybrid/kernels.hpp"

namespace cqh {

/// Outcome of one semidefiniteness test. `min_eigenvalue` and `witness` refer
/// to the tested matrix as assembled; the verdict compares min_eigenvalue
/// against -kPsdTol * scale, where scale is the max-norm of its parts.
/// A failing verdict means "not certified", never "not CP".
struct CertReport {
  std::string condition_name;
  bool pass = false;
  double min_eigenvalue = 0.0;
  CVector witness;
  double scale = 0.0;
  double margin = 0.0;
  std::string reason;
};

inline constexpr double kPsdTol = 1e-12;
inline constexpr double kSupportTol = 1e-10;

struct LocalKernel {
  Eigen::Matrix2cd cm = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd subtraction = Eigen::Matrix2cd::Zero();
  bool supported = true;
  std::string reason;
};

/// C_M = D0 - d_h d_h^dag / (2 N33_2) - d_pi d_pi^dag / (2 N33). A direction with
/// zero diffusion but a nonzero hybrid vector is reported as unsupported.
LocalKernel build_CM(const CQCoefficients& coeffs);

struct MarkovCpReport {
  CertReport cm;
  CertReport classical;
  bool pass() const { return cm.pass && classical.pass; }
};

/// Margins are whitened: 1 - ||Z||^2 with Z = (2 D2)^(-1/2) D1 D0^(-1/2) on the
/// supports, so they are scale-free and vanish at saturation; -inf when a
/// hybrid direction is outside the support of D0 or D2.
MarkovCpReport check_markov_cp(const CQCoefficients& coeffs);

/// Rows of D1 are phase-space directions (h, pi) and columns the Lindblad
/// basis (F2, R2): D1 = [d_h^dag; d_pi^dag].
Eigen::Matrix2cd d1_matrix(const OppenheimDictionary& dict);

/// 2 D2 - D1 D0^+ D1^dag >= 0 plus the support condition ||(I - D0 D0^+) D1^dag|| <= 1e-10.
CertReport check_tradeoff(const OppenheimDictionary& dict);

/// Nonlocal kernels on a common lag grid whose step is also the time step.
struct NonMarkovKernels {
  NonlocalKernel n22, d22, n32, d32, n33r;
  std::optional<NonlocalKernel> n23;  // must equal n32 mirrored when given
};

/// Discretizes the branch-coupling kernel
///   C = N22/hbar^2 - (i/2hbar^2) D22^a - B+^T Q B-,  B(+/-) = L/2 -/+ (i/hbar) N32,
///   L = lambda1 - D32/(2 hbar),  Q = (N33R)^+
/// on n_t times t_i = i * stride * step and tests C >= 0 and N33R >= 0. Entries are
/// cell integrals of K(t_i - s) over the cell around t_j (trapezoid on the lag
/// samples), which reduce to K(t_i - t_j) dt for stride 1.
CertReport check_nonmarkov_kernel(const NonMarkovKernels& kernels, double lambda1, double hbar,
                                  int n_t, int stride = 1);

}  // namespace cqh
