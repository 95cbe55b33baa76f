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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqhybrid/hilbert.hpp"

namespace cqh {

/// Uniform node grid: nodes h_i = h_min + i*dh, i = 0..n_h-1.
struct PhaseSpaceGrid {
  double h_min = 0.0, h_max = 1.0;
  int n_h = 0;
  double pi_min = 0.0, pi_max = 1.0;
  int n_pi = 0;

  double dh() const { return (h_max - h_min) / (n_h - 1); }
  double dpi() const { return (pi_max - pi_min) / (n_pi - 1); }
  double h(int i) const { return h_min + i * dh(); }
  double pi(int j) const { return pi_min + j * dpi(); }
  double cell() const { return dh() * dpi(); }
  int points() const { return n_h * n_pi; }
};

inline constexpr int kMinGridPoints = 8;

PhaseSpaceGrid make_grid(double h_min, double h_max, int n_h, double pi_min, double pi_max,
                         int n_pi);

/// Finite-difference stencil along one axis: derivative_i = sum_k w[k] f[idx[k]].
struct Stencil {
  int idx[4] = {0, 0, 0, 0};
  double w[4] = {0, 0, 0, 0};
  int size = 0;
};

/// Second-order first derivative; one-sided at the two end nodes.
Stencil first_derivative(int i, int n, double step);
/// Second-order second derivative; one-sided four-point stencil at the end nodes.
Stencil second_derivative(int i, int n, double step);

/// Operator-valued phase-space density. The d x d block at node (i, j) is
/// stored column-major at offset ((i * n_pi) + j) * d * d.
class SemiWignerState {
 public:
  using Block = Eigen::Map<CMatrix>;
  using ConstBlock = Eigen::Map<const CMatrix>;

  SemiWignerState() = default;
  SemiWignerState(const PhaseSpaceGrid& grid, int dim);

  const PhaseSpaceGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  std::size_t block_size() const { return static_cast<std::size_t>(dim_) * dim_; }
  std::size_t offset(int i, int j) const {
    return (static_cast<std::size_t>(i) * grid_.n_pi + j) * block_size();
  }

  Block at(int i, int j) { return Block(data_.data() + offset(i, j), dim_, dim_); }
  ConstBlock at(int i, int j) const {
    return ConstBlock(data_.data() + offset(i, j), dim_, dim_);
  }
  QuantumOperator op(int i, int j) const { return QuantumOperator(CMatrix(at(i, j))); }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  /// Sum of Tr W times the cell area.
  double total_trace() const;
  /// Largest max|W - W^dag| over the grid.
  double hermiticity_error() const;
  /// Throws numerical_abort on a non-Hermitian block (1e-10 relative to the
  /// state's peak), a complex trace or a total trace differing from 1 by 1e-8.
  void check_invariants() const;

 private:
  PhaseSpaceGrid grid_;
  int dim_ = 0;
  std::vector<cplx> data_;
};

/// W(h, pi) = G(h, pi) rho_psi with a product Gaussian G renormalized so the
/// grid sum of Tr W is exactly 1.
SemiWignerState init_gaussian_product(const PhaseSpaceGrid& grid, double h0, double pi0,
                                      double sigma_h, double sigma_pi,
                                      const QuantumOperator& rho_psi);

SemiWignerState partial_h(const SemiWignerState& w);
SemiWignerState partial_pi(const SemiWignerState& w);
SemiWignerState partial2_h(const SemiWignerState& w);
SemiWignerState partial2_pi(const SemiWignerState& w);

struct Marginals {
  Eigen::MatrixXd p;  // n_h x n_pi, Tr W
  QuantumOperator rho_psi;
  double mean_h = 0.0, mean_pi = 0.0, var_h = 0.0, var_pi = 0.0;
};

/// Moments of p are normalized by its total mass.
Marginals marginals(const SemiWignerState& w);

inline constexpr int kBoundaryCells = 5;
inline constexpr double kBoundaryTol = 1e-8;

/// Largest |W| entry within kBoundaryCells of any edge, relative to the peak.
double boundary_ratio(const SemiWignerState& w);

/// Writes <prefix>_p.csv (h, pi, p) and <prefix>_state.json (rho_psi and moments).
void write_snapshot(const std::string& prefix, const SemiWignerState& w, double t);

}  // namespace cqh
