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

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "cqhybrid/hilbert.hpp"
#include "cqhybrid/kernels.hpp"

namespace cqh::testing {

inline CMatrix random_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

inline QuantumOperator random_hermitian(int d, std::mt19937_64& rng) {
  const CMatrix m = random_matrix(d, rng);
  return QuantumOperator(0.5 * (m + m.adjoint()));
}

/// Random density matrix: A A^dag normalized to unit trace.
inline QuantumOperator random_density(int d, std::mt19937_64& rng) {
  const CMatrix a = random_matrix(d, rng);
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return QuantumOperator(0.5 * (rho + rho.adjoint()));
}

inline double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Column-stacked Lindblad superoperator of
///   -(i/hbar)[H, rho] + sum_ab D_ab (L_a rho L_b^dag - 1/2 {L_b^dag L_a, rho}).
inline CMatrix lindblad_superoperator(const CMatrix& h, const Eigen::Matrix2cd& d,
                                      const CMatrix& l1, const CMatrix& l2, double hbar) {
  const int n = static_cast<int>(h.rows());
  const CMatrix* ls[2] = {&l1, &l2};
  CMatrix s(n * n, n * n);
  for (int k = 0; k < n * n; ++k) {
    CMatrix e = CMatrix::Zero(n, n);
    e(k % n, k / n) = 1.0;
    CMatrix out = cplx(0, -1 / hbar) * (h * e - e * h);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const CMatrix lbd = ls[b]->adjoint();
        out += d(a, b) * (*ls[a] * e * lbd - 0.5 * (lbd * *ls[a] * e + e * lbd * *ls[a]));
      }
    }
    s.col(k) = Eigen::Map<const CVector>(out.data(), n * n);
  }
  return s;
}

inline CMatrix lindblad_propagate(const CMatrix& super, const CMatrix& rho0, double t) {
  const int n = static_cast<int>(rho0.rows());
  const CMatrix prop = (super * t).exp();
  const CVector v = prop * Eigen::Map<const CVector>(rho0.data(), n * n);
  return Eigen::Map<const CMatrix>(v.data(), n, n);
}

/// Covariance of dx = A x dt + noise with E[dW dW^T] = 2 diag(n_h, n_pi) dt,
/// by Van Loan's block exponential.
inline Eigen::Matrix2d ou_covariance(const Eigen::Matrix2d& a, double n_h, double n_pi,
                                     const Eigen::Matrix2d& sigma0, double t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<2, 2>() = -a * t;
  m.topRightCorner<2, 2>() = Eigen::Vector2d(2 * n_h, 2 * n_pi).asDiagonal().toDenseMatrix() * t;
  m.bottomRightCorner<2, 2>() = a.transpose() * t;
  const Eigen::Matrix4d e = m.exp();
  const Eigen::Matrix2d phi = e.bottomRightCorner<2, 2>().transpose();
  return phi * sigma0 * phi.transpose() + phi * e.topRightCorner<2, 2>();
}

/// Positive-definite delta sequence 2N (2 g_s - g_{sqrt3 s}) with unit-normal
/// Gaussians g. Its zeroth moment is N and its second moment N s^2 / 2 > 0.
inline NonlocalKernel narrow_noise(const LagGrid& grid, KernelPair pair, double n, double s) {
  auto g = [](double tau, double w) {
    return std::exp(-0.5 * tau * tau / (w * w)) / (w * std::sqrt(2 * M_PI));
  };
  NonlocalKernel k = NonlocalKernel::zeros(grid, KernelKind::noise, pair);
  for (int q = 0; q < grid.size(); ++q) {
    const double tau = grid.tau(q);
    k.values[q] = 2 * n * (2 * g(tau, s) - g(tau, std::sqrt(3.0) * s));
  }
  return k;
}

}  // namespace cqh::testing
