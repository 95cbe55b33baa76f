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

#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "cqhybrid/error.hpp"

namespace cqh {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-12;

/// Dense operator on the finite quantum Hilbert space. Entries are always
/// finite; Hermiticity is checked on demand, never imposed silently.
class QuantumOperator {
 public:
  QuantumOperator() = default;
  explicit QuantumOperator(CMatrix entries);

  static QuantumOperator identity(int dim);
  static QuantumOperator zero(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }

  /// max|A - A^dagger|
  double hermiticity_error() const;
  /// True when max|A - A^dagger| <= rel_tol * max|A|.
  bool is_hermitian(double rel_tol = kHermitianTol) const;
  double max_abs() const;

  cplx trace() const { return m_.trace(); }
  QuantumOperator adjoint() const { return QuantumOperator(m_.adjoint()); }

  QuantumOperator& operator+=(const QuantumOperator& o);
  QuantumOperator& operator-=(const QuantumOperator& o);
  QuantumOperator& operator*=(cplx s);

  friend QuantumOperator operator+(QuantumOperator a, const QuantumOperator& b) { return a += b; }
  friend QuantumOperator operator-(QuantumOperator a, const QuantumOperator& b) { return a -= b; }
  friend QuantumOperator operator*(cplx s, QuantumOperator a) { return a *= s; }
  friend QuantumOperator operator*(QuantumOperator a, cplx s) { return a *= s; }
  friend QuantumOperator operator*(const QuantumOperator& a, const QuantumOperator& b);

 private:
  CMatrix m_;
};

QuantumOperator pauli_x();
QuantumOperator pauli_y();
QuantumOperator pauli_z();

/// Throws ErrorKind::not_hermitian naming `what` if `a` fails the check.
void require_hermitian(const QuantumOperator& a, const char* what);

/// GKSL coefficient matrix over the local basis (L1, L2) = (F2, R2).
class GKSLMatrix {
 public:
  GKSLMatrix() : m_(Eigen::Matrix2cd::Zero()) {}
  explicit GKSLMatrix(const Eigen::Matrix2cd& entries);

  const Eigen::Matrix2cd& matrix() const { return m_; }
  cplx operator()(int a, int b) const { return m_(a, b); }

 private:
  Eigen::Matrix2cd m_;
};

struct LindbladPair {
  QuantumOperator first;   // F2
  QuantumOperator second;  // R2
};

QuantumOperator commutator(const QuantumOperator& a, const QuantumOperator& b);
QuantumOperator anticommutator(const QuantumOperator& a, const QuantumOperator& b);

/// (i/hbar)[H, F]: the Heisenberg rate of F under H.
QuantumOperator heisenberg_rate(const QuantumOperator& h, const QuantumOperator& f,
                                double hbar);

/// sum_ab D_ab (L_a W L_b^dag - 1/2 {L_b^dag L_a, W})
QuantumOperator gksl_apply(const GKSLMatrix& d0, const LindbladPair& l,
                           const QuantumOperator& w);

/// Smallest eigenvalue of a Hermitian operator.
double min_eigenvalue(const QuantumOperator& a);

/// Smallest eigenvalue and its eigenvector.
std::pair<double, CVector> min_eigenpair(const CMatrix& hermitian);

}  // namespace cqh
