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

#include "cqhybrid/hilbert.hpp"

#include <string>

namespace cqh {
namespace {

void require_same_dim(const QuantumOperator& a, const QuantumOperator& b) {
  if (a.dim() != b.dim()) {
    fail(ErrorKind::dimension_mismatch,
         "operator dimensions differ: " + std::to_string(a.dim()) + " vs " +
             std::to_string(b.dim()));
  }
}

}  // namespace

QuantumOperator::QuantumOperator(CMatrix entries) : m_(std::move(entries)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols()) {
    fail(ErrorKind::dimension_mismatch, "quantum operator must be square with dim >= 1");
  }
  if (!m_.allFinite()) fail(ErrorKind::invalid_argument, "quantum operator has non-finite entries");
}

QuantumOperator QuantumOperator::identity(int dim) {
  return QuantumOperator(CMatrix::Identity(dim, dim));
}

QuantumOperator QuantumOperator::zero(int dim) {
  return QuantumOperator(CMatrix::Zero(dim, dim));
}

double QuantumOperator::hermiticity_error() const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double QuantumOperator::max_abs() const { return m_.cwiseAbs().maxCoeff(); }

bool QuantumOperator::is_hermitian(double rel_tol) const {
  return hermiticity_error() <= rel_tol * max_abs();
}

QuantumOperator& QuantumOperator::operator+=(const QuantumOperator& o) {
  require_same_dim(*this, o);
  m_ += o.m_;
  return *this;
}

QuantumOperator& QuantumOperator::operator-=(const QuantumOperator& o) {
  require_same_dim(*this, o);
  m_ -= o.m_;
  return *this;
}

QuantumOperator& QuantumOperator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

QuantumOperator operator*(const QuantumOperator& a, const QuantumOperator& b) {
  require_same_dim(a, b);
  return QuantumOperator(a.matrix() * b.matrix());
}

QuantumOperator pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return QuantumOperator(m);
}

QuantumOperator pauli_y() {
  CMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return QuantumOperator(m);
}

QuantumOperator pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return QuantumOperator(m);
}

void require_hermitian(const QuantumOperator& a, const char* what) {
  if (!a.is_hermitian()) {
    fail(ErrorKind::not_hermitian, std::string(what) + " is not Hermitian (max|A-A^dag| = " +
                                       std::to_string(a.hermiticity_error()) + ")");
  }
}

GKSLMatrix::GKSLMatrix(const Eigen::Matrix2cd& entries) : m_(entries) {
  if (!m_.allFinite()) fail(ErrorKind::invalid_argument, "GKSL matrix has non-finite entries");
  const double scale = m_.cwiseAbs().maxCoeff();
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * scale) {
    fail(ErrorKind::not_hermitian, "GKSL matrix is not Hermitian");
  }
}

QuantumOperator commutator(const QuantumOperator& a, const QuantumOperator& b) {
  require_same_dim(a, b);
  return QuantumOperator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

QuantumOperator anticommutator(const QuantumOperator& a, const QuantumOperator& b) {
  require_same_dim(a, b);
  return QuantumOperator(a.matrix() * b.matrix() + b.matrix() * a.matrix());
}

QuantumOperator heisenberg_rate(const QuantumOperator& h, const QuantumOperator& f,
                                double hbar) {
  if (!(hbar > 0)) fail(ErrorKind::invalid_argument, "hbar must be positive");
  require_hermitian(h, "Hamiltonian");
  require_hermitian(f, "coupling operator");
  return cplx(0, 1.0 / hbar) * commutator(h, f);
}

QuantumOperator gksl_apply(const GKSLMatrix& d0, const LindbladPair& l,
                           const QuantumOperator& w) {
  require_same_dim(l.first, w);
  require_same_dim(l.second, w);
  const CMatrix* ls[2] = {&l.first.matrix(), &l.second.matrix()};
  const CMatrix& rho = w.matrix();
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const cplx c = d0(a, b);
      if (c == cplx(0)) continue;
      const CMatrix lb_dag = ls[b]->adjoint();
      const CMatrix prod = lb_dag * (*ls[a]);
      out += c * ((*ls[a]) * rho * lb_dag - 0.5 * (prod * rho + rho * prod));
    }
  }
  return QuantumOperator(out);
}

std::pair<double, CVector> min_eigenpair(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  if (es.info() != Eigen::Success) fail(ErrorKind::numerical_abort, "eigen-solver failed");
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

double min_eigenvalue(const QuantumOperator& a) {
  require_hermitian(a, "operator passed to min_eigenvalue");
  return min_eigenpair(a.matrix()).first;
}

}  // namespace cqh
