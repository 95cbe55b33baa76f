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

#include "cqhybrid/positivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace cqh {
namespace {

constexpr double kRankTol = 1e-12;
constexpr double kNonMarkovRankTol = 1e-10;
constexpr double kKernelHermitianTol = 1e-8;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double max_abs(const CMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

// Generalized inverse square root of a Hermitian PSD matrix on its support.
struct Whitener {
  CMatrix root;     // n x r, columns u_k / sqrt(lambda_k)
  CMatrix support;  // n x r, orthonormal
  int rank = 0;

  CMatrix pinv() const { return root * root.adjoint(); }
  CMatrix off_support(const CMatrix& x) const {
    return x - support * (support.adjoint() * x);
  }
};

Whitener whiten(const CMatrix& a, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  const auto& lam = es.eigenvalues();
  const double top = lam.cwiseAbs().maxCoeff();
  Whitener w;
  std::vector<int> keep;
  for (int k = 0; k < lam.size(); ++k) {
    if (top > 0 && lam(k) > rel_tol * top) keep.push_back(k);
  }
  w.rank = static_cast<int>(keep.size());
  w.root.resize(a.rows(), w.rank);
  w.support.resize(a.rows(), w.rank);
  for (int c = 0; c < w.rank; ++c) {
    w.support.col(c) = es.eigenvectors().col(keep[c]);
    w.root.col(c) = es.eigenvectors().col(keep[c]) / std::sqrt(lam(keep[c]));
  }
  return w;
}

double whitened_min(const Whitener& w, const CMatrix& m) {
  if (w.rank == 0) return 1.0;
  const CMatrix t = w.root.adjoint() * m * w.root;
  const CMatrix h = 0.5 * (t + t.adjoint());
  return Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

void fill_spectrum(CertReport& r, const CMatrix& m) {
  const CMatrix h = 0.5 * (m + m.adjoint());
  auto [lo, vec] = min_eigenpair(h);
  r.min_eigenvalue = lo;
  r.witness = vec;
  r.pass = lo >= -kPsdTol * r.scale;
}

double column_norm(const Eigen::Vector2cd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

LocalKernel build_CM(const CQCoefficients& c) {
  if (c.n33 < 0 || c.n33_2 < 0) {
    fail(ErrorKind::invalid_argument, "diffusion constants must be non-negative");
  }
  LocalKernel out;
  const struct {
    const Eigen::Vector2cd& d;
    double n;
    const char* name;
  } dirs[] = {{c.d_h, c.n33_2, "h"}, {c.d_pi, c.n33, "pi"}};
  for (const auto& dir : dirs) {
    if (column_norm(dir.d) == 0.0) continue;
    if (dir.n == 0.0) {
      out.supported = false;
      out.reason = std::string("unsupported direction: ") + dir.name +
                   " has a hybrid coupling but no diffusion";
      continue;
    }
    out.subtraction += dir.d * dir.d.adjoint() / (2.0 * dir.n);
  }
  out.cm = c.d0.matrix() - out.subtraction;
  return out;
}

MarkovCpReport check_markov_cp(const CQCoefficients& c) {
  MarkovCpReport rep;
  CertReport& cl = rep.classical;
  cl.condition_name = "classical_diffusion";
  cl.scale = std::max(std::abs(c.n33), std::abs(c.n33_2));
  cl.min_eigenvalue = std::min(c.n33_2, c.n33);
  cl.witness = CVector::Zero(2);
  cl.witness(c.n33_2 <= c.n33 ? 0 : 1) = 1.0;
  cl.pass = cl.min_eigenvalue >= 0.0;
  cl.margin = cl.scale > 0 ? cl.min_eigenvalue / cl.scale : 0.0;
  if (!cl.pass) cl.reason = "negative classical diffusion";

  CertReport& cm = rep.cm;
  cm.condition_name = "markov_C_M";
  if (!cl.pass) {
    cm.pass = false;
    cm.margin = kNegInf;
    cm.reason = "C_M undefined with negative diffusion";
    return rep;
  }
  const LocalKernel lk = build_CM(c);
  cm.scale = std::max(max_abs(c.d0.matrix()), max_abs(lk.subtraction));
  fill_spectrum(cm, lk.cm);
  if (!lk.supported) {
    cm.pass = false;
    cm.reason = lk.reason;
    cm.margin = kNegInf;
    return rep;
  }

  const Whitener w0 = whiten(c.d0.matrix(), kRankTol);
  for (const Eigen::Vector2cd* d : {&c.d_h, &c.d_pi}) {
    const double n = column_norm(*d);
    if (n > 0 && max_abs(w0.off_support(*d)) > kSupportTol * n) {
      cm.margin = kNegInf;
      cm.reason = "hybrid vector outside the support of D0";
      return rep;
    }
  }
  cm.margin = whitened_min(w0, lk.cm);
  return rep;
}

Eigen::Matrix2cd d1_matrix(const OppenheimDictionary& dict) {
  Eigen::Matrix2cd d1;
  d1.row(0) = dict.d1_h.adjoint();
  d1.row(1) = dict.d1_pi.adjoint();
  return d1;
}

CertReport check_tradeoff(const OppenheimDictionary& dict) {
  const CMatrix d0 = dict.d0.matrix();
  const double d0_min =
      Eigen::SelfAdjointEigenSolver<CMatrix>(d0, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (d0_min < -kPsdTol * std::max(max_abs(d0), 1e-300)) {
    fail(ErrorKind::invalid_argument, "invalid GKSL block: D0 has a negative eigenvalue");
  }
  CertReport r;
  r.condition_name = "tradeoff";
  const CMatrix d1 = d1_matrix(dict);
  const CMatrix two_d2 = (2.0 * dict.d2_00).cast<cplx>();
  const Whitener w0 = whiten(d0, kRankTol);
  const CMatrix schur = d1 * w0.pinv() * d1.adjoint();
  const CMatrix t = two_d2 - schur;
  r.scale = std::max(max_abs(two_d2), max_abs(schur));
  fill_spectrum(r, t);

  const double d1_norm = max_abs(d1);
  if (d1_norm > 0 && max_abs(w0.off_support(d1.adjoint())) > kSupportTol * d1_norm) {
    r.pass = false;
    r.margin = kNegInf;
    r.reason = "support condition violated: D1 has components outside the support of D0";
    return r;
  }
  const Whitener w2 = whiten(two_d2, kRankTol);
  if (d1_norm > 0 && max_abs(w2.off_support(d1)) > kSupportTol * d1_norm) {
    r.margin = kNegInf;
    r.reason = "hybrid coupling along a direction without diffusion";
    return r;
  }
  r.margin = whitened_min(w2, t);
  return r;
}

CertReport check_nonmarkov_kernel(const NonMarkovKernels& k, double lambda1, double hbar,
                                  int n_t, int stride) {
  if (!(hbar > 0)) fail(ErrorKind::invalid_argument, "hbar must be positive");
  const LagGrid& g = k.n22.grid;
  for (const NonlocalKernel* kk : {&k.n22, &k.d22, &k.n32, &k.d32, &k.n33r}) {
    if (kk->grid.half != g.half || std::abs(kk->grid.step - g.step) > 1e-12 * g.step ||
        static_cast<int>(kk->values.size()) != g.size()) {
      fail(ErrorKind::dimension_mismatch, "non-Markovian kernels must share one lag grid");
    }
  }
  if (stride < 1) fail(ErrorKind::invalid_argument, "stride must be positive");
  const int reach = (n_t - 1) * stride + stride / 2;
  if (n_t < 1 || reach > g.half) {
    fail(ErrorKind::invalid_argument, "time grid longer than the kernels' lag window");
  }
  if (k.n23) {
    const auto& a = k.n23->values;
    if (static_cast<int>(a.size()) != g.size()) {
      fail(ErrorKind::dimension_mismatch, "N23 is sampled on a different lag grid");
    }
    double err = 0.0, peak = 1e-300;
    for (int q = 0; q < g.size(); ++q) {
      err = std::max(err, std::abs(a[q] - k.n32.values[g.size() - 1 - q]));
      peak = std::max(peak, std::abs(a[q]));
    }
    if (err > 1e-10 * peak) {
      fail(ErrorKind::invalid_argument, "N23(tau) must equal N32(-tau)");
    }
  }

  // Odd strides use one full weight per sample, even strides a trapezoid
  // with half weights at both cell edges; the weights always sum to stride.
  std::vector<double> cell;
  for (int q = -(stride / 2); q <= stride / 2; ++q) {
    const bool edge = stride % 2 == 0 && std::abs(q) == stride / 2;
    cell.push_back(edge ? 0.5 * g.step : g.step);
  }
  auto matrix = [&](const NonlocalKernel& kern) {
    Eigen::MatrixXd m(n_t, n_t);
    for (int i = 0; i < n_t; ++i) {
      for (int j = 0; j < n_t; ++j) {
        const int centre = g.zero_index() + (i - j) * stride;
        double acc = 0.0;
        for (int q = 0; q < static_cast<int>(cell.size()); ++q) {
          acc += kern.values[centre - q + stride / 2] * cell[q];
        }
        m(i, j) = acc;
      }
    }
    return m;
  };
  const Eigen::MatrixXd n22 = matrix(k.n22);
  const Eigen::MatrixXd d22 = matrix(k.d22);
  const Eigen::MatrixXd n32 = matrix(k.n32);
  const Eigen::MatrixXd d32 = matrix(k.d32);
  const Eigen::MatrixXd n33 = matrix(k.n33r);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(n33, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (int q = 0; q < sv.size(); ++q) {
    if (sv(0) > 0 && sv(q) > kNonMarkovRankTol * sv(0)) inv(q) = 1.0 / sv(q);
  }
  const Eigen::MatrixXd q = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();

  const Eigen::MatrixXd l =
      lambda1 * Eigen::MatrixXd::Identity(n_t, n_t) - d32 / (2.0 * hbar);
  const cplx i_hbar(0.0, 1.0 / hbar);
  const CMatrix b_plus = 0.5 * l.cast<cplx>() - i_hbar * n32.cast<cplx>();
  const CMatrix b_minus = 0.5 * l.cast<cplx>() + i_hbar * n32.cast<cplx>();
  const Eigen::MatrixXd d22a = 0.5 * (d22 - d22.transpose());
  const CMatrix noise = n22.cast<cplx>() / (hbar * hbar);
  const CMatrix diss = cplx(0.0, -0.5 / (hbar * hbar)) * d22a.cast<cplx>();
  const CMatrix hybrid = b_plus.transpose() * q.cast<cplx>() * b_minus;
  const CMatrix c = noise + diss - hybrid;

  CertReport r;
  r.condition_name = "nonmarkov_C";
  r.scale = std::max({max_abs(noise), max_abs(diss), max_abs(hybrid)});
  const double herm = max_abs(c - c.adjoint());
  if (herm > kKernelHermitianTol * std::max(r.scale, 1e-300)) {
    fail(ErrorKind::invalid_argument, "assembled kernel C is not Hermitian; inputs are inconsistent");
  }
  fill_spectrum(r, c);
  r.margin = r.scale > 0 ? r.min_eigenvalue / r.scale : 0.0;

  const Eigen::MatrixXd n33s = 0.5 * (n33 + n33.transpose());
  const double n33_min =
      n_t ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(n33s, Eigen::EigenvaluesOnly)
                .eigenvalues()(0)
          : 0.0;
  const double n33_scale = n33.cwiseAbs().maxCoeff();
  if (n33_min < -kPsdTol * n33_scale) {
    r.pass = false;
    r.reason = "N33R is not positive semidefinite";
  }
  return r;
}

}  // namespace cqh
