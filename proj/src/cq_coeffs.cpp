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

#include "cqhybrid/cq_coeffs.hpp"

#include <algorithm>
#include <cmath>

namespace cqh {
namespace {

bool mixed_equal(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= kMixedSymmetryTol * scale;
}

}  // namespace

void validate(const ModelConfig& model) {
  if (!(model.hbar > 0)) fail(ErrorKind::invalid_argument, "hbar must be positive");
  if (!(model.omega_c >= 0)) fail(ErrorKind::invalid_argument, "omega_c must be non-negative");
  if (!std::isfinite(model.lambda1)) fail(ErrorKind::invalid_argument, "lambda1 must be finite");
  if (model.h_psi.dim() == 0 || model.f2.dim() == 0) {
    fail(ErrorKind::invalid_argument, "model needs H_psi and F2");
  }
  if (model.h_psi.dim() != model.f2.dim()) {
    fail(ErrorKind::dimension_mismatch, "H_psi and F2 differ in dimension");
  }
  require_hermitian(model.h_psi, "H_psi");
  require_hermitian(model.f2, "F2");
}

QuantumOperator CQCoefficients::heff_at(double h, double pi) const {
  return heff_base + cplx(h) * heff_h + cplx(pi) * heff_pi;
}

CQCoefficients assemble(const LocalMoments& m, const ModelConfig& model) {
  validate(model);
  if (!mixed_equal(m.N23, m.N32) || !mixed_equal(m.N23_2, m.N32_2)) {
    fail(ErrorKind::invalid_argument,
         "mixed noise moments must satisfy N23 = N32 and N23_2 = N32_2");
  }
  const double hb = model.hbar;
  CQCoefficients c;
  c.hbar = hb;
  c.lambda1 = model.lambda1;
  c.drift.omega_c2 = model.omega_c * model.omega_c;
  c.drift.damping = m.D33_1 / hb;
  c.drift.restoring = m.D33 / hb;
  c.n33 = m.N33;
  c.n33_2 = m.N33_2;

  c.heff.h_coeff = model.lambda1 - m.D23 / hb;
  c.heff.pi_coeff = -m.D23_1 / hb;
  c.heff.f2_sq = m.D22 / (2.0 * hb);
  c.heff.anti_fr = -m.D22_1 / (4.0 * hb);

  const double pre = 2.0 / (hb * hb);
  Eigen::Matrix2cd d0;
  d0 << pre * m.N22, pre * cplx(0, -m.D22_1 / 4.0),
        pre * cplx(0, m.D22_1 / 4.0), pre * m.N22_2;
  c.d0 = GKSLMatrix(d0);

  c.gamma = model.lambda1 / 2.0 + m.D32 / (2.0 * hb);
  c.nu = 2.0 * m.N23 / hb;
  c.kappa = m.D32_1 / (2.0 * hb);
  c.mu = 2.0 * m.N23_2 / hb;
  c.d_pi << cplx(c.gamma, -c.nu), c.kappa;
  c.d_h << 0.0, cplx(0, c.mu);

  c.h_psi = model.h_psi;
  c.f2 = model.f2;
  c.r2 = heisenberg_rate(model.h_psi, model.f2, hb);
  c.heff_base = c.h_psi + cplx(c.heff.f2_sq) * (c.f2 * c.f2) +
                cplx(c.heff.anti_fr) * anticommutator(c.f2, c.r2);
  c.heff_h = cplx(c.heff.h_coeff) * c.f2;
  c.heff_pi = cplx(c.heff.pi_coeff) * c.f2;
  return c;
}

OppenheimDictionary to_oppenheim(const CQCoefficients& c) {
  OppenheimDictionary d;
  d.d2_00 << c.n33_2, 0.0, 0.0, c.n33;
  d.d1_h = c.d_h;
  d.d1_pi = c.d_pi;
  d.d0 = c.d0;
  d.drift = c.drift;
  return d;
}

}  // namespace cqh
