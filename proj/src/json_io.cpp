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

#include "cqhybrid/json_io.hpp"

#include <cmath>
#include <utility>

namespace cqh {
namespace {

using nlohmann::json;

json complex_pair(cplx z) { return json::array({z.real(), z.imag()}); }

json vec_json(const Eigen::Vector2cd& v) { return json::array({complex_pair(v(0)), complex_pair(v(1))}); }

// JSON has no infinities; unbounded margins are written as null.
json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct MomentField {
  const char* key;
  double LocalMoments::*ptr;
};

constexpr MomentField kMomentFields[] = {
    {"N22", &LocalMoments::N22},     {"N33", &LocalMoments::N33},
    {"N23", &LocalMoments::N23},     {"N32", &LocalMoments::N32},
    {"N22_2", &LocalMoments::N22_2}, {"N33_2", &LocalMoments::N33_2},
    {"N23_2", &LocalMoments::N23_2}, {"N32_2", &LocalMoments::N32_2},
    {"D22", &LocalMoments::D22},     {"D33", &LocalMoments::D33},
    {"D23", &LocalMoments::D23},     {"D32", &LocalMoments::D32},
    {"D22_1", &LocalMoments::D22_1}, {"D33_1", &LocalMoments::D33_1},
    {"D23_1", &LocalMoments::D23_1}, {"D32_1", &LocalMoments::D32_1},
};

}  // namespace

json to_json(const CMatrix& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out.push_back(complex_pair(m(r, c)));
  }
  return out;
}

json to_json(const QuantumOperator& op) { return to_json(op.matrix()); }

QuantumOperator operator_from_json(const json& js) {
  if (!js.is_array() || js.empty()) fail(ErrorKind::io, "operator must be a non-empty array");
  const auto n = js.size();
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (static_cast<std::size_t>(d) * d != n) {
    fail(ErrorKind::dimension_mismatch, "operator array length is not a perfect square");
  }
  CMatrix m(d, d);
  for (std::size_t k = 0; k < n; ++k) {
    const json& e = js[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      fail(ErrorKind::io, "operator entries must be [re, im] pairs");
    }
    m(k / d, k % d) = cplx(e[0].get<double>(), e[1].get<double>());
  }
  return QuantumOperator(std::move(m));
}

json to_json(const LocalMoments& m) {
  json out = json::object();
  for (const auto& f : kMomentFields) out[f.key] = m.*(f.ptr);
  return out;
}

LocalMoments moments_from_json(const json& js) {
  if (!js.is_object()) fail(ErrorKind::io, "moments must be a JSON object");
  LocalMoments m;
  for (const auto& [key, value] : js.items()) {
    bool known = false;
    for (const auto& f : kMomentFields) {
      if (key == f.key) {
        if (!value.is_number()) fail(ErrorKind::io, "moment " + key + " is not a number");
        m.*(f.ptr) = value.get<double>();
        known = true;
      }
    }
    if (!known) fail(ErrorKind::io, "unknown moment key " + key);
  }
  return m;
}

json to_json(const CQCoefficients& c) {
  json out;
  out["hbar"] = c.hbar;
  out["lambda1"] = c.lambda1;
  out["drift"] = {{"omega_c2", c.drift.omega_c2},
                  {"damping", c.drift.damping},
                  {"restoring", c.drift.restoring}};
  out["diffusion"] = {{"N33", c.n33}, {"N33_2", c.n33_2}};
  out["heff_couplings"] = {{"h", c.heff.h_coeff},
                           {"pi", c.heff.pi_coeff},
                           {"F2^2", c.heff.f2_sq},
                           {"{F2,R2}", c.heff.anti_fr}};
  out["D0"] = to_json(CMatrix(c.d0.matrix()));
  out["gamma"] = c.gamma;
  out["nu"] = c.nu;
  out["kappa"] = c.kappa;
  out["mu"] = c.mu;
  out["d_pi"] = vec_json(c.d_pi);
  out["d_h"] = vec_json(c.d_h);
  out["H_psi"] = to_json(c.h_psi);
  out["F2"] = to_json(c.f2);
  out["R2"] = to_json(c.r2);
  return out;
}

json to_json(const OppenheimDictionary& d) {
  json out;
  out["D2_00"] = {{d.d2_00(0, 0), d.d2_00(0, 1)}, {d.d2_00(1, 0), d.d2_00(1, 1)}};
  out["D1_h"] = vec_json(d.d1_h);
  out["D1_pi"] = vec_json(d.d1_pi);
  out["D0"] = to_json(CMatrix(d.d0.matrix()));
  out["D1_00"] = {{"h", "pi"},
                  {"pi", {{"omega_c2", d.drift.omega_c2},
                          {"damping", d.drift.damping},
                          {"restoring", d.drift.restoring}}}};
  return out;
}

json to_json(const CertReport& r) {
  json out;
  out["condition"] = r.condition_name;
  out["verdict"] = r.pass ? "pass" : "fail";
  out["min_eigenvalue"] = r.min_eigenvalue;
  json w = json::array();
  for (int k = 0; k < r.witness.size(); ++k) w.push_back(complex_pair(r.witness(k)));
  out["witness"] = w;
  out["scale"] = r.scale;
  out["margin"] = number_or_null(r.margin);
  if (!r.reason.empty()) out["reason"] = r.reason;
  return out;
}

json to_json(const FdrReport& r) {
  json out;
  json rows = json::array();
  for (const auto& e : r.entries) {
    const char* status = e.status == FdrStatus::pass   ? "pass"
                         : e.status == FdrStatus::fail ? "fail"
                                                       : "not_applicable";
    json row = {{"pair", pair_label(e.pair)}, {"status", status}};
    row["ratio"] = e.status == FdrStatus::not_applicable ? json(nullptr) : json(e.ratio);
    rows.push_back(row);
  }
  out["entries"] = rows;
  out["pass"] = r.pass();
  out["tolerance"] = kFdrTolerance;
  return out;
}

}  // namespace cqh
