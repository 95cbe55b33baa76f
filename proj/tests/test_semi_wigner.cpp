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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "cqhybrid/semi_wigner.hpp"
#include "support.hpp"

using namespace cqh;
using cqh::testing::max_abs;

namespace {

QuantumOperator mixed_qubit() {
  CMatrix r(2, 2);
  r << 0.7, cplx(0.1, -0.2), cplx(0.1, 0.2), 0.3;
  return QuantumOperator(r);
}

SemiWignerState fill(const PhaseSpaceGrid& g, const QuantumOperator& op, auto f) {
  SemiWignerState w(g, op.dim());
  for (int i = 0; i < g.n_h; ++i)
    for (int j = 0; j < g.n_pi; ++j) w.at(i, j) = f(g.h(i), g.pi(j)) * op.matrix();
  return w;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(make_grid(-1, 1, 7, -1, 1, 8), Error);
  CHECK_THROWS_AS(make_grid(1, -1, 8, -1, 1, 8), Error);
  const auto g = make_grid(-2, 2, 9, -1, 3, 17);
  CHECK(g.dh() == doctest::Approx(0.5));
  CHECK(g.dpi() == doctest::Approx(0.25));
  CHECK(g.h(8) == doctest::Approx(2.0));
}

TEST_CASE("Gaussian product initialization") {
  const auto g = make_grid(-6, 8, 141, -7, 5, 121);
  const double h0 = 1.0, p0 = -1.0, sh = 0.8, sp = 1.1;
  const auto rho = mixed_qubit();
  const auto w = init_gaussian_product(g, h0, p0, sh, sp, rho);

  CHECK(std::abs(w.total_trace() - 1.0) <= 1e-8);
  const Marginals m = marginals(w);
  CHECK(max_abs(m.rho_psi.matrix() - rho.matrix()) <= 1e-8);
  CHECK(m.rho_psi.trace().real() == doctest::Approx(w.total_trace()).epsilon(1e-14));
  CHECK(m.mean_h == doctest::Approx(h0).epsilon(1e-6));
  CHECK(m.mean_pi == doctest::Approx(p0).epsilon(1e-6));
  CHECK(m.var_h == doctest::Approx(sh * sh).epsilon(1e-6));
  CHECK(m.var_pi == doctest::Approx(sp * sp).epsilon(1e-6));

  // node (70, 60) sits at (h0, pi0)
  REQUIRE(g.h(70) == doctest::Approx(h0));
  REQUIRE(g.pi(60) == doctest::Approx(p0));
  const double peak = 1.0 / (2 * std::numbers::pi * sh * sp);
  CHECK(m.p(70, 60) == doctest::Approx(peak).epsilon(1e-8));
  CHECK(m.p.maxCoeff() == m.p(70, 60));
  CHECK_NOTHROW(w.check_invariants());
  CHECK(w.hermiticity_error() == 0.0);

  CMatrix neg = CMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(init_gaussian_product(g, 0, 0, 1, 1, QuantumOperator(neg)), Error);
  CHECK_THROWS_AS(init_gaussian_product(g, 0, 0, 1, 1, cplx(2.0) * mixed_qubit()), Error);
  CHECK_THROWS_AS(init_gaussian_product(g, 0, 0, 0.0, 1, mixed_qubit()), Error);
}

TEST_CASE("derivatives of constant and affine data") {
  const auto g = make_grid(-2, 3, 11, -1, 1, 9);
  const auto rho = mixed_qubit();
  const auto c = fill(g, rho, [](double, double) { return 2.5; });
  CHECK(max_abs(Eigen::Map<const CMatrix>(partial_h(c).data().data(), 4, g.points())) < 1e-13);
  CHECK(max_abs(Eigen::Map<const CMatrix>(partial_pi(c).data().data(), 4, g.points())) < 1e-13);
  CHECK(max_abs(Eigen::Map<const CMatrix>(partial2_h(c).data().data(), 4, g.points())) < 1e-12);

  const auto lin = fill(g, rho, [](double h, double p) { return 3 * h - 2 * p + 1; });
  const auto dh = partial_h(lin), dp = partial_pi(lin);
  const auto d2h = partial2_h(lin), d2p = partial2_pi(lin);
  for (int i = 0; i < g.n_h; ++i) {
    for (int j = 0; j < g.n_pi; ++j) {
      CHECK(max_abs(dh.at(i, j) - 3.0 * rho.matrix()) < 1e-12);
      CHECK(max_abs(dp.at(i, j) + 2.0 * rho.matrix()) < 1e-12);
      CHECK(max_abs(d2h.at(i, j)) < 1e-11);
      CHECK(max_abs(d2p.at(i, j)) < 1e-10);
    }
  }
}

TEST_CASE("second derivative converges at second order") {
  // Richardson: with e(D) ~ C D^2 the ratio e(D)/e(D/2) tends to 4.
  const auto rho = QuantumOperator::identity(1);
  std::vector<double> errs;
  for (int n : {41, 81, 161}) {
    const auto g = make_grid(-1, 1, 8, -5, 5, n);
    auto f = [](double, double p) { return std::exp(-p * p / 2); };
    const auto d2 = partial2_pi(fill(g, rho, f));
    double e = 0;
    for (int j = 0; j < g.n_pi; ++j) {
      const double p = g.pi(j);
      e = std::max(e, std::abs(d2.at(3, j)(0, 0) - (p * p - 1) * f(0, p)));
    }
    errs.push_back(e);
  }
  CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("derivatives keep Hermiticity and integrate to boundary flux") {
  std::mt19937_64 rng(4);
  const auto g = make_grid(-6, 6, 49, -6, 6, 49);
  const auto rho = testing::random_density(3, rng);
  const auto w = init_gaussian_product(g, 0.5, -0.3, 0.7, 0.6, rho);
  for (const auto& d : {partial_h(w), partial_pi(w), partial2_h(w), partial2_pi(w)}) {
    CHECK(d.hermiticity_error() == 0.0);
  }
  CHECK(std::abs(partial_pi(w).total_trace()) <= 1e-10);
  CHECK(std::abs(partial_h(w).total_trace()) <= 1e-10);
}

TEST_CASE("boundary monitor") {
  const auto g = make_grid(-6, 6, 49, -6, 6, 49);
  const auto rho = QuantumOperator::identity(1);
  CHECK(boundary_ratio(init_gaussian_product(g, 0, 0, 0.5, 0.5, rho)) < kBoundaryTol);
  CHECK(boundary_ratio(init_gaussian_product(g, 0, 0, 2.0, 2.0, rho)) > kBoundaryTol);
}

TEST_CASE("state invariant checks") {
  const auto g = make_grid(-4, 4, 17, -4, 4, 17);
  auto w = init_gaussian_product(g, 0, 0, 1, 1, mixed_qubit());
  auto skew = w;
  skew.at(8, 8)(0, 1) += 0.01;
  CHECK_THROWS_AS(skew.check_invariants(), Error);
  auto heavy = w;
  for (auto& z : heavy.data()) z *= 1.01;
  CHECK_THROWS_AS(heavy.check_invariants(), Error);
}

TEST_CASE("snapshot files") {
  const auto dir = std::filesystem::temp_directory_path() / "cqh_test_snapshot";
  std::filesystem::create_directories(dir);
  const auto g = make_grid(-4, 4, 9, -4, 4, 9);
  const auto w = init_gaussian_product(g, 0, 0, 1, 1, mixed_qubit());
  const std::string prefix = (dir / "snap").string();
  write_snapshot(prefix, w, 0.5);
  std::ifstream p(prefix + "_p.csv");
  std::string header;
  std::getline(p, header);
  CHECK(header == "h,pi,p");
  int rows = 0;
  for (std::string line; std::getline(p, line);) rows += !line.empty();
  CHECK(rows == g.points());
  CHECK(std::filesystem::exists(prefix + "_state.json"));
}
