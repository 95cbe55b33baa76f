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
#include <numbers>
#include <random>

#include "cqhybrid/error.hpp"
#include "cqhybrid/kernels.hpp"

using namespace cqh;
using std::numbers::pi;

namespace {

double gauss(double t, double s) {
  return std::exp(-t * t / (2 * s * s)) / (s * std::sqrt(2 * pi));
}

NonlocalKernel sampled(const LagGrid& g, KernelKind kind, auto f) {
  NonlocalKernel k = NonlocalKernel::zeros(g, kind, KernelPair::p22);
  for (int i = 0; i < g.size(); ++i) k.values[i] = f(g.tau(i));
  return k;
}

// Delta-sequence kernels built from the equal-time expansion
//   noise:        2N g - 2N2 g''
//   dissipation:  2D (2 theta g) + 2D1 g'
NonlocalKernel noise_delta(double n, double n2, double s, double step) {
  return sampled(make_lag_grid(14 * s, step), KernelKind::noise, [&](double t) {
    const double g2 = (t * t / (s * s) - 1) / (s * s) * gauss(t, s);
    return 2 * n * gauss(t, s) - 2 * n2 * g2;
  });
}

NonlocalKernel diss_delta(double d, double d1, double s, double step) {
  return sampled(make_lag_grid(14 * s, step), KernelKind::dissipation, [&](double t) {
    const double theta = t > 0 ? 1.0 : (t == 0 ? 0.5 : 0.0);
    return 2 * d * 2 * theta * gauss(t, s) + 2 * d1 * (-t / (s * s)) * gauss(t, s);
  });
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("lag grid") {
  const LagGrid g = make_lag_grid(1.0, 0.3);
  CHECK(g.half == 4);
  CHECK(g.size() == 9);
  CHECK(g.tau(0) == doctest::Approx(-1.2));
  CHECK(g.tau(g.zero_index()) == 0.0);
  CHECK_THROWS_AS(make_lag_grid(0.0, 0.1), Error);
}

TEST_CASE("thermal mode correlator") {
  EnvironmentParams p;
  p.omega = 1.7;
  p.temperature = 0.4;
  p.hbar = 0.9;
  const auto c = make_correlator(p);
  CHECK(c.grid.step == doctest::Approx(0.01 / 1.7));
  CHECK(c.grid.half * c.grid.step >= 50 / 1.7 - 1e-12);
  CHECK(feynman_symmetry_error(c) <= 1e-10);

  const double coth = 1 / std::tanh(p.hbar * p.omega / (2 * p.temperature));
  for (int k : {0, 17, c.grid.zero_index(), c.grid.size() - 5}) {
    const double t = c.grid.tau(k);
    const cplx expect = p.hbar / (2 * p.omega) *
                        cplx(coth * std::cos(p.omega * t), -std::sin(p.omega * std::abs(t)));
    CHECK(std::abs(c.feynman[k] - expect) < 1e-14);
  }
  // G(-tau) = G(tau)* would force Im G odd; the time-ordered function has Im G even.
  CHECK(std::abs(c.feynman[c.grid.zero_index() + 10].imag() -
                 c.feynman[c.grid.zero_index() - 10].imag()) < 1e-15);

  p.temperature = -1;
  CHECK_THROWS_AS(make_correlator(p), Error);
}

TEST_CASE("ohmic correlator against closed forms") {
  EnvironmentParams p;
  p.kind = CorrelatorKind::ohmic;
  p.omega = 1.3;  // cutoff
  p.eta = 0.8;
  p.hbar = 1.0;
  p.temperature = 1e-4;
  p.window = 6.0;
  p.step = 0.05;
  const auto c = make_correlator(p);
  const double a = 1 / p.omega;
  for (int k = c.grid.zero_index(); k < c.grid.size(); k += 7) {
    const double t = c.grid.tau(k);
    const double d = a * a + t * t;
    // J(w) = eta w exp(-w a); at T -> 0 coth -> 1
    CHECK(c.feynman[k].real() == doctest::Approx(p.eta * (a * a - t * t) / (d * d)).epsilon(1e-6));
    CHECK(c.feynman[k].imag() ==
          doctest::Approx(-p.eta * 2 * a * t / (d * d)).epsilon(1e-6).scale(1e-6));
  }
}

TEST_CASE("cubic kernels") {
  EnvironmentParams p;
  p.omega = 2.0;
  p.temperature = 0.5;
  p.linewidth = 0.3;
  const auto c = make_correlator(p);

  const auto none = build_cubic_kernels(c, 0.0, 1.0);
  CHECK(none.noise_psi.peak() == 0.0);
  CHECK(none.diss_psi.peak() == 0.0);

  const double l2 = 0.6, l3 = 1.4;
  const auto k = build_cubic_kernels(c, l2, l3);
  const int z = c.grid.zero_index();
  const double coth = 1 / std::tanh(p.hbar * p.omega / (2 * p.temperature));
  CHECK(k.noise_psi.values[z] == doctest::Approx(4 * l2 * l2 * coth / (2 * p.omega)));
  for (int i = 0; i < c.grid.size(); i += 13) {
    const cplx g = c.feynman[i];
    const double re2 = g.real() * g.real() - g.imag() * g.imag();
    CHECK(k.noise_h.values[i] == doctest::Approx(8 * l3 * l3 * re2).scale(1e-12));
  }
  CHECK(k.noise_mixed.peak() == 0.0);
  CHECK(k.diss_mixed.peak() == 0.0);

  SUBCASE("noise kernels are even, dissipation kernels retarded") {
    for (int i = 0; i < z; ++i) {
      const int m = c.grid.size() - 1 - i;
      CHECK(std::abs(k.noise_psi.values[i] - k.noise_psi.values[m]) <= 1e-10);
      CHECK(std::abs(k.noise_h.values[i] - k.noise_h.values[m]) <= 1e-10);
      CHECK(k.diss_psi.values[i] == 0.0);
      CHECK(k.diss_h.values[i] == 0.0);
    }
    CHECK(k.diss_psi.values[z] == 0.5 * 4 * l2 * l2 * c.feynman[z].imag());
  }

  SUBCASE("rejects a correlator that is not even") {
    auto bad = c;
    bad.feynman[3] += cplx(0, 1e-3);
    CHECK_THROWS_AS(build_cubic_kernels(bad, l2, l3), Error);
  }
}

TEST_CASE("Gaussian kernel moments") {
  const double a = 1.7, s = 0.3;
  const LagGrid g = make_lag_grid(12 * s, s / 40);
  const auto m = extract_moments(sampled(g, KernelKind::noise, [&](double t) {
    return a * std::exp(-t * t / (2 * s * s));
  }));
  CHECK(m.zeroth == doctest::Approx(a * s * std::sqrt(2 * pi) / 2).epsilon(1e-6));
  CHECK(m.higher == doctest::Approx(-a * s * s * s * std::sqrt(2 * pi) / 4).epsilon(1e-6));
  CHECK(m.decayed);

  const double t0 = 10 * s;
  const LagGrid gd = make_lag_grid(24 * s, s / 40);
  const auto d = extract_moments(sampled(gd, KernelKind::dissipation, [&](double t) {
    return a * std::exp(-(t - t0) * (t - t0) / (2 * s * s));
  }));
  CHECK(d.zeroth == doctest::Approx(a * s * std::sqrt(2 * pi) / 2).epsilon(1e-6));
  CHECK(d.higher == doctest::Approx(-0.5 * a * s * std::sqrt(2 * pi) * t0).epsilon(1e-6));

  const auto zero = extract_moments(NonlocalKernel::zeros(g, KernelKind::noise, KernelPair::p33));
  CHECK(zero.zeroth == 0.0);
  CHECK(zero.higher == 0.0);

  NonlocalKernel empty;
  CHECK_THROWS_AS(extract_moments(empty), Error);

  auto truncated = sampled(make_lag_grid(2 * s, s / 40), KernelKind::noise,
                           [&](double t) { return std::exp(-t * t / (2 * s * s)); });
  CHECK_FALSE(extract_moments(truncated).decayed);
}

TEST_CASE("delta-sequence oracle fixes the moment signs") {
  const double n = 0.7, n2 = 0.15, d = 0.4, d1 = -0.25;
  std::vector<double> widths = {0.2, 0.1, 0.05, 0.025}, err_n2, err_d1;
  for (double s : widths) {
    const auto mn = extract_moments(noise_delta(n, n2, s, s / 50));
    CHECK(mn.zeroth == doctest::Approx(n).epsilon(1e-9));
    err_n2.push_back(std::abs(mn.higher - n2));
    // predicted: N2 + N s^2 / 2 with the sign of the expansion as written
    CHECK(mn.higher == doctest::Approx(n2 - n * s * s / 2).epsilon(1e-8));

    const auto md = extract_moments(diss_delta(d, d1, s, s / 50));
    CHECK(md.zeroth == doctest::Approx(d).epsilon(1e-9));
    err_d1.push_back(std::abs(md.higher - d1));
  }
  CHECK(slope(widths, err_n2) == doctest::Approx(2.0).epsilon(0.01));
  CHECK(slope(widths, err_d1) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("moment extraction is linear") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  const LagGrid g = make_lag_grid(5.0, 0.01);
  for (int rep = 0; rep < 20; ++rep) {
    const double a = nd(rng), b = nd(rng), s1 = 0.3 + std::abs(nd(rng)) * 0.2,
                 s2 = 0.2 + std::abs(nd(rng)) * 0.2;
    auto f = sampled(g, KernelKind::noise, [&](double t) { return gauss(t, s1); });
    auto h = sampled(g, KernelKind::noise, [&](double t) { return t * t * gauss(t, s2); });
    auto sum = f;
    for (int i = 0; i < g.size(); ++i) sum.values[i] = a * f.values[i] + b * h.values[i];
    const auto mf = extract_moments(f), mh = extract_moments(h), ms = extract_moments(sum);
    CHECK(ms.zeroth == doctest::Approx(a * mf.zeroth + b * mh.zeroth).scale(1.0));
    CHECK(ms.higher == doctest::Approx(a * mf.higher + b * mh.higher).scale(1.0));
  }
}

TEST_CASE("odd moment of an even noise kernel vanishes") {
  const LagGrid g = make_lag_grid(6.0, 0.01);
  auto k = sampled(g, KernelKind::noise, [](double t) { return std::cos(3 * t) * gauss(t, 0.7); });
  double s = 0;
  for (int i = 0; i < g.size(); ++i) s += g.tau(i) * k.values[i];
  CHECK(std::abs(-0.5 * s * g.step) < 1e-14);
  k.kind = KernelKind::dissipation;
  CHECK(std::abs(extract_moments(k).higher) < 1e-14);
}

TEST_CASE("fdr_check") {
  LocalMoments m;
  const double T = 0.8, hbar = 1.1;
  m.D22_1 = 0.3;
  m.N22 = 4 * T * m.D22_1 / hbar;
  m.N33 = 0.2;  // D33_1 = 0: not applicable
  auto rep = fdr_check(m, T, hbar);
  CHECK(rep.entries[0].ratio == doctest::Approx(1.0));
  CHECK(rep.entries[0].status == FdrStatus::pass);
  CHECK(rep.entries[1].status == FdrStatus::not_applicable);
  CHECK(rep.pass());

  m.N22 *= 1.06;
  CHECK_FALSE(fdr_check(m, T, hbar).pass());
  CHECK_THROWS_AS(fdr_check(m, 0.0, hbar), Error);
}

TEST_CASE("kernel CSV round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "cqh_test_kernels";
  std::filesystem::create_directories(dir);
  const LagGrid g = make_lag_grid(1.0, 0.1);
  auto k = sampled(g, KernelKind::noise, [](double t) { return std::exp(-t * t); });
  write_kernel_csv((dir / "k.csv").string(), k);
  const auto back = read_kernel_csv((dir / "k.csv").string(), KernelKind::noise, KernelPair::p33);
  REQUIRE(back.values.size() == k.values.size());
  CHECK(back.grid.half == g.half);
  CHECK(back.grid.step == doctest::Approx(g.step));
  for (std::size_t i = 0; i < k.values.size(); ++i) CHECK(back.values[i] == k.values[i]);
  CHECK_THROWS_AS(read_kernel_csv((dir / "missing.csv").string(), KernelKind::noise,
                                  KernelPair::p22),
                  Error);
}
