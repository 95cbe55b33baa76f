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

#include "cqhybrid/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cqhybrid/error.hpp"

namespace cqh {
namespace {

constexpr double kFeynmanSymmetryTol = 1e-10;
constexpr double kDecayTol = 1e-6;

// x * coth(a x), continuous at x = 0.
double x_coth(double x, double a) {
  const double ax = a * x;
  if (std::abs(ax) < 1e-8) return 1.0 / a;
  return x / std::tanh(ax);
}

std::vector<cplx> thermal_mode_samples(const EnvironmentParams& p, const LagGrid& g) {
  const double amp = p.hbar / (2.0 * p.omega);
  const double coth = 1.0 / std::tanh(p.hbar * p.omega / (2.0 * p.temperature));
  std::vector<cplx> out(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const double t = std::abs(g.tau(k));
    const double damp = std::exp(-p.linewidth * t);
    out[k] = amp * damp * cplx(coth * std::cos(p.omega * t), -std::sin(p.omega * t));
  }
  return out;
}

// J(w) = eta w exp(-w/cutoff):
//   Re G(tau) =  int_0^inf J(w) coth(beta hbar w / 2) cos(w tau) dw
//   Im G(tau) = -int_0^inf J(w) sin(w |tau|) dw
// Composite Simpson in w over [0, 40 cutoff].
std::vector<cplx> ohmic_samples(const EnvironmentParams& p, const LagGrid& g) {
  const double w_max = 40.0 * p.omega;
  const double tau_max = g.half * g.step;
  int n = static_cast<int>(std::ceil(w_max * tau_max / 0.2));
  n = std::max(n, 4000);
  if (n % 2) ++n;
  const double dw = w_max / n;
  const double a = p.hbar / (2.0 * p.temperature);

  std::vector<double> jc(n + 1), j(n + 1), wts(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double w = i * dw;
    const double cut = p.eta * std::exp(-w / p.omega);
    jc[i] = cut * x_coth(w, a);
    j[i] = cut * w;
    wts[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    wts[i] *= dw / 3.0;
  }

  std::vector<cplx> out(g.size());
#pragma omp parallel for schedule(static)
  for (int k = g.half; k < g.size(); ++k) {
    const double t = g.tau(k);
    double re = 0.0, im = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = i * dw;
      re += wts[i] * jc[i] * std::cos(w * t);
      im -= wts[i] * j[i] * std::sin(w * t);
    }
    out[k] = cplx(re, im);
  }
  for (int k = 0; k < g.half; ++k) out[k] = out[g.size() - 1 - k];
  return out;
}

NonlocalKernel make_kernel(const LagGrid& g, KernelKind kind, KernelPair pair) {
  return NonlocalKernel::zeros(g, kind, pair);
}

double trapezoid(const LagGrid& g, const std::vector<double>& f) {
  if (f.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += f[k];
  s -= 0.5 * (f.front() + f.back());
  return s * g.step;
}

}  // namespace

LagGrid make_lag_grid(double window, double step) {
  if (!(step > 0) || !(window > 0)) {
    fail(ErrorKind::invalid_argument, "lag grid needs positive window and step");
  }
  LagGrid g;
  g.step = step;
  g.half = static_cast<int>(std::ceil(window / step - 1e-9));
  return g;
}

std::string pair_label(KernelPair p) {
  switch (p) {
    case KernelPair::p22: return "22";
    case KernelPair::p33: return "33";
    case KernelPair::p23: return "23";
    case KernelPair::p32: return "32";
  }
  return "??";
}

EnvironmentCorrelator make_correlator(const EnvironmentParams& params) {
  EnvironmentParams p = params;
  if (!(p.omega > 0)) fail(ErrorKind::invalid_argument, "environment frequency must be positive");
  if (!(p.temperature > 0)) fail(ErrorKind::invalid_argument, "temperature must be positive");
  if (!(p.hbar > 0)) fail(ErrorKind::invalid_argument, "hbar must be positive");
  if (p.linewidth < 0) fail(ErrorKind::invalid_argument, "linewidth must be non-negative");
  if (p.window <= 0) p.window = 50.0 / p.omega;
  if (p.step <= 0) p.step = 0.01 / p.omega;

  EnvironmentCorrelator c;
  c.params = p;
  c.grid = make_lag_grid(p.window, p.step);
  c.feynman = p.kind == CorrelatorKind::thermal_mode ? thermal_mode_samples(p, c.grid)
                                                     : ohmic_samples(p, c.grid);
  return c;
}

double feynman_symmetry_error(const EnvironmentCorrelator& corr) {
  const int n = corr.grid.size();
  if (static_cast<int>(corr.feynman.size()) != n) {
    fail(ErrorKind::dimension_mismatch, "correlator samples do not match its grid");
  }
  double peak = 0.0, err = 0.0;
  for (int k = 0; k < n; ++k) {
    peak = std::max(peak, std::abs(corr.feynman[k]));
    err = std::max(err, std::abs(corr.feynman[k] - corr.feynman[n - 1 - k]));
  }
  return peak > 0 ? err / peak : err;
}

NonlocalKernel NonlocalKernel::zeros(const LagGrid& grid, KernelKind kind, KernelPair pair) {
  NonlocalKernel k;
  k.grid = grid;
  k.kind = kind;
  k.pair = pair;
  k.values.assign(grid.size(), 0.0);
  return k;
}

double NonlocalKernel::peak() const {
  double p = 0.0;
  for (double v : values) p = std::max(p, std::abs(v));
  return p;
}

CubicKernels build_cubic_kernels(const EnvironmentCorrelator& corr, double lambda2,
                                 double lambda3) {
  if (corr.grid.size() < 3) fail(ErrorKind::invalid_argument, "correlator grid is empty");
  if (feynman_symmetry_error(corr) > kFeynmanSymmetryTol) {
    fail(ErrorKind::invalid_argument, "Feynman propagator samples are not even in the lag");
  }
  const LagGrid& g = corr.grid;
  CubicKernels out{make_kernel(g, KernelKind::noise, KernelPair::p22),
                   make_kernel(g, KernelKind::dissipation, KernelPair::p22),
                   make_kernel(g, KernelKind::noise, KernelPair::p33),
                   make_kernel(g, KernelKind::dissipation, KernelPair::p33),
                   make_kernel(g, KernelKind::noise, KernelPair::p23),
                   make_kernel(g, KernelKind::dissipation, KernelPair::p23)};
  const double c2 = 4.0 * lambda2 * lambda2;
  const double c3 = 8.0 * lambda3 * lambda3;
  for (int k = 0; k < g.size(); ++k) {
    const cplx gf = corr.feynman[k];
    const cplx gf2 = gf * gf;
    const int z = g.zero_index();
    const double theta = k > z ? 1.0 : (k == z ? 0.5 : 0.0);
    out.noise_psi.values[k] = c2 * gf.real();
    out.diss_psi.values[k] = c2 * theta * gf.imag();
    out.noise_h.values[k] = c3 * gf2.real();
    out.diss_h.values[k] = c3 * theta * gf2.imag();
  }
  for (NonlocalKernel* k : {&out.noise_psi, &out.diss_psi, &out.noise_h, &out.diss_h,
                            &out.noise_mixed, &out.diss_mixed}) {
    k->lambda2 = lambda2;
    k->lambda3 = lambda3;
  }
  return out;
}

KernelMoments extract_moments(const NonlocalKernel& kernel) {
  const LagGrid& g = kernel.grid;
  if (kernel.values.empty() || g.size() < 2 ||
      static_cast<int>(kernel.values.size()) != g.size()) {
    fail(ErrorKind::invalid_argument, "kernel grid is empty or inconsistent");
  }
  std::vector<double> weighted(kernel.values.size());
  KernelMoments m;
  m.kind = kernel.kind;
  m.zeroth = 0.5 * trapezoid(g, kernel.values);
  if (kernel.kind == KernelKind::noise) {
    for (int k = 0; k < g.size(); ++k) weighted[k] = g.tau(k) * g.tau(k) * kernel.values[k];
    m.higher = -0.25 * trapezoid(g, weighted);
  } else {
    for (int k = 0; k < g.size(); ++k) weighted[k] = g.tau(k) * kernel.values[k];
    m.higher = -0.5 * trapezoid(g, weighted);
  }
  const double edge = std::max(std::abs(kernel.values.front()), std::abs(kernel.values.back()));
  m.decayed = edge <= kDecayTol * kernel.peak();
  return m;
}

LocalMoments moments_from_cubic(const CubicKernels& k, bool* decayed) {
  const KernelMoments n22 = extract_moments(k.noise_psi);
  const KernelMoments d22 = extract_moments(k.diss_psi);
  const KernelMoments n33 = extract_moments(k.noise_h);
  const KernelMoments d33 = extract_moments(k.diss_h);
  const KernelMoments nmix = extract_moments(k.noise_mixed);
  const KernelMoments dmix = extract_moments(k.diss_mixed);
  if (decayed) *decayed = n22.decayed && d22.decayed && n33.decayed && d33.decayed;

  LocalMoments m;
  m.N22 = n22.zeroth;
  m.N22_2 = n22.higher;
  m.D22 = d22.zeroth;
  m.D22_1 = d22.higher;
  m.N33 = n33.zeroth;
  m.N33_2 = n33.higher;
  m.D33 = d33.zeroth;
  m.D33_1 = d33.higher;
  m.N23 = m.N32 = nmix.zeroth;
  m.N23_2 = m.N32_2 = nmix.higher;
  m.D23 = m.D32 = dmix.zeroth;
  m.D23_1 = m.D32_1 = dmix.higher;
  return m;
}

bool FdrReport::pass() const {
  bool any = false;
  for (const auto& e : entries) {
    if (e.status == FdrStatus::fail) return false;
    if (e.status == FdrStatus::pass) any = true;
  }
  return any;
}

FdrReport fdr_check(const LocalMoments& m, double temperature, double hbar) {
  if (!(temperature > 0)) fail(ErrorKind::invalid_argument, "FDR check needs T > 0");
  if (!(hbar > 0)) fail(ErrorKind::invalid_argument, "hbar must be positive");
  const struct {
    KernelPair pair;
    double n, d1;
  } rows[] = {{KernelPair::p22, m.N22, m.D22_1},
              {KernelPair::p33, m.N33, m.D33_1},
              {KernelPair::p23, m.N23, m.D23_1},
              {KernelPair::p32, m.N32, m.D32_1}};
  FdrReport rep;
  for (const auto& r : rows) {
    FdrEntry e;
    e.pair = r.pair;
    if (r.d1 == 0.0) {
      e.status = FdrStatus::not_applicable;
    } else {
      e.ratio = hbar * r.n / (4.0 * temperature * r.d1);
      e.status = std::abs(e.ratio - 1.0) <= kFdrTolerance ? FdrStatus::pass : FdrStatus::fail;
    }
    rep.entries.push_back(e);
  }
  return rep;
}

void write_kernel_csv(const std::string& path, const NonlocalKernel& kernel) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out.precision(17);
  out << "tau,value_re,value_im\n";
  for (int k = 0; k < kernel.grid.size(); ++k) {
    out << kernel.grid.tau(k) << ',' << kernel.values[k] << ",0\n";
  }
}

NonlocalKernel read_kernel_csv(const std::string& path, KernelKind kind, KernelPair pair) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("tau", 0) != 0) fail(ErrorKind::io, path + ": missing header tau,value_re,value_im");
  std::vector<double> taus, vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double t, re, im = 0.0;
    if (!(ss >> t >> re)) fail(ErrorKind::io, path + ": malformed row '" + line + "'");
    ss >> im;
    taus.push_back(t);
    vals.push_back(re);
  }
  if (taus.size() < 3 || taus.size() % 2 == 0) {
    fail(ErrorKind::io, path + ": need an odd number (>= 3) of symmetric lag samples");
  }
  LagGrid g;
  g.half = static_cast<int>(taus.size() / 2);
  g.step = (taus.back() - taus.front()) / (taus.size() - 1);
  for (int k = 0; k < g.size(); ++k) {
    if (std::abs(taus[k] - g.tau(k)) > 1e-9 * std::max(1.0, std::abs(taus.back()))) {
      fail(ErrorKind::io, path + ": lag grid is not uniform and symmetric about 0");
    }
  }
  NonlocalKernel k = NonlocalKernel::zeros(g, kind, pair);
  k.values = std::move(vals);
  return k;
}

}  // namespace cqh
