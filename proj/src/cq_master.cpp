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

#include "cqhybrid/cq_master.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cqh {
namespace {

constexpr double kCflFactor = 0.2;

double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

// Largest |f| over the grid corners; exact for affine f.
template <class F>
double corner_max(const PhaseSpaceGrid& g, F f) {
  return std::max({f(g.h_min, g.pi_min), f(g.h_min, g.pi_max), f(g.h_max, g.pi_min),
                   f(g.h_max, g.pi_max)});
}

// w <- (w + w^dag)/2 blockwise; returns the largest entry of the removed part.
double symmetrize(SemiWignerState& w) {
  double removed = 0.0;
  const PhaseSpaceGrid& g = w.grid();
  for (int i = 0; i < g.n_h; ++i) {
    for (int j = 0; j < g.n_pi; ++j) {
      auto b = w.at(i, j);
      const CMatrix herm = 0.5 * (b + b.adjoint());
      removed = std::max(removed, (b - herm).cwiseAbs().maxCoeff());
      b = herm;
    }
  }
  return removed;
}

// Centered stencils with zero ghost values beyond the edges. The one-sided
// closure of the second derivative has a positive diagonal entry and grows
// like exp(2 N t / step^2) at the boundary.
Stencil centered_first(int i, int n, double step) {
  Stencil s;
  if (i > 0) s.idx[s.size] = i - 1, s.w[s.size++] = -0.5 / step;
  if (i + 1 < n) s.idx[s.size] = i + 1, s.w[s.size++] = 0.5 / step;
  return s;
}

Stencil centered_second(int i, int n, double step) {
  Stencil s;
  const double inv = 1.0 / (step * step);
  if (i > 0) s.idx[s.size] = i - 1, s.w[s.size++] = inv;
  s.idx[s.size] = i, s.w[s.size++] = -2.0 * inv;
  if (i + 1 < n) s.idx[s.size] = i + 1, s.w[s.size++] = inv;
  return s;
}

double peak_abs(const SemiWignerState& w) {
  double p = 0.0;
  for (const cplx& z : w.data()) p = std::max(p, std::abs(z));
  return p;
}

// y <- x + s * k
void axpy(SemiWignerState& y, const SemiWignerState& x, double s, const SemiWignerState& k) {
  auto& yd = y.data();
  const auto& xd = x.data();
  const auto& kd = k.data();
  const std::size_t n = yd.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) yd[i] = xd[i] + s * kd[i];
}

}  // namespace

Generator::Generator(const CQCoefficients& c, const PhaseSpaceGrid& grid)
    : grid_(grid), drift_(c.drift), n33_(c.n33), n33_2_(c.n33_2), dim_(c.dim()) {
  if (c.n33 < 0 || c.n33_2 < 0) {
    fail(ErrorKind::invalid_argument, "diffusion constants must be non-negative");
  }
  const cplx mi_hbar(0.0, -1.0 / c.hbar);
  const CMatrix& f = c.f2.matrix();
  const CMatrix& r = c.r2.matrix();
  l_[0] = f;
  l_[1] = r;
  const CMatrix* ls[2] = {&f, &r};
  CMatrix p = CMatrix::Zero(dim_, dim_);
  for (int a = 0; a < 2; ++a) {
    y_[a] = CMatrix::Zero(dim_, dim_);
    for (int b = 0; b < 2; ++b) {
      y_[a] += c.d0(a, b) * ls[b]->adjoint();
      p += c.d0(a, b) * ls[b]->adjoint() * *ls[a];
    }
  }
  lindblad_ = c.d0.matrix().cwiseAbs().maxCoeff() > 0.0;
  k_base_ = mi_hbar * c.heff_base.matrix() - 0.5 * p;
  k_h_ = mi_hbar * c.heff_h.matrix();
  k_pi_ = mi_hbar * c.heff_pi.matrix();
  x_pi_ = c.d_pi(0) * f + c.d_pi(1) * r;
  x_h_ = c.d_h(0) * f + c.d_h(1) * r;
  hybrid_pi_ = x_pi_.cwiseAbs().maxCoeff() > 0.0;
  hybrid_h_ = x_h_.cwiseAbs().maxCoeff() > 0.0;

  const double dh = grid.dh(), dpi = grid.dpi();
  double bound = std::numeric_limits<double>::infinity();
  auto take = [&](double rate_scale, double length) {
    if (rate_scale > 0) bound = std::min(bound, length / rate_scale);
  };
  take(n33_2_, dh * dh);
  take(n33_, dpi * dpi);
  take(std::max(std::abs(grid.pi_min), std::abs(grid.pi_max)), dh);
  take(corner_max(grid, [&](double h, double pi) { return std::abs(drift_(h, pi)); }), dpi);
  take(2.0 * spectral_norm(x_pi_), dpi);
  take(2.0 * spectral_norm(x_h_), dh);
  bound *= kCflFactor;

  // Quantum stiffness: keep dt times the pointwise rate within RK4's stability region.
  double q_rate = corner_max(grid, [&](double h, double pi) {
    return 2.0 * spectral_norm(k_base_ + h * k_h_ + pi * k_pi_);
  });
  for (int a = 0; a < 2; ++a) q_rate += spectral_norm(l_[a]) * spectral_norm(y_[a]);
  if (q_rate > 0) bound = std::min(bound, 1.0 / q_rate);
  stable_dt_ = bound;
}

void Generator::apply(const SemiWignerState& w, SemiWignerState& rate) const {
  const PhaseSpaceGrid& g = grid_;
  const int d = dim_;
  const double dh = g.dh(), dpi = g.dpi();
#pragma omp parallel
  {
    CMatrix wh(d, d), wp(d, d), w2h(d, d), w2p(d, d), flux(d, d), k(d, d), acc(d, d), lw(d, d);
#pragma omp for schedule(static)
    for (int i = 0; i < g.n_h; ++i) {
      const double h = g.h(i);
      const Stencil sh1 = centered_first(i, g.n_h, dh);
      const Stencil sh2 = centered_second(i, g.n_h, dh);
      for (int j = 0; j < g.n_pi; ++j) {
        const double pi = g.pi(j);
        const Stencil sp1 = centered_first(j, g.n_pi, dpi);
        const Stencil sp2 = centered_second(j, g.n_pi, dpi);
        const auto W = w.at(i, j);

        wh.setZero();
        w2h.setZero();
        for (int s = 0; s < sh1.size; ++s) wh += sh1.w[s] * w.at(sh1.idx[s], j);
        for (int s = 0; s < sh2.size; ++s) w2h += sh2.w[s] * w.at(sh2.idx[s], j);
        wp.setZero();
        w2p.setZero();
        flux.setZero();
        for (int s = 0; s < sp1.size; ++s) {
          const auto Wn = w.at(i, sp1.idx[s]);
          wp += sp1.w[s] * Wn;
          flux += (sp1.w[s] * drift_(h, g.pi(sp1.idx[s]))) * Wn;
        }
        for (int s = 0; s < sp2.size; ++s) w2p += sp2.w[s] * w.at(i, sp2.idx[s]);

        acc = -pi * wh - flux + n33_2_ * w2h + n33_ * w2p;
        k = k_base_ + h * k_h_ + pi * k_pi_;
        acc.noalias() += k * W;
        acc.noalias() += W * k.adjoint();
        if (lindblad_) {
          for (int a = 0; a < 2; ++a) {
            lw.noalias() = l_[a] * W;
            acc.noalias() += lw * y_[a];
          }
        }
        if (hybrid_pi_) {
          acc.noalias() += x_pi_ * wp;
          acc.noalias() += wp * x_pi_.adjoint();
        }
        if (hybrid_h_) {
          acc.noalias() += x_h_ * wh;
          acc.noalias() += wh * x_h_.adjoint();
        }
        rate.at(i, j) = acc;
      }
    }
  }
}

SemiWignerState generator(const SemiWignerState& w, const CQCoefficients& coeffs) {
  if (coeffs.dim() != w.dim()) {
    fail(ErrorKind::dimension_mismatch, "coefficients and state differ in quantum dimension");
  }
  Generator gen(coeffs, w.grid());
  SemiWignerState rate(w.grid(), w.dim());
  gen.apply(w, rate);
  return rate;
}

void check_cfl(const Generator& gen, double dt) {
  if (!(dt > 0)) throw ConfigError({"evolution.dt must be positive"});
  if (dt > gen.stable_dt()) {
    std::ostringstream os;
    os << "evolution.dt = " << dt << " exceeds the stability bound " << gen.stable_dt();
    throw ConfigError({os.str()});
  }
}

Diagnostics diagnose(const SemiWignerState& w, double t, bool positivity,
                     const std::vector<NamedOperator>& observables) {
  const Marginals m = marginals(w);
  Diagnostics d;
  d.t = t;
  d.trace = w.total_trace();
  d.min_p = m.p.minCoeff();
  d.mean_h = m.mean_h;
  d.mean_pi = m.mean_pi;
  d.var_h = m.var_h;
  d.var_pi = m.var_pi;
  d.min_eig = std::numeric_limits<double>::quiet_NaN();
  if (positivity) {
    const PhaseSpaceGrid& g = w.grid();
    std::vector<double> row_min(g.n_h);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g.n_h; ++i) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es;
      double lo = std::numeric_limits<double>::infinity();
      for (int j = 0; j < g.n_pi; ++j) {
        es.compute(CMatrix(w.at(i, j)), Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues()(0));
      }
      row_min[i] = lo;
    }
    d.min_eig = *std::min_element(row_min.begin(), row_min.end());
  }
  for (const auto& o : observables) {
    if (o.op.dim() != w.dim()) {
      fail(ErrorKind::dimension_mismatch, "observable " + o.name + " has the wrong dimension");
    }
    d.observables.push_back((m.rho_psi.matrix() * o.op.matrix()).trace().real());
  }
  return d;
}

EvolutionResult evolve(const SemiWignerState& w0, const CQCoefficients& coeffs,
                       const EvolutionConfig& cfg) {
  if (coeffs.dim() != w0.dim()) {
    fail(ErrorKind::dimension_mismatch, "coefficients and state differ in quantum dimension");
  }
  if (!(cfg.t_final >= 0)) throw ConfigError({"evolution.t_final must be non-negative"});
  if (cfg.output_stride < 1) throw ConfigError({"evolution.output_stride must be >= 1"});
  w0.check_invariants();
  const Generator gen(coeffs, w0.grid());
  check_cfl(gen, cfg.dt);

  const long steps = std::lround(cfg.t_final / cfg.dt);
  if (std::abs(steps * cfg.dt - cfg.t_final) > 1e-9 * std::max(1.0, cfg.t_final)) {
    throw ConfigError({"evolution.t_final must be a whole number of steps"});
  }

  EvolutionResult res;
  SemiWignerState w = w0;
  SemiWignerState k1(w.grid(), w.dim()), k2 = k1, k3 = k1, k4 = k1, tmp = k1;
  const double trace0 = w.total_trace();
  double herm = 0.0;

  auto sample = [&](long n) {
    Diagnostics d = diagnose(w, n * cfg.dt, cfg.monitor_positivity, cfg.observables);
    d.herm_err = herm;
    if (cfg.on_sample) cfg.on_sample(d);
    res.series.push_back(std::move(d));
  };
  sample(0);

  for (long n = 1; n <= steps; ++n) {
    const double dt = cfg.dt;
    gen.apply(w, k1);
    if (cfg.integrator == Integrator::euler) {
      axpy(w, w, dt, k1);
    } else {
      axpy(tmp, w, 0.5 * dt, k1);
      gen.apply(tmp, k2);
      axpy(tmp, w, 0.5 * dt, k2);
      gen.apply(tmp, k3);
      axpy(tmp, w, dt, k3);
      gen.apply(tmp, k4);
      auto& wd = w.data();
      const std::size_t len = wd.size();
#pragma omp parallel for schedule(static)
      for (std::size_t q = 0; q < len; ++q) {
        wd[q] += dt / 6.0 * (k1.data()[q] + 2.0 * k2.data()[q] + 2.0 * k3.data()[q] +
                             k4.data()[q]);
      }
    }
    const double peak = peak_abs(w);
    herm = std::max(herm, peak > 0 ? symmetrize(w) / peak : 0.0);

    const double trace = w.total_trace();
    if (!std::isfinite(trace) || std::abs(trace - trace0) > kTraceDriftTol) {
      std::ostringstream os;
      os << "total trace drifted to " << trace << " at t = " << n * dt;
      fail(ErrorKind::numerical_abort, os.str());
    }
    const bool out = n % cfg.output_stride == 0 || n == steps;
    if (out && cfg.monitor_boundary) {
      const double ratio = boundary_ratio(w);
      if (ratio > kBoundaryTol) {
        std::ostringstream os;
        os << "mass reached the grid boundary at t = " << n * dt << " (edge/peak = " << ratio
           << ")";
        fail(ErrorKind::numerical_abort, os.str());
      }
    }
    if (out) sample(n);
    if (cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0) {
      write_snapshot(cfg.snapshot_prefix + "_" + std::to_string(n), w, n * dt);
    }
  }
  res.final_state = std::move(w);
  return res;
}

std::string series_header(const std::vector<NamedOperator>& observables) {
  std::string h = "t,trace,min_p,min_eig,mean_h,mean_pi,var_h,var_pi,herm_err";
  for (const auto& o : observables) h += "," + o.name;
  return h;
}

std::string series_row(const Diagnostics& d) {
  std::ostringstream os;
  os.precision(12);
  os << d.t << ',' << d.trace << ',' << d.min_p << ',' << d.min_eig << ',' << d.mean_h << ','
     << d.mean_pi << ',' << d.var_h << ',' << d.var_pi << ',' << d.herm_err;
  for (double v : d.observables) os << ',' << v;
  return os.str();
}

void write_series_csv(const std::string& path, const EvolutionResult& result,
                      const std::vector<NamedOperator>& observables) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << series_header(observables) << '\n';
  for (const auto& d : result.series) out << series_row(d) << '\n';
}

}  // namespace cqh
