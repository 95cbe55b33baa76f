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

#include "cqhybrid/semi_wigner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "cqhybrid/json_io.hpp"

namespace cqh {
namespace {

enum class Axis { h, pi };
enum class Order { first, second };

SemiWignerState derivative(const SemiWignerState& w, Axis axis, Order order) {
  const PhaseSpaceGrid& g = w.grid();
  SemiWignerState out(g, w.dim());
  const int n = axis == Axis::h ? g.n_h : g.n_pi;
  const double step = axis == Axis::h ? g.dh() : g.dpi();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < g.n_h; ++i) {
    for (int j = 0; j < g.n_pi; ++j) {
      const int along = axis == Axis::h ? i : j;
      const Stencil s = order == Order::first ? first_derivative(along, n, step)
                                              : second_derivative(along, n, step);
      auto dst = out.at(i, j);
      for (int k = 0; k < s.size; ++k) {
        const int ii = axis == Axis::h ? s.idx[k] : i;
        const int jj = axis == Axis::h ? j : s.idx[k];
        dst += s.w[k] * w.at(ii, jj);
      }
    }
  }
  return out;
}

}  // namespace

PhaseSpaceGrid make_grid(double h_min, double h_max, int n_h, double pi_min, double pi_max,
                         int n_pi) {
  if (n_h < kMinGridPoints || n_pi < kMinGridPoints) {
    fail(ErrorKind::invalid_argument, "phase-space grid needs at least 8 points per axis");
  }
  if (!(h_max > h_min) || !(pi_max > pi_min)) {
    fail(ErrorKind::invalid_argument, "phase-space grid needs positive spacings");
  }
  return {h_min, h_max, n_h, pi_min, pi_max, n_pi};
}

Stencil first_derivative(int i, int n, double step) {
  Stencil s;
  const double inv = 1.0 / (2.0 * step);
  if (i == 0) {
    s = {{0, 1, 2, 0}, {-3 * inv, 4 * inv, -inv, 0}, 3};
  } else if (i == n - 1) {
    s = {{n - 1, n - 2, n - 3, 0}, {3 * inv, -4 * inv, inv, 0}, 3};
  } else {
    s = {{i - 1, i + 1, 0, 0}, {-inv, inv, 0, 0}, 2};
  }
  return s;
}

Stencil second_derivative(int i, int n, double step) {
  Stencil s;
  const double inv = 1.0 / (step * step);
  if (i == 0) {
    s = {{0, 1, 2, 3}, {2 * inv, -5 * inv, 4 * inv, -inv}, 4};
  } else if (i == n - 1) {
    s = {{n - 1, n - 2, n - 3, n - 4}, {2 * inv, -5 * inv, 4 * inv, -inv}, 4};
  } else {
    s = {{i - 1, i, i + 1, 0}, {inv, -2 * inv, inv, 0}, 3};
  }
  return s;
}

SemiWignerState::SemiWignerState(const PhaseSpaceGrid& grid, int dim)
    : grid_(grid), dim_(dim) {
  if (dim < 1) fail(ErrorKind::invalid_argument, "quantum dimension must be >= 1");
  data_.assign(static_cast<std::size_t>(grid.points()) * dim * dim, cplx(0.0));
}

double SemiWignerState::total_trace() const {
  double s = 0.0;
  for (int i = 0; i < grid_.n_h; ++i) {
    for (int j = 0; j < grid_.n_pi; ++j) s += at(i, j).trace().real();
  }
  return s * grid_.cell();
}

double SemiWignerState::hermiticity_error() const {
  double err = 0.0;
  for (int i = 0; i < grid_.n_h; ++i) {
    for (int j = 0; j < grid_.n_pi; ++j) {
      err = std::max(err, (at(i, j) - at(i, j).adjoint()).cwiseAbs().maxCoeff());
    }
  }
  return err;
}

void SemiWignerState::check_invariants() const {
  double peak = 0.0, trace_im = 0.0;
  for (const cplx& z : data_) peak = std::max(peak, std::abs(z));
  for (int i = 0; i < grid_.n_h; ++i) {
    for (int j = 0; j < grid_.n_pi; ++j) {
      trace_im = std::max(trace_im, std::abs(at(i, j).trace().imag()));
    }
  }
  if (hermiticity_error() > 1e-10 * peak) {
    fail(ErrorKind::numerical_abort, "semi-Wigner state is not Hermitian pointwise");
  }
  if (trace_im > 1e-10 * peak) {
    fail(ErrorKind::numerical_abort, "semi-Wigner state has a complex trace");
  }
  if (std::abs(total_trace() - 1.0) > 1e-8) {
    fail(ErrorKind::numerical_abort, "semi-Wigner state is not normalized");
  }
}

SemiWignerState init_gaussian_product(const PhaseSpaceGrid& grid, double h0, double pi0,
                                      double sigma_h, double sigma_pi,
                                      const QuantumOperator& rho_psi) {
  if (!(sigma_h > 0) || !(sigma_pi > 0)) {
    fail(ErrorKind::invalid_argument, "Gaussian widths must be positive");
  }
  require_hermitian(rho_psi, "rho_psi");
  if (min_eigenvalue(rho_psi) < -kHermitianTol * std::max(1.0, rho_psi.max_abs())) {
    fail(ErrorKind::invalid_argument, "rho_psi is not positive semidefinite");
  }
  if (std::abs(rho_psi.trace() - 1.0) > 1e-10) {
    fail(ErrorKind::invalid_argument, "rho_psi must have unit trace");
  }
  SemiWignerState w(grid, rho_psi.dim());
  const double norm = 1.0 / (2.0 * std::numbers::pi * sigma_h * sigma_pi);
  std::vector<double> g(grid.points());
  double mass = 0.0;
  for (int i = 0; i < grid.n_h; ++i) {
    for (int j = 0; j < grid.n_pi; ++j) {
      const double x = (grid.h(i) - h0) / sigma_h;
      const double y = (grid.pi(j) - pi0) / sigma_pi;
      g[i * grid.n_pi + j] = norm * std::exp(-0.5 * (x * x + y * y));
      mass += g[i * grid.n_pi + j];
    }
  }
  mass *= grid.cell();
  if (!(mass > 0)) fail(ErrorKind::invalid_argument, "Gaussian has no mass on the grid");
  for (int i = 0; i < grid.n_h; ++i) {
    for (int j = 0; j < grid.n_pi; ++j) {
      w.at(i, j) = (g[i * grid.n_pi + j] / mass) * rho_psi.matrix();
    }
  }
  return w;
}

SemiWignerState partial_h(const SemiWignerState& w) {
  return derivative(w, Axis::h, Order::first);
}
SemiWignerState partial_pi(const SemiWignerState& w) {
  return derivative(w, Axis::pi, Order::first);
}
SemiWignerState partial2_h(const SemiWignerState& w) {
  return derivative(w, Axis::h, Order::second);
}
SemiWignerState partial2_pi(const SemiWignerState& w) {
  return derivative(w, Axis::pi, Order::second);
}

Marginals marginals(const SemiWignerState& w) {
  const PhaseSpaceGrid& g = w.grid();
  Marginals m;
  m.p.resize(g.n_h, g.n_pi);
  CMatrix rho = CMatrix::Zero(w.dim(), w.dim());
  double mass = 0, sh = 0, spi = 0;
  for (int i = 0; i < g.n_h; ++i) {
    for (int j = 0; j < g.n_pi; ++j) {
      const double p = w.at(i, j).trace().real();
      m.p(i, j) = p;
      rho += w.at(i, j);
      mass += p;
      sh += p * g.h(i);
      spi += p * g.pi(j);
    }
  }
  m.rho_psi = QuantumOperator(rho * g.cell());
  if (mass == 0.0) return m;
  m.mean_h = sh / mass;
  m.mean_pi = spi / mass;
  double vh = 0, vpi = 0;
  for (int i = 0; i < g.n_h; ++i) {
    for (int j = 0; j < g.n_pi; ++j) {
      const double dh = g.h(i) - m.mean_h, dp = g.pi(j) - m.mean_pi;
      vh += m.p(i, j) * dh * dh;
      vpi += m.p(i, j) * dp * dp;
    }
  }
  m.var_h = vh / mass;
  m.var_pi = vpi / mass;
  return m;
}

double boundary_ratio(const SemiWignerState& w) {
  const PhaseSpaceGrid& g = w.grid();
  double peak = 0.0, edge = 0.0;
  for (int i = 0; i < g.n_h; ++i) {
    for (int j = 0; j < g.n_pi; ++j) {
      const double a = w.at(i, j).cwiseAbs().maxCoeff();
      peak = std::max(peak, a);
      const bool near = i < kBoundaryCells || j < kBoundaryCells ||
                        i >= g.n_h - kBoundaryCells || j >= g.n_pi - kBoundaryCells;
      if (near) edge = std::max(edge, a);
    }
  }
  return peak > 0 ? edge / peak : 0.0;
}

void write_snapshot(const std::string& prefix, const SemiWignerState& w, double t) {
  const Marginals m = marginals(w);
  const PhaseSpaceGrid& g = w.grid();
  std::ofstream csv(prefix + "_p.csv");
  if (!csv) fail(ErrorKind::io, "cannot write " + prefix + "_p.csv");
  csv.precision(12);
  csv << "h,pi,p\n";
  for (int i = 0; i < g.n_h; ++i) {
    for (int j = 0; j < g.n_pi; ++j) csv << g.h(i) << ',' << g.pi(j) << ',' << m.p(i, j) << '\n';
  }
  nlohmann::json js;
  js["t"] = t;
  js["rho_psi"] = to_json(m.rho_psi);
  js["mean_h"] = m.mean_h;
  js["mean_pi"] = m.mean_pi;
  js["var_h"] = m.var_h;
  js["var_pi"] = m.var_pi;
  std::ofstream out(prefix + "_state.json");
  if (!out) fail(ErrorKind::io, "cannot write " + prefix + "_state.json");
  out << js.dump(2) << '\n';
}

}  // namespace cqh
