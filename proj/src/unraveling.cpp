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

#include "cqhybrid/unraveling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cqhybrid/positivity.hpp"

namespace cqh {
namespace {

// Compensated (Neumaier) running sum.
class Sum {
 public:
  void add(double x) {
    const double t = s_ + x;
    c_ += std::abs(s_) >= std::abs(x) ? (s_ - t) + x : (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

long whole_steps(double t_final, double dt) {
  if (!(dt > 0)) throw ConfigError({"unravel.dt must be positive"});
  const long n = std::lround(t_final / dt);
  if (n < 0 || std::abs(n * dt - t_final) > 1e-9 * std::max(1.0, t_final)) {
    throw ConfigError({"unravel.t_final must be a whole number of steps"});
  }
  return n;
}

double max_abs(const CMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

NoiseSpec make_noise_spec(const Eigen::Matrix2cd& cm, double var_h, double var_pi) {
  if (var_h < 0 || var_pi < 0) {
    fail(ErrorKind::cp_violation, "classical noise variances must be non-negative");
  }
  if ((cm - cm.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * std::max(1.0, max_abs(cm))) {
    fail(ErrorKind::not_hermitian, "C_M is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(0.5 * (cm + cm.adjoint()));
  const Eigen::Vector2d lam = es.eigenvalues();
  if (lam(0) < -kPsdTol * std::max(lam.cwiseAbs().maxCoeff(), 1e-300)) {
    fail(ErrorKind::cp_violation, "C_M is not positive semidefinite; unraveling undefined");
  }
  NoiseSpec s;
  s.cm = cm;
  s.cm_root = es.eigenvectors() * lam.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  s.var_h = var_h;
  s.var_pi = var_pi;
  return s;
}

NoiseSpec make_noise_spec(const CQCoefficients& c) {
  const LocalKernel lk = build_CM(c);
  if (!lk.supported) fail(ErrorKind::cp_violation, lk.reason);
  // Verdict tolerance is relative to the parts of C_M, as in check_markov_cp.
  const double scale = std::max(max_abs(c.d0.matrix()), max_abs(lk.subtraction));
  Eigen::Matrix2cd cm = 0.5 * (lk.cm + lk.cm.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(cm);
  if (es.eigenvalues()(0) < -kPsdTol * scale) {
    fail(ErrorKind::cp_violation, "C_M is not positive semidefinite; unraveling undefined");
  }
  if (es.eigenvalues()(0) < 0) {
    cm = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
         es.eigenvectors().adjoint();
  }
  return make_noise_spec(cm, 2.0 * c.n33_2, 2.0 * c.n33);
}

NoiseSample sample_noise(const NoiseSpec& spec, double dt, TrajectoryRng& rng) {
  if (!(dt > 0)) fail(ErrorKind::invalid_argument, "dt must be positive");
  NoiseSample s;
  Eigen::Vector2cd z;
  for (int a = 0; a < 2; ++a) {
    const double re = rng.normal();
    const double im = rng.normal();
    z(a) = cplx(re, im) / std::sqrt(2.0);
  }
  s.eta = spec.cm_root * z / std::sqrt(dt);
  s.xi_h = std::sqrt(spec.var_h / dt) * rng.normal();
  s.xi_pi = std::sqrt(spec.var_pi / dt) * rng.normal();
  return s;
}

StepModel make_step_model(const CQCoefficients& c) {
  StepModel m;
  const int d = c.dim();
  const cplx mi_hbar(0.0, -1.0 / c.hbar);
  const CMatrix* ls[2] = {&c.f2.matrix(), &c.r2.matrix()};
  CMatrix p = CMatrix::Zero(d, d);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) p += c.d0(a, b) * ls[b]->adjoint() * *ls[a];
  }
  m.drift = c.drift;
  m.k_base = mi_hbar * c.heff_base.matrix() - 0.5 * p;
  m.k_h = mi_hbar * c.heff_h.matrix();
  m.k_pi = mi_hbar * c.heff_pi.matrix();
  m.x_h = c.d_h(0) * *ls[0] + c.d_h(1) * *ls[1];
  m.x_pi = c.d_pi(0) * *ls[0] + c.d_pi(1) * *ls[1];
  m.f2 = *ls[0];
  m.r2 = *ls[1];
  m.b_h = std::sqrt(2.0 * c.n33_2);
  m.b_pi = std::sqrt(2.0 * c.n33);
  return m;
}

void trajectory_step(Trajectory& traj, const StepModel& m, const NoiseSpec& spec, double dt,
                     TrajectoryRng& rng) {
  const NoiseSample s = sample_noise(spec, dt, rng);
  const int d = static_cast<int>(traj.rho.rows());
  const CMatrix id = CMatrix::Identity(d, d);
  const double h = traj.h, pi = traj.pi;

  CMatrix k = id + dt * (m.k_base + h * m.k_h + pi * m.k_pi);
  const struct {
    const CMatrix& x;
    double b, xi;
  } dirs[] = {{m.x_h, m.b_h, s.xi_h}, {m.x_pi, m.b_pi, s.xi_pi}};
  double shift[2] = {0.0, 0.0};
  for (int z = 0; z < 2; ++z) {
    if (dirs[z].b == 0.0) continue;
    const double x = (dirs[z].x * traj.rho).trace().real();
    const double b2 = dirs[z].b * dirs[z].b;
    const double dw = dirs[z].xi * dt / dirs[z].b;
    shift[z] = x;
    k += (x / b2 * dt) * dirs[z].x;
    k.diagonal().array() -= 0.5 * x * x / b2 * dt;
    k -= (dw / dirs[z].b) * (dirs[z].x - x * id);
  }
  k += cplx(0.0, dt) * (s.eta(0) * m.f2 + s.eta(1) * m.r2);

  traj.h = h + (pi - 2.0 * shift[0] + s.xi_h) * dt;
  traj.pi = pi + (m.drift(h, pi) - 2.0 * shift[1] + s.xi_pi) * dt;

  CMatrix next = k * traj.rho * k.adjoint();
  next = 0.5 * (next + next.adjoint());
  const double tr = next.trace().real();
  if (!(tr > 0) || !std::isfinite(tr)) {
    std::ostringstream os;
    os << "trajectory " << traj.index << " (seed " << traj.seed << ") lost its norm";
    fail(ErrorKind::numerical_abort, os.str());
  }
  next /= tr;
  const double lo = min_eigenpair(next).first;
  if (lo < -kTrajectoryPsdTol) {
    std::ostringstream os;
    os << "trajectory " << traj.index << " (seed " << traj.seed
       << ") lost positivity: min eigenvalue " << lo;
    fail(ErrorKind::numerical_abort, os.str());
  }
  traj.rho = std::move(next);
  traj.weight *= tr;
  traj.t += dt;
}

EnsembleRecords run_ensemble(const CQCoefficients& coeffs, const UnravelConfig& cfg) {
  if (cfg.trajectories < 1) throw ConfigError({"unravel.trajectories must be >= 1"});
  if (cfg.output_stride < 1) throw ConfigError({"unravel.output_stride must be >= 1"});
  if (cfg.sigma_h < 0 || cfg.sigma_pi < 0) {
    throw ConfigError({"initial widths must be non-negative"});
  }
  const long steps = whole_steps(cfg.t_final, cfg.dt);
  require_hermitian(cfg.rho0, "rho0");
  if (cfg.rho0.dim() != coeffs.dim()) {
    fail(ErrorKind::dimension_mismatch, "rho0 and the model differ in dimension");
  }
  const NoiseSpec spec = make_noise_spec(coeffs);
  const StepModel model = make_step_model(coeffs);

  EnsembleRecords rec;
  rec.n_obs = static_cast<int>(cfg.observables.size());
  rec.trajectories = cfg.trajectories;
  for (long n = 0; n <= steps; ++n) {
    if (n % cfg.output_stride == 0 || n == steps) rec.times.push_back(n * cfg.dt);
  }
  rec.data.assign(static_cast<std::size_t>(cfg.trajectories) * rec.times.size() * rec.stride(),
                  0.0);
  rec.final.resize(cfg.trajectories);

  std::string error;
#pragma omp parallel for schedule(dynamic, 16)
  for (long q = 0; q < cfg.trajectories; ++q) {
    try {
      TrajectoryRng rng(cfg.seed, static_cast<std::uint64_t>(q));
      Trajectory tr;
      tr.seed = cfg.seed;
      tr.index = static_cast<std::uint64_t>(q);
      tr.h = cfg.h0 + cfg.sigma_h * rng.normal();
      tr.pi = cfg.pi0 + cfg.sigma_pi * rng.normal();
      tr.rho = cfg.rho0.matrix();
      int slot = 0;
      auto record = [&] {
        double* row = rec.data.data() +
                      (static_cast<std::size_t>(q) * rec.times.size() + slot) * rec.stride();
        row[0] = tr.weight;
        row[1] = tr.h;
        row[2] = tr.pi;
        for (int o = 0; o < rec.n_obs; ++o) {
          row[3 + o] = (tr.rho * cfg.observables[o].op.matrix()).trace().real();
        }
        ++slot;
      };
      record();
      for (long n = 1; n <= steps; ++n) {
        trajectory_step(tr, model, spec, cfg.dt, rng);
        if (n % cfg.output_stride == 0 || n == steps) record();
      }
      rec.final[q] = std::move(tr);
    } catch (const std::exception& e) {
#pragma omp critical
      if (error.empty()) error = e.what();
    }
  }
  if (!error.empty()) fail(ErrorKind::numerical_abort, error);
  return rec;
}

EnsembleStats reduce(const EnsembleRecords& rec, const std::vector<NamedOperator>& observables,
                     long begin, long end) {
  if (begin < 0 || end > rec.trajectories || end - begin < 2) {
    fail(ErrorKind::invalid_argument, "reduce needs at least two trajectories in range");
  }
  EnsembleStats st;
  st.names = {"mean_h", "mean_pi", "var_h", "var_pi"};
  for (const auto& o : observables) st.names.push_back(o.name);
  st.times = rec.times;
  const int n_names = static_cast<int>(st.names.size());

  for (int t = 0; t < static_cast<int>(rec.times.size()); ++t) {
    Sum w_sum;
    std::vector<Sum> first(2 + rec.n_obs);
    for (long q = begin; q < end; ++q) {
      const double* r = rec.at(q, t);
      w_sum.add(r[0]);
      for (int k = 0; k < 2 + rec.n_obs; ++k) first[k].add(r[0] * r[1 + k]);
    }
    const double wt = w_sum.value();
    std::vector<double> ratio(2 + rec.n_obs);
    for (int k = 0; k < 2 + rec.n_obs; ++k) ratio[k] = first[k].value() / wt;

    Sum var[2];
    for (long q = begin; q < end; ++q) {
      const double* r = rec.at(q, t);
      for (int k = 0; k < 2; ++k) var[k].add(r[0] * (r[1 + k] - ratio[k]) * (r[1 + k] - ratio[k]));
    }
    std::vector<double> mean(n_names);
    mean[0] = ratio[0];
    mean[1] = ratio[1];
    mean[2] = var[0].value() / wt;
    mean[3] = var[1].value() / wt;
    for (int o = 0; o < rec.n_obs; ++o) mean[4 + o] = ratio[2 + o];

    // Delta-method standard error of a weighted ratio sum w f / sum w.
    std::vector<Sum> err(n_names);
    for (long q = begin; q < end; ++q) {
      const double* r = rec.at(q, t);
      const double w = r[0];
      auto add = [&](int k, double f) { err[k].add(w * w * (f - mean[k]) * (f - mean[k])); };
      add(0, r[1]);
      add(1, r[2]);
      add(2, (r[1] - ratio[0]) * (r[1] - ratio[0]));
      add(3, (r[2] - ratio[1]) * (r[2] - ratio[1]));
      for (int o = 0; o < rec.n_obs; ++o) add(4 + o, r[3 + o]);
    }
    std::vector<double> se(n_names);
    for (int k = 0; k < n_names; ++k) se[k] = std::sqrt(err[k].value()) / wt;
    st.mean.push_back(std::move(mean));
    st.se.push_back(std::move(se));
  }
  return st;
}

SemiWignerState deposit(const EnsembleRecords& rec, const PhaseSpaceGrid& grid, double* lost) {
  const int d = rec.final.empty() ? 1 : static_cast<int>(rec.final.front().rho.rows());
  SemiWignerState w(grid, d);
  Sum total, outside;
  for (const auto& tr : rec.final) total.add(tr.weight);
  const double norm = 1.0 / (total.value() * grid.cell());
  for (const auto& tr : rec.final) {
    const double fx = (tr.h - grid.h_min) / grid.dh();
    const double fy = (tr.pi - grid.pi_min) / grid.dpi();
    const int i0 = static_cast<int>(std::floor(fx));
    const int j0 = static_cast<int>(std::floor(fy));
    if (i0 < 0 || j0 < 0 || i0 + 1 >= grid.n_h || j0 + 1 >= grid.n_pi) {
      outside.add(tr.weight);
      continue;
    }
    const double ax = fx - i0, ay = fy - j0;
    const double s = tr.weight * norm;
    w.at(i0, j0) += (s * (1 - ax) * (1 - ay)) * tr.rho;
    w.at(i0 + 1, j0) += (s * ax * (1 - ay)) * tr.rho;
    w.at(i0, j0 + 1) += (s * (1 - ax) * ay) * tr.rho;
    w.at(i0 + 1, j0 + 1) += (s * ax * ay) * tr.rho;
  }
  if (lost) *lost = outside.value() / total.value();
  return w;
}

EnsembleResult ensemble_average(const CQCoefficients& coeffs, const UnravelConfig& cfg,
                                const PhaseSpaceGrid& grid) {
  if (cfg.trajectories < 100) throw ConfigError({"ensemble averages need >= 100 trajectories"});
  const EnsembleRecords rec = run_ensemble(coeffs, cfg);
  EnsembleResult out;
  out.stats = reduce(rec, cfg.observables, 0, rec.trajectories);
  out.estimate = deposit(rec, grid);
  return out;
}

void write_ensemble_csv(const std::string& path, const EnsembleStats& st) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out.precision(12);
  out << 't';
  for (const auto& n : st.names) out << ',' << n << ',' << n << "_se";
  out << '\n';
  for (std::size_t t = 0; t < st.times.size(); ++t) {
    out << st.times[t];
    for (std::size_t k = 0; k < st.names.size(); ++k) out << ',' << st.mean[t][k] << ',' << st.se[t][k];
    out << '\n';
  }
}

}  // namespace cqh
