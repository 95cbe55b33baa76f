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

#pragma once

#include <complex>
#include <string>
#include <vector>

namespace cqh {

using cplx = std::complex<double>;

/// Uniform, symmetric grid of time lags tau_k = (k - half) * step, k = 0..2*half.
struct LagGrid {
  double step = 0.0;
  int half = 0;

  int size() const { return 2 * half + 1; }
  double tau(int k) const { return (k - half) * step; }
  int zero_index() const { return half; }
};

/// Grid covering [-window, window]; the window is rounded up to a whole number of steps.
LagGrid make_lag_grid(double window, double step);

enum class CorrelatorKind { thermal_mode, ohmic };

/// Environment parameters. `omega` is the mode frequency for a thermal mode
/// and the spectral cutoff for an Ohmic bath. A nonzero `linewidth` damps the
/// thermal mode correlator by exp(-linewidth*|tau|). Temperature is in energy
/// units (k_B = 1).
struct EnvironmentParams {
  CorrelatorKind kind = CorrelatorKind::thermal_mode;
  double omega = 1.0;
  double linewidth = 0.0;
  double eta = 1.0;
  double temperature = 1.0;
  double hbar = 1.0;
  double window = 0.0;  // 0 selects 50/omega
  double step = 0.0;    // 0 selects 0.01/omega
};

/// Sampled Feynman propagator G_F(tau) of the environment field.
struct EnvironmentCorrelator {
  EnvironmentParams params;
  LagGrid grid;
  std::vector<cplx> feynman;
};

EnvironmentCorrelator make_correlator(const EnvironmentParams& params);

/// max_k |G(-tau_k) - G(tau_k)| relative to max|G|. The time-ordered
/// propagator of a stationary state is even in the lag.
double feynman_symmetry_error(const EnvironmentCorrelator& corr);

enum class KernelKind { noise, dissipation };
enum class KernelPair { p22, p33, p23, p32 };

std::string pair_label(KernelPair p);

/// Real kernel sampled on a lag grid. Noise kernels are even in tau;
/// dissipation kernels are retarded and carry theta(0) = 1/2 at tau = 0.
struct NonlocalKernel {
  LagGrid grid;
  KernelKind kind = KernelKind::noise;
  KernelPair pair = KernelPair::p22;
  std::vector<double> values;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;

  static NonlocalKernel zeros(const LagGrid& grid, KernelKind kind, KernelPair pair);
  double peak() const;
};

/// Kernels of the cubic interaction model; the mixed kernels vanish
/// identically for an environment symmetric under phi -> -phi.
struct CubicKernels {
  NonlocalKernel noise_psi;   // N22 = 4 l2^2 Re G
  NonlocalKernel diss_psi;    // D22 = 4 l2^2 theta Im G
  NonlocalKernel noise_h;     // N33 = 8 l3^2 Re G^2
  NonlocalKernel diss_h;      // D33 = 8 l3^2 theta Im G^2
  NonlocalKernel noise_mixed; // N23 = N32 = 0
  NonlocalKernel diss_mixed;  // D23 = D32 = 0
};

CubicKernels build_cubic_kernels(const EnvironmentCorrelator& corr, double lambda2,
                                 double lambda3);

/// Moments of one kernel. For noise kernels `zeroth` = N and `higher` = N^(2);
/// for dissipation kernels `zeroth` = D and `higher` = D^(1).
struct KernelMoments {
  KernelKind kind = KernelKind::noise;
  double zeroth = 0.0;
  double higher = 0.0;
  bool decayed = true;  // |K| at the window edge <= 1e-6 * peak
};

/// Trapezoid-rule moments matching the equal-time expansion
///   noise:       K ~ 2N delta - 2N2 delta''   => N = 1/2 int K,  N2 = -1/4 int tau^2 K
///   dissipation: K ~ 2D delta + 2D1 delta'    => D = 1/2 int K,  D1 = -1/2 int tau K
KernelMoments extract_moments(const NonlocalKernel& kernel);

struct LocalMoments {
  double N22 = 0, N33 = 0, N23 = 0, N32 = 0;
  double N22_2 = 0, N33_2 = 0, N23_2 = 0, N32_2 = 0;
  double D22 = 0, D33 = 0, D23 = 0, D32 = 0;
  double D22_1 = 0, D33_1 = 0, D23_1 = 0, D32_1 = 0;
};

/// Moments of all cubic-model kernels; `decayed` is false if any kernel was
/// truncated before decaying.
LocalMoments moments_from_cubic(const CubicKernels& kernels, bool* decayed = nullptr);

enum class FdrStatus { pass, fail, not_applicable };

struct FdrEntry {
  KernelPair pair;
  double ratio = 0.0;  // hbar N / (4 T D1)
  FdrStatus status = FdrStatus::not_applicable;
};

struct FdrReport {
  std::vector<FdrEntry> entries;
  bool pass() const;
};

inline constexpr double kFdrTolerance = 0.05;

FdrReport fdr_check(const LocalMoments& m, double temperature, double hbar);

void write_kernel_csv(const std::string& path, const NonlocalKernel& kernel);
NonlocalKernel read_kernel_csv(const std::string& path, KernelKind kind, KernelPair pair);

}  // namespace cqh
