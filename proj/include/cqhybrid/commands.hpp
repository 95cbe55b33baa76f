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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "cqhybrid/error.hpp"

namespace cqh {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes per failure class.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCpFail = 3;
inline constexpr int kExitNumerical = 4;

int exit_code(ErrorKind kind);

struct CommandOptions {
  std::string command;
  std::string invocation;  // full command line, recorded in the manifest
  std::string config_path;
  std::string scenario;    // built-in preset used instead of a config file
  std::string out_dir;     // empty selects runs/<command>-<config hash>
  std::string kernels_dir;
  std::optional<long> trajectories;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda1;
  double hbar = 1.0;
  int n_t = 0;             // 0 selects the longest grid the lag window allows, capped at 201
  int stride = 1;          // time step in lag steps
  std::string evolve_csv;  // compare inputs
  std::string unravel_csv;
};

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

/// Per-observable z-scores (unravel - evolve) / se on matching output times.
nlohmann::json compare_series(const std::string& evolve_csv, const std::string& unravel_csv);

/// Runs one command, printing a JSON summary to `out`; returns the exit code.
int run_command(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace cqh
