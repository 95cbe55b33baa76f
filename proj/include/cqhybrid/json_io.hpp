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

#include <json.hpp>

#include "cqhybrid/cq_coeffs.hpp"
#include "cqhybrid/hilbert.hpp"
#include "cqhybrid/kernels.hpp"
#include "cqhybrid/positivity.hpp"

namespace cqh {

/// Operators are flat row-major arrays of [re, im] pairs.
nlohmann::json to_json(const CMatrix& m);
nlohmann::json to_json(const QuantumOperator& op);
QuantumOperator operator_from_json(const nlohmann::json& js);

/// Flat object keyed "N22", "N33_2", "D22_1", ...
nlohmann::json to_json(const LocalMoments& m);
LocalMoments moments_from_json(const nlohmann::json& js);

nlohmann::json to_json(const CQCoefficients& c);
nlohmann::json to_json(const OppenheimDictionary& d);
nlohmann::json to_json(const CertReport& r);
nlohmann::json to_json(const FdrReport& r);

}  // namespace cqh
