// Copyright 2026 The Authors.
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

#ifndef MISS_IO_HPP_
#define MISS_IO_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "miss/common.hpp"
#include "miss/counterexamples.hpp"
#include "miss/dataset.hpp"
#include "miss/effects.hpp"
#include "miss/selectors.hpp"

namespace miss {

// Training files need at least as many rows as columns; files of test
// points only need one row.
enum class CsvUse { training, test_points };

// Comma separated, dot decimal, mandatory header, no quoting. `target` is a
// header name or, failing that, a zero-based column index. Every other
// column becomes a feature in file order; with `intercept` a ones column is
// prepended.
Dataset<double> load_csv(const std::string& path, const std::string& target,
                         bool intercept, CsvUse use = CsvUse::training);

// Same dialect from an in-memory string; `source` names it in errors.
Dataset<double> parse_csv(const std::string& text, const std::string& target,
                          bool intercept, const std::string& source = "<csv>",
                          CsvUse use = CsvUse::training);

// Writes features then a final "y" column with %.17g. The ones column of an
// intercept dataset is dropped so that load_csv(..., "y", true) restores it.
void write_csv(const Dataset<double>& ds, const std::string& path);
std::string to_csv(const Dataset<double>& ds);

// Matrix rows as feature-only CSV (no target column).
std::string matrix_to_csv(const Mat<double>& m, const std::string& prefix = "x");

nlohmann::json to_json(const SubsetTrace& trace);
nlohmann::json to_json(const EffectReport<double>& report);
nlohmann::json to_json(const CounterexampleCertificate& cert);
CounterexampleCertificate certificate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Prop41Report& report);

nlohmann::json to_json(const SyntheticConfig<double>& cfg);
SyntheticConfig<double> synthetic_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClusterConfig& cfg);
ClusterConfig cluster_config_from_json(const nlohmann::json& j);

void write_text(const std::string& path, const std::string& text);

}  // namespace miss

#endif  // MISS_IO_HPP_
