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

#ifndef MISS_HARNESS_HPP_
#define MISS_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "miss/common.hpp"
#include "miss/dataset.hpp"
#include "miss/selectors.hpp"
#include "miss/target.hpp"

namespace miss {

enum class Algorithm { zam, lags, adaptive, pgd, brute };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct EvalConfig {
  std::vector<Algorithm> algorithms;
  std::vector<Index> ks;
  ModelKind model = ModelKind::ols;
  Index step = 1;
  double ridge = 0.0;
  std::uint64_t seed = 0;  // PGD restarts
  int pgd_iters = 500;
  int pgd_restarts = 8;
  Index brute_cap = kDefaultBruteCap;
  // 0 = MISS_THREADS from the environment, else hardware concurrency.
  int threads = 0;
};

struct Exclusion {
  Index test_point = 0;
  std::string algorithm;
  Index k = 0;
  std::string reason;
};

// Metrics over held-out test points. Algorithm labels are unique; a repeated
// algorithm gets a "#2", "#3", ... suffix.
struct EvalReport {
  std::vector<std::string> algorithms;
  std::vector<Index> ks;
  // k -> algorithm -> mean effect over non-excluded test points (NaN if none)
  std::map<Index, std::map<std::string, double>> per_k;
  // k -> a -> b -> fraction of test points where a beats b, ties count half
  std::map<Index, std::map<std::string, std::map<std::string, double>>>
      winning_rate;
  // [test point][algorithm][k], NaN for excluded cells
  std::vector<std::vector<std::vector<double>>> per_test_point;
  std::vector<Exclusion> exclusions;
  nlohmann::json config_echo;
  std::string timestamp;
};

// Worker count from MISS_THREADS, falling back to hardware concurrency.
int default_thread_count();

// One target per test point.
EvalReport evaluate(const Dataset<double>& train,
                    const std::vector<TargetFunction<double>>& targets,
                    const EvalConfig& cfg);

// Linear targets (OLS) or logit of the held-out label (logistic).
EvalReport evaluate(const Dataset<double>& train, const Dataset<double>& test,
                    const EvalConfig& cfg);

// Linear targets at the rows of `test_points`.
EvalReport evaluate(const Dataset<double>& train,
                    const Mat<double>& test_points, const EvalConfig& cfg);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// One (test_point, algorithm, k, effect) row per non-excluded cell.
std::string report_to_csv(const EvalReport& report);

enum class ReportFormat { json, csv };
ReportFormat parse_format(std::string_view name);

void emit_report(const EvalReport& report, ReportFormat format,
                 const std::string& path);

}  // namespace miss

#endif  // MISS_HARNESS_HPP_
