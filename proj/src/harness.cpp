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

#include "miss/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "miss/effects.hpp"
#include "miss/glm.hpp"
#include "miss/ols.hpp"
#include "miss/quadratic.hpp"

namespace miss {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Exact effect of a selection plus the reason it is missing, if it is.
struct Cell {
  double value = kNaN;
  std::string error;
};

// The fitted model shared by every test point.
struct Model {
  ModelKind kind = ModelKind::ols;
  std::optional<OlsFit<double>> ols;
  std::optional<GlmFit<double>> glm;
  std::shared_ptr<const Dataset<double>> data;

  double effect(std::span<const Index> s,
                const TargetFunction<double>& t) const {
    return kind == ModelKind::ols ? actual_effect_exact(*ols, s, t)
                                  : actual_effect_refit(*glm, s, t);
  }
};

IndexSet positions(const Dataset<double>& ds, const std::vector<RowId>& ids,
                   std::size_t limit) {
  IndexSet out;
  for (std::size_t i = 0; i < std::min(limit, ids.size()); ++i) {
    out.push_back(ds.position_of(ids[i]));
  }
  return out;
}

// Selection of one algorithm for the largest budget; every smaller budget is
// a prefix of it. Holds for zam, lags and adaptive (any step size).
SubsetTrace prefix_trace(Algorithm algo, const Model& m,
                         const TargetFunction<double>& t, Index k_max,
                         const EvalConfig& cfg) {
  if (algo == Algorithm::adaptive) {
    AdaptiveOptions<double> opts;
    opts.step = cfg.step;
    opts.model = m.kind;
    opts.ridge = cfg.ridge;
    opts.scoring = m.kind == ModelKind::ols
                       ? AdaptiveScoring::exact_individual
                       : AdaptiveScoring::influence_estimate;
    return select_adaptive(m.data, t, k_max, opts);
  }
  Vec<double> scores;
  if (m.kind == ModelKind::ols) {
    scores = algo == Algorithm::zam ? influence_estimates(*m.ols, t)
                                    : individual_effects(*m.ols, t);
  } else {
    scores = algo == Algorithm::zam ? influence_estimates_general(*m.glm, t)
                                    : individual_effects_refit(*m.glm, t);
  }
  return select_top_positive(scores, m.data->row_ids(), k_max, to_string(algo));
}

std::vector<Cell> run_algorithm(Algorithm algo, const Model& m,
                                const TargetFunction<double>& t,
                                const EvalConfig& cfg) {
  std::vector<Cell> cells(cfg.ks.size());
  const Index k_max =
      cfg.ks.empty() ? 0 : *std::max_element(cfg.ks.begin(), cfg.ks.end());

  auto fill = [&](std::size_t slot, auto&& compute) {
    try {
      cells[slot].value = compute();
    } catch (const SelectionError& e) {
      cells[slot].error = e.what();
    } catch (const Error& e) {
      cells[slot].error = e.what();
    }
  };

  if (algo == Algorithm::zam || algo == Algorithm::lags ||
      algo == Algorithm::adaptive) {
    std::optional<SubsetTrace> trace;
    std::string failure;
    try {
      trace = prefix_trace(algo, m, t, k_max, cfg);
    } catch (const Error& e) {
      failure = e.what();
    }
    for (std::size_t s = 0; s < cfg.ks.size(); ++s) {
      if (!trace) {
        cells[s].error = failure;
        continue;
      }
      fill(s, [&] {
        const auto sel = positions(*m.data, trace->selected,
                                   static_cast<std::size_t>(cfg.ks[s]));
        return m.effect(sel, t);
      });
    }
    return cells;
  }

  if (algo == Algorithm::pgd && m.kind != ModelKind::ols) {
    for (auto& c : cells) c.error = "pgd needs a least squares model";
    return cells;
  }

  std::optional<QuadraticForm<double>> quad;
  std::optional<Vec<double>> lags_scores;
  for (std::size_t s = 0; s < cfg.ks.size(); ++s) {
    const Index k = cfg.ks[s];
    fill(s, [&]() -> double {
      if (k == 0) return 0.0;
      if (algo == Algorithm::brute) {
        const auto trace = m.kind == ModelKind::ols
                               ? select_brute(*m.ols, t, k, cfg.brute_cap)
                               : select_brute(*m.glm, t, k, cfg.brute_cap);
        return trace.value_exact;
      }
      if (!quad) {
        quad = build_quadratic(*m.ols, t);
        lags_scores = individual_effects(*m.ols, t);
      }
      PgdConfig<double> pc;
      pc.iters = cfg.pgd_iters;
      pc.restarts = cfg.pgd_restarts;
      pc.seed = cfg.seed;
      const auto lags = select_top_positive(*lags_scores, m.data->row_ids(), k);
      Vec<double> warm = Vec<double>::Zero(quad->size());
      for (RowId id : lags.selected) warm(m.data->position_of(id)) = 1.0;
      pc.warm_start = std::move(warm);
      const auto trace = select_quadratic_pgd(*quad, k, pc);
      return m.effect(positions(*m.data, trace.selected, trace.selected.size()),
                      t);
    });
  }
  return cells;
}

std::vector<std::string> unique_labels(const std::vector<Algorithm>& algos) {
  std::vector<std::string> out;
  std::map<std::string, int> seen;
  for (Algorithm a : algos) {
    const std::string base = to_string(a);
    const int count = ++seen[base];
    out.push_back(count == 1 ? base : base + "#" + std::to_string(count));
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json config_json(const EvalConfig& cfg, const Dataset<double>& train,
                           std::size_t n_targets) {
  nlohmann::json j;
  std::vector<std::string> algos;
  for (Algorithm a : cfg.algorithms) algos.push_back(to_string(a));
  j["algorithms"] = algos;
  j["ks"] = cfg.ks;
  j["model"] = cfg.model == ModelKind::ols ? "ols" : "logistic";
  j["step"] = cfg.step;
  j["ridge"] = cfg.ridge;
  j["seed"] = cfg.seed;
  j["pgd_iters"] = cfg.pgd_iters;
  j["pgd_restarts"] = cfg.pgd_restarts;
  j["brute_cap"] = cfg.brute_cap;
  j["train_rows"] = train.rows();
  j["train_cols"] = train.cols();
  j["intercept"] = train.intercept();
  j["test_points"] = n_targets;
  return j;
}

double round12(double x) { return std::nearbyint(x * 1e12) / 1e12; }

double json_number(const nlohmann::json& j) {
  return j.is_null() ? kNaN : j.get<double>();
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::zam:
      return "zam";
    case Algorithm::lags:
      return "lags";
    case Algorithm::adaptive:
      return "adaptive";
    case Algorithm::pgd:
      return "pgd";
    case Algorithm::brute:
      return "brute";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "zam") return Algorithm::zam;
  if (name == "lags") return Algorithm::lags;
  if (name == "adaptive") return Algorithm::adaptive;
  if (name == "pgd") return Algorithm::pgd;
  if (name == "brute") return Algorithm::brute;
  throw InvalidArgument("unknown algorithm '" + std::string(name) +
                        "' (expected zam, lags, adaptive, pgd or brute)");
}

int default_thread_count() {
  if (const char* env = std::getenv("MISS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

EvalReport evaluate(const Dataset<double>& train,
                    const std::vector<TargetFunction<double>>& targets,
                    const EvalConfig& cfg) {
  if (cfg.algorithms.empty()) {
    throw InvalidArgument("evaluate: algorithm list is empty");
  }
  for (Index k : cfg.ks) {
    if (k < 0 || k >= train.rows()) {
      throw InvalidArgument("evaluate: budget " + std::to_string(k) +
                            " outside [0, n)");
    }
  }
  if (cfg.step < 1) throw InvalidArgument("evaluate: step must be >= 1");

  Model m;
  m.kind = cfg.model;
  m.data = std::make_shared<const Dataset<double>>(train);
  if (cfg.model == ModelKind::ols) {
    m.ols = fit_ols(m.data, cfg.ridge);
  } else {
    GlmOptions<double> opts;
    opts.ridge = cfg.ridge;
    m.glm = fit_logistic(m.data, opts);
  }

  const std::size_t n_t = targets.size();
  const std::size_t n_a = cfg.algorithms.size();
  std::vector<std::vector<std::vector<Cell>>> cells(n_t);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < n_t;) {
      cells[t].resize(n_a);
      for (std::size_t a = 0; a < n_a; ++a) {
        cells[t][a] = run_algorithm(cfg.algorithms[a], m, targets[t], cfg);
      }
    }
  };
  const int threads = std::max(
      1, std::min<int>(cfg.threads > 0 ? cfg.threads : default_thread_count(),
                       static_cast<int>(std::max<std::size_t>(n_t, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  EvalReport rep;
  rep.algorithms = unique_labels(cfg.algorithms);
  rep.ks = cfg.ks;
  rep.config_echo = config_json(cfg, train, n_t);
  rep.timestamp = utc_timestamp();
  rep.per_test_point.assign(
      n_t, std::vector<std::vector<double>>(
               n_a, std::vector<double>(cfg.ks.size(), kNaN)));
  for (std::size_t t = 0; t < n_t; ++t) {
    for (std::size_t a = 0; a < n_a; ++a) {
      for (std::size_t s = 0; s < cfg.ks.size(); ++s) {
        const Cell& c = cells[t][a][s];
        if (c.error.empty()) {
          rep.per_test_point[t][a][s] = c.value;
        } else {
          rep.exclusions.push_back({static_cast<Index>(t), rep.algorithms[a],
                                    cfg.ks[s], c.error});
        }
      }
    }
  }

  for (std::size_t s = 0; s < cfg.ks.size(); ++s) {
    const Index k = cfg.ks[s];
    auto& means = rep.per_k[k];
    for (std::size_t a = 0; a < n_a; ++a) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t t = 0; t < n_t; ++t) {
        const double v = rep.per_test_point[t][a][s];
        if (std::isnan(v)) continue;
        sum += v;
        ++count;
      }
      means[rep.algorithms[a]] = count ? sum / static_cast<double>(count) : kNaN;
    }
    if (n_a < 2) continue;
    auto& rates = rep.winning_rate[k];
    for (std::size_t a = 0; a < n_a; ++a) {
      for (std::size_t b = 0; b < n_a; ++b) {
        if (a == b) continue;
        double score = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < n_t; ++t) {
          const double va = rep.per_test_point[t][a][s];
          const double vb = rep.per_test_point[t][b][s];
          if (std::isnan(va) || std::isnan(vb)) continue;
          const double ra = round12(va), rb = round12(vb);
          score += ra > rb ? 1.0 : (ra == rb ? 0.5 : 0.0);
          ++count;
        }
        rates[rep.algorithms[a]][rep.algorithms[b]] =
            count ? score / static_cast<double>(count) : kNaN;
      }
    }
  }
  return rep;
}

EvalReport evaluate(const Dataset<double>& train, const Dataset<double>& test,
                    const EvalConfig& cfg) {
  if (test.cols() != train.cols()) {
    throw InvalidArgument("evaluate: test data has " +
                          std::to_string(test.cols()) + " columns, train has " +
                          std::to_string(train.cols()));
  }
  std::vector<TargetFunction<double>> targets;
  for (Index i = 0; i < test.rows(); ++i) {
    const Vec<double> x = test.x().row(i).transpose();
    if (cfg.model == ModelKind::ols) {
      targets.push_back(TargetFunction<double>::linear(x));
    } else {
      targets.push_back(TargetFunction<double>::logit(x, test.y()(i) == 1.0));
    }
  }
  return evaluate(train, targets, cfg);
}

EvalReport evaluate(const Dataset<double>& train,
                    const Mat<double>& test_points, const EvalConfig& cfg) {
  if (test_points.cols() != train.cols()) {
    throw InvalidArgument("evaluate: test points have wrong dimension");
  }
  std::vector<TargetFunction<double>> targets;
  for (Index i = 0; i < test_points.rows(); ++i) {
    targets.push_back(
        TargetFunction<double>::linear(test_points.row(i).transpose()));
  }
  return evaluate(train, targets, cfg);
}

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["algorithms"] = r.algorithms;
  j["ks"] = r.ks;
  nlohmann::json per_k = nlohmann::json::object();
  for (const auto& [k, means] : r.per_k) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto& [a, v] : means) row[a] = std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
    per_k[std::to_string(k)] = row;
  }
  j["per_k"] = per_k;
  nlohmann::json wr = nlohmann::json::object();
  for (const auto& [k, table] : r.winning_rate) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto& [a, inner] : table) {
      for (const auto& [b, v] : inner) {
        row[a][b] = std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
      }
    }
    wr[std::to_string(k)] = row;
  }
  j["winning_rate"] = wr;
  nlohmann::json raw = nlohmann::json::array();
  for (const auto& per_alg : r.per_test_point) {
    nlohmann::json ta = nlohmann::json::array();
    for (const auto& per_k_vals : per_alg) {
      nlohmann::json tk = nlohmann::json::array();
      for (double v : per_k_vals) {
        tk.push_back(std::isnan(v) ? nlohmann::json() : nlohmann::json(v));
      }
      ta.push_back(tk);
    }
    raw.push_back(ta);
  }
  j["per_test_point"] = raw;
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : r.exclusions) {
    ex.push_back({{"test_point", e.test_point},
                  {"algorithm", e.algorithm},
                  {"k", e.k},
                  {"reason", e.reason}});
  }
  j["exclusions"] = ex;
  j["exclusion_count"] = r.exclusions.size();
  j["config_echo"] = r.config_echo;
  j["timestamp"] = r.timestamp;
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  r.ks = j.at("ks").get<std::vector<Index>>();
  for (const auto& [k, row] : j.at("per_k").items()) {
    auto& means = r.per_k[std::stoll(k)];
    for (const auto& [a, v] : row.items()) means[a] = json_number(v);
  }
  for (const auto& [k, row] : j.at("winning_rate").items()) {
    auto& table = r.winning_rate[std::stoll(k)];
    for (const auto& [a, inner] : row.items()) {
      for (const auto& [b, v] : inner.items()) table[a][b] = json_number(v);
    }
  }
  for (const auto& ta : j.at("per_test_point")) {
    std::vector<std::vector<double>> per_alg;
    for (const auto& tk : ta) {
      std::vector<double> vals;
      for (const auto& v : tk) vals.push_back(json_number(v));
      per_alg.push_back(std::move(vals));
    }
    r.per_test_point.push_back(std::move(per_alg));
  }
  for (const auto& e : j.at("exclusions")) {
    r.exclusions.push_back({e.at("test_point").get<Index>(),
                            e.at("algorithm").get<std::string>(),
                            e.at("k").get<Index>(),
                            e.at("reason").get<std::string>()});
  }
  r.config_echo = j.at("config_echo");
  r.timestamp = j.at("timestamp").get<std::string>();
  return r;
}

std::string report_to_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "test_point,algorithm,k,effect\n";
  char buf[64];
  for (std::size_t t = 0; t < r.per_test_point.size(); ++t) {
    for (std::size_t a = 0; a < r.algorithms.size(); ++a) {
      for (std::size_t s = 0; s < r.ks.size(); ++s) {
        const double v = r.per_test_point[t][a][s];
        if (std::isnan(v)) continue;
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << t << ',' << r.algorithms[a] << ',' << r.ks[s] << ',' << buf
            << '\n';
      }
    }
  }
  return out.str();
}

ReportFormat parse_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw InvalidArgument("unknown format '" + std::string(name) +
                        "' (expected json or csv)");
}

void emit_report(const EvalReport& report, ReportFormat format,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (format == ReportFormat::json) {
    out << report_to_json(report).dump(2) << '\n';
  } else {
    out << report_to_csv(report);
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace miss
