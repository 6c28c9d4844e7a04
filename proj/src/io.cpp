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

#include "miss/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace miss {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
}

double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : j.get<double>();
}

}  // namespace

Dataset<double> parse_csv(const std::string& text, const std::string& target,
                          bool intercept, const std::string& source,
                          CsvUse use) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      lines.push_back(rest.substr(0, nl));
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) {
    throw InvalidArgument(source + ": missing header row");
  }
  const auto header = split(lines[first]);
  std::unordered_set<std::string_view> names;
  for (auto h : header) {
    if (h.empty()) throw InvalidArgument(source + ": empty column name");
    if (!names.insert(h).second) {
      throw InvalidArgument(source + ": duplicate column name '" +
                            std::string(h) + "'");
    }
  }

  std::size_t target_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == target) target_col = c;
  }
  if (target_col == header.size()) {
    std::size_t idx = 0;
    const auto* end = target.data() + target.size();
    const auto res = std::from_chars(target.data(), end, idx);
    if (target.empty() || res.ec != std::errc() || res.ptr != end ||
        idx >= header.size()) {
      throw InvalidArgument(source + ": target column '" + target +
                            "' is neither a header name nor a valid index");
    }
    target_col = idx;
  }

  std::vector<std::vector<double>> rows;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto cells = split(lines[li]);
    if (cells.size() != header.size()) {
      throw InvalidArgument(source + ": line " + std::to_string(li + 1) +
                            " has " + std::to_string(cells.size()) +
                            " fields, header has " +
                            std::to_string(header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = cells[c];
      double v = 0.0;
      const auto* end = cell.data() + cell.size();
      const auto res = std::from_chars(cell.data(), end, v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != end ||
          !std::isfinite(v)) {
        throw InvalidArgument(source + ": line " + std::to_string(li + 1) +
                              ", column '" + std::string(header[c]) +
                              "': not a finite number: '" + std::string(cell) +
                              "'");
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<Index>(rows.size());
  const auto features = static_cast<Index>(header.size()) - 1;
  const Index d = features + (intercept ? 1 : 0);
  // n == d still loads; fitting enforces n >= d + 1.
  if (n == 0) throw InvalidArgument(source + ": no data rows");
  if (use == CsvUse::training && n < d) {
    throw InvalidArgument(source + ": " + std::to_string(n) + " rows for " +
                          std::to_string(d) +
                          " columns; need at least as many rows as columns");
  }
  Mat<double> x(n, d);
  Vec<double> y(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    Index out = 0;
    if (intercept) x(i, out++) = 1.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == target_col) {
        y(i) = row[c];
      } else {
        x(i, out++) = row[c];
      }
    }
  }
  return Dataset<double>(std::move(x), std::move(y), intercept);
}

Dataset<double> load_csv(const std::string& path, const std::string& target,
                         bool intercept, CsvUse use) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), target, intercept, path, use);
}

std::string to_csv(const Dataset<double>& ds) {
  const Index skip = ds.intercept() ? 1 : 0;
  std::ostringstream out;
  for (Index j = skip; j < ds.cols(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (Index i = 0; i < ds.rows(); ++i) {
    for (Index j = skip; j < ds.cols(); ++j) out << format17(ds.x()(i, j)) << ',';
    out << format17(ds.y()(i)) << '\n';
  }
  return out.str();
}

void write_csv(const Dataset<double>& ds, const std::string& path) {
  write_text(path, to_csv(ds));
}

std::string matrix_to_csv(const Mat<double>& m, const std::string& prefix) {
  std::ostringstream out;
  for (Index j = 0; j < m.cols(); ++j) {
    out << (j ? "," : "") << prefix << j;
  }
  out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      out << (j ? "," : "") << format17(m(i, j));
    }
    out << '\n';
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

nlohmann::json to_json(const SubsetTrace& t) {
  nlohmann::json j;
  j["algorithm"] = t.algorithm;
  j["k"] = t.budget;
  j["selected"] = t.selected;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.step_scores) {
    nlohmann::json row = nlohmann::json::array();
    for (double v : s) row.push_back(number_or_null(v));
    steps.push_back(row);
  }
  j["step_scores"] = steps;
  j["step_rows"] = t.step_rows;
  j["value_exact"] = number_or_null(t.value_exact);
  j["value_first_order"] = number_or_null(t.value_first_order);
  j["value_second_order"] = number_or_null(t.value_second_order);
  j["stopped_early"] = t.stopped_early;
  j["stop_reason"] = t.stop_reason;
  return j;
}

nlohmann::json to_json(const EffectReport<double>& r) {
  nlohmann::json j;
  j["subset"] = r.subset;
  j["exact"] = number_or_null(r.exact);
  j["first_order"] = number_or_null(r.first_order);
  j["second_order"] = number_or_null(r.second_order);
  nlohmann::json orders = nlohmann::json::object();
  for (const auto& [m, v] : r.neumann_orders) {
    orders[std::to_string(m)] = number_or_null(v);
  }
  j["neumann_orders"] = orders;
  return j;
}

nlohmann::json to_json(const CounterexampleCertificate& c) {
  nlohmann::json j;
  j["theorem_id"] = to_string(c.theorem_id);
  j["p"] = c.p;
  char digest[24];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(c.dataset_digest));
  j["dataset_digest"] = digest;
  j["status"] = to_string(c.status);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& ch : c.checks) {
    checks.push_back(
        {{"name", ch.name}, {"value", number_or_null(ch.value)}, {"pass", ch.pass}});
  }
  j["checks"] = checks;
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < c.base_design.rows(); ++i) {
    std::vector<double> row;
    for (Index k = 0; k < c.base_design.cols(); ++k) {
      row.push_back(c.base_design(i, k));
    }
    rows.push_back(row);
  }
  j["base_design"] = rows;
  j["true_params"] = std::vector<double>(c.true_params.data(),
                                         c.true_params.data() + c.true_params.size());
  j["noise"] = c.noise;
  j["copies"] = c.copies;
  return j;
}

CounterexampleCertificate certificate_from_json(const nlohmann::json& j) {
  CounterexampleCertificate c;
  c.theorem_id = parse_theorem(j.at("theorem_id").get<std::string>());
  c.p = j.at("p").get<double>();
  c.dataset_digest =
      std::stoull(j.at("dataset_digest").get<std::string>(), nullptr, 16);
  c.status = parse_status(j.at("status").get<std::string>());
  for (const auto& ch : j.at("checks")) {
    c.checks.push_back({ch.at("name").get<std::string>(),
                        number_from(ch.at("value")), ch.at("pass").get<bool>()});
  }
  const auto& rows = j.at("base_design");
  const auto n = static_cast<Index>(rows.size());
  const auto d = n ? static_cast<Index>(rows[0].size()) : 0;
  c.base_design.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != d) {
      throw InvalidArgument("certificate: ragged base_design");
    }
    for (Index k = 0; k < d; ++k) {
      c.base_design(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  const auto theta = j.at("true_params").get<std::vector<double>>();
  c.true_params = Eigen::Map<const Vec<double>>(theta.data(),
                                                static_cast<Index>(theta.size()));
  c.noise = j.at("noise").get<double>();
  c.copies = j.at("copies").get<int>();
  return c;
}

nlohmann::json to_json(const Prop41Report& r) {
  nlohmann::json j;
  j["sign_consistency"] = r.sign_consistency;
  j["order_preservation"] = r.order_preservation;
  j["order_margin"] = number_or_null(r.order_margin);
  j["cancellation_agrees"] = r.cancellation_agrees;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"position", e.position},
                       {"adjusted", e.adjusted},
                       {"marginal", e.marginal},
                       {"sign_pass", e.sign_pass},
                       {"sign_margin", e.sign_margin}});
  }
  j["entries"] = entries;
  return j;
}

nlohmann::json to_json(const SyntheticConfig<double>& cfg) {
  return {{"true_params",
           std::vector<double>(cfg.true_params.data(),
                               cfg.true_params.data() + cfg.true_params.size())},
          {"noise", cfg.noise},
          {"ratio", cfg.ratio},
          {"copies", cfg.copies},
          {"seed", cfg.seed}};
}

SyntheticConfig<double> synthetic_config_from_json(const nlohmann::json& j) {
  SyntheticConfig<double> cfg;
  const auto theta = j.at("true_params").get<std::vector<double>>();
  cfg.true_params = Eigen::Map<const Vec<double>>(
      theta.data(), static_cast<Index>(theta.size()));
  cfg.noise = j.at("noise").get<double>();
  cfg.ratio = j.at("ratio").get<double>();
  cfg.copies = j.at("copies").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ClusterConfig& cfg) {
  return {{"n", cfg.n},
          {"d", cfg.d},
          {"cluster_size", cfg.cluster_size},
          {"noise_var", cfg.noise_var},
          {"n_test", cfg.n_test},
          {"seed", cfg.seed}};
}

ClusterConfig cluster_config_from_json(const nlohmann::json& j) {
  ClusterConfig cfg;
  cfg.n = j.at("n").get<Index>();
  cfg.d = j.at("d").get<Index>();
  cfg.cluster_size = j.at("cluster_size").get<Index>();
  cfg.noise_var = j.at("noise_var").get<double>();
  cfg.n_test = j.at("n_test").get<Index>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

}  // namespace miss
