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

#include "miss/cli.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "miss/counterexamples.hpp"
#include "miss/dataset.hpp"
#include "miss/effects.hpp"
#include "miss/glm.hpp"
#include "miss/harness.hpp"
#include "miss/io.hpp"
#include "miss/ols.hpp"
#include "miss/quadratic.hpp"
#include "miss/selectors.hpp"

namespace miss {
namespace {

struct Options {
  std::string data;
  std::string target_col = "y";
  bool intercept = true;
  std::string model = "ols";
  std::string algo = "lags";
  long k = 1;
  std::string ks = "1";
  long step = 1;
  double ridge = 0.0;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
  std::string test_point;
  std::string test_data;
  long test_row = 0;
  long n_test = 0;
  int threads = 0;
  std::string scoring;
  bool debug = false;
  std::string theorem = "T31";
  std::string kind = "cluster";
  long n = 0;
  long d = 0;
  int copies = 0;
  double noise = 0.0;
  double ratio = 1.0;
};

ModelKind parse_model(const std::string& name) {
  if (name == "ols") return ModelKind::ols;
  if (name == "logistic") return ModelKind::logistic;
  throw InvalidArgument("unknown model '" + name + "' (expected ols or logistic)");
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
  } else {
    write_text(o.out, text);
  }
}

std::shared_ptr<const Dataset<double>> load_data(const Options& o) {
  if (o.data.empty()) throw InvalidArgument("--data is required");
  return std::make_shared<const Dataset<double>>(
      load_csv(o.data, o.target_col, o.intercept));
}

// Test point from --test-point (features only; the ones entry is added when
// --intercept is on) or from row --test-row of --test-data.
std::pair<Vec<double>, bool> load_test_point(const Options& o, Index dim) {
  if (!o.test_point.empty()) {
    std::vector<double> vals;
    std::stringstream ss(o.test_point);
    for (std::string tok; std::getline(ss, tok, ',');) {
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw InvalidArgument("--test-point: cannot parse '" + tok + "'");
      }
      vals.push_back(v);
    }
    Vec<double> x(static_cast<Index>(vals.size()) + (o.intercept ? 1 : 0));
    Index at = 0;
    if (o.intercept) x(at++) = 1.0;
    for (double v : vals) x(at++) = v;
    if (x.size() != dim) {
      throw InvalidArgument("--test-point has " + std::to_string(x.size()) +
                            " entries after the intercept, model has " +
                            std::to_string(dim));
    }
    return {x, true};
  }
  if (o.test_data.empty()) {
    throw InvalidArgument("need --test-point or --test-data");
  }
  const auto test =
      load_csv(o.test_data, o.target_col, o.intercept, CsvUse::test_points);
  if (o.test_row < 0 || o.test_row >= test.rows()) {
    throw InvalidArgument("--test-row out of range");
  }
  if (test.cols() != dim) {
    throw InvalidArgument("--test-data has the wrong number of columns");
  }
  return {test.x().row(o.test_row).transpose(), test.y()(o.test_row) == 1.0};
}

int cmd_fit(const Options& o, std::ostream& out) {
  const auto ds = load_data(o);
  nlohmann::json j;
  j["model"] = o.model;
  j["n"] = ds->rows();
  j["d"] = ds->cols();
  j["ridge"] = o.ridge;
  if (parse_model(o.model) == ModelKind::ols) {
    const auto fit = fit_ols(ds, o.ridge);
    j["params"] = std::vector<double>(fit.params().data(),
                                      fit.params().data() + fit.dim());
    j["residual_norm"] = fit.residuals().norm();
    j["leverage_sum"] = fit.leverages().sum();
  } else {
    GlmOptions<double> opts;
    opts.ridge = o.ridge;
    const auto fit = fit_logistic(ds, opts);
    j["params"] = std::vector<double>(fit.params.data(),
                                      fit.params.data() + fit.params.size());
    j["iterations"] = fit.iterations;
    j["grad_norm"] = fit.grad_norm;
  }
  emit(o, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_miss(const Options& o, std::ostream& out) {
  const auto ds = load_data(o);
  const ModelKind model = parse_model(o.model);
  const Algorithm algo = parse_algorithm(o.algo);
  const auto [x, label] = load_test_point(o, ds->cols());
  const auto target = model == ModelKind::ols
                          ? TargetFunction<double>::linear(x)
                          : TargetFunction<double>::logit(x, label);
  SubsetTrace trace;
  if (model == ModelKind::ols) {
    const auto fit = fit_ols(ds, o.ridge);
    switch (algo) {
      case Algorithm::zam:
        trace = select_zam(fit, target, o.k);
        break;
      case Algorithm::lags:
        trace = select_lags(fit, target, o.k);
        break;
      case Algorithm::brute:
        trace = select_brute(fit, target, o.k);
        break;
      case Algorithm::pgd: {
        PgdConfig<double> cfg;
        cfg.seed = o.seed;
        trace = select_quadratic_pgd(fit, target, o.k, cfg);
        break;
      }
      case Algorithm::adaptive:
        break;
    }
  } else {
    GlmOptions<double> opts;
    opts.ridge = o.ridge;
    const auto fit = fit_logistic(ds, opts);
    switch (algo) {
      case Algorithm::zam:
        trace = select_zam(fit, target, o.k);
        break;
      case Algorithm::lags:
        trace = select_lags(fit, target, o.k);
        break;
      case Algorithm::brute:
        trace = select_brute(fit, target, o.k);
        break;
      case Algorithm::pgd:
        throw InvalidArgument("pgd needs --model ols");
      case Algorithm::adaptive:
        break;
    }
  }
  if (algo == Algorithm::adaptive) {
    AdaptiveOptions<double> opts;
    opts.step = o.step;
    opts.model = model;
    opts.ridge = o.ridge;
    std::string scoring = o.scoring;
    if (scoring.empty()) scoring = model == ModelKind::ols ? "exact" : "influence";
    if (scoring == "exact") {
      opts.scoring = AdaptiveScoring::exact_individual;
    } else if (scoring == "influence") {
      opts.scoring = AdaptiveScoring::influence_estimate;
    } else {
      throw InvalidArgument("unknown scoring '" + scoring +
                            "' (expected exact or influence)");
    }
    try {
      trace = select_adaptive(ds, target, o.k, opts);
    } catch (const SelectionError& e) {
      emit(o, to_json(e.partial()).dump(2) + "\n", out);
      throw;
    }
  }
  emit(o, to_json(trace).dump(2) + "\n", out);
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto ds = load_data(o);
  EvalConfig cfg;
  std::stringstream ss(o.algo);
  for (std::string tok; std::getline(ss, tok, ',');) {
    cfg.algorithms.push_back(parse_algorithm(tok));
  }
  for (long k : parse_budget_list(o.ks)) cfg.ks.push_back(k);
  cfg.model = parse_model(o.model);
  cfg.step = o.step;
  cfg.ridge = o.ridge;
  cfg.seed = o.seed;
  cfg.threads = o.threads;

  EvalReport rep;
  if (!o.test_data.empty()) {
    const auto test =
        load_csv(o.test_data, o.target_col, o.intercept, CsvUse::test_points);
    rep = evaluate(*ds, test, cfg);
  } else if (o.n_test > 0) {
    const auto [train, test] = train_test_split(*ds, o.n_test, o.seed);
    rep = evaluate(train, test, cfg);
  } else {
    throw InvalidArgument("eval needs --test-data or --n-test");
  }
  const ReportFormat fmt = parse_format(o.format);
  if (o.out.empty()) {
    out << (fmt == ReportFormat::json ? report_to_json(rep).dump(2) + "\n"
                                      : report_to_csv(rep));
  } else {
    emit_report(rep, fmt, o.out);
  }
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw InvalidArgument("synth needs --out PREFIX");
  nlohmann::json summary;
  if (o.kind == "cluster") {
    ClusterConfig cfg;
    if (o.n) cfg.n = o.n;
    if (o.d) cfg.d = o.d;
    if (o.copies) cfg.cluster_size = o.copies;
    if (o.noise > 0.0) cfg.noise_var = o.noise;
    if (o.n_test > 0) cfg.n_test = o.n_test;
    cfg.seed = o.seed;
    const auto [train, tests] = generate_cancellation_cluster<double>(cfg);
    write_csv(train, o.out + "_train.csv");
    const Dataset<double> test_ds(tests, Vec<double>::Zero(tests.rows()), false);
    write_csv(test_ds, o.out + "_test.csv");
    summary["config"] = to_json(cfg);
  } else if (o.kind == "label") {
    const Index n = o.n ? o.n : 12, d = o.d ? o.d : 3;
    SplitMix64 rng(o.seed);
    Mat<double> x(n, d);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      for (Index j = 1; j < d; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
    }
    SyntheticConfig<double> cfg;
    cfg.true_params.resize(d);
    for (Index j = 0; j < d; ++j) cfg.true_params(j) = rng.uniform(-1.0, 1.0);
    cfg.noise = o.noise > 0.0 ? o.noise : 1.0;
    cfg.ratio = o.ratio;
    cfg.copies = o.copies ? o.copies : 1;
    cfg.seed = o.seed;
    const auto ds = generate_label_process(x, cfg);
    write_csv(ds, o.out + "_train.csv");
    const Mat<double> tp =
        label_process_test_point(x, cfg.ratio).transpose();
    write_csv(Dataset<double>(tp, Vec<double>::Zero(1), true),
              o.out + "_test.csv");
    summary["config"] = to_json(cfg);
  } else {
    CertifyOptions opts;
    if (o.n) opts.n = o.n;
    if (o.d) opts.d = o.d;
    if (o.copies) opts.copies = o.copies;
    if (o.noise > 0.0) opts.noise = o.noise;
    const auto cert = certify(parse_theorem(o.kind), o.seed, opts);
    const auto ds = build_instance(cert.base_design, cert.true_params,
                                   cert.noise, cert.p, cert.copies);
    write_csv(ds, o.out + "_train.csv");
    const Mat<double> tp =
        label_process_test_point(cert.base_design, cert.p).transpose();
    write_csv(Dataset<double>(tp, Vec<double>::Zero(1), true),
              o.out + "_test.csv");
    write_text(o.out + "_certificate.json", to_json(cert).dump(2) + "\n");
    summary["certificate_status"] = to_string(cert.status);
  }
  summary["train"] = o.out + "_train.csv";
  summary["test"] = o.out + "_test.csv";
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_certify(const Options& o, std::ostream& out) {
  CertifyOptions opts;
  if (o.n) opts.n = o.n;
  if (o.d) opts.d = o.d;
  if (o.copies) opts.copies = o.copies;
  if (o.noise > 0.0) opts.noise = o.noise;
  const TheoremId id = parse_theorem(o.theorem);
  const auto cert = certify(id, o.seed, opts);
  nlohmann::json j = to_json(cert);
  if (id == TheoremId::T42 || id == TheoremId::T36) {
    j["prop41"] = to_json(verify_prop41(cert));
  }
  emit(o, j.dump(2) + "\n", out);
  return cert.status == CertificateStatus::fail ? kExitNumerical : kExitOk;
}

}  // namespace

std::vector<long> parse_budget_list(const std::string& text) {
  auto number = [&](std::string_view s) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw InvalidArgument("cannot parse budget '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<long> out;
  if (text.empty()) return out;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const long a = number(std::string_view(text).substr(0, colon));
    const long b = number(std::string_view(text).substr(colon + 1));
    if (a > b) throw InvalidArgument("empty budget range '" + text + "'");
    for (long k = a; k <= b; ++k) out.push_back(k);
    return out;
  }
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(number(tok));
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Most influential subset selection for linear and logistic models",
               "miss"};
  app.require_subcommand(1);
  Options o;

  auto data_opts = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "training CSV");
    sub->add_option("--target-col", o.target_col, "target column name or index");
    sub->add_flag("--intercept,!--no-intercept", o.intercept,
                  "prepend a ones column (default on)");
    sub->add_option("--model", o.model, "ols or logistic");
    sub->add_option("--ridge", o.ridge, "ridge penalty");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out, "output path (default stdout)");
    sub->add_flag("--debug", o.debug, "cross-check downdates against refits");
  };

  auto* fit = app.add_subcommand("fit", "fit a model and print a summary");
  data_opts(fit);

  auto* miss = app.add_subcommand("miss", "run one selector and print its trace");
  data_opts(miss);
  miss->add_option("--algo", o.algo, "zam, lags, adaptive, pgd or brute");
  miss->add_option("--k", o.k, "budget");
  miss->add_option("--step", o.step, "adaptive step size");
  miss->add_option("--scoring", o.scoring, "adaptive scoring: exact or influence");
  miss->add_option("--test-point", o.test_point, "comma separated features");
  miss->add_option("--test-data", o.test_data, "CSV holding test points");
  miss->add_option("--test-row", o.test_row, "row of --test-data");

  auto* eval = app.add_subcommand("eval", "evaluate selectors over test points");
  data_opts(eval);
  eval->add_option("--algo", o.algo, "comma separated algorithms");
  eval->add_option("--ks", o.ks, "budgets: list a,b,c or range a:b");
  eval->add_option("--step", o.step, "adaptive step size");
  eval->add_option("--test-data", o.test_data, "CSV of test points");
  eval->add_option("--n-test", o.n_test, "hold out this many training rows");
  eval->add_option("--threads", o.threads, "worker threads");
  eval->add_option("--format", o.format, "json or csv");

  auto* synth = app.add_subcommand("synth", "write synthetic datasets");
  synth->add_option("--kind", o.kind, "cluster, label, T31, T35, T36 or T42");
  synth->add_option("--n", o.n, "rows");
  synth->add_option("--d", o.d, "columns");
  synth->add_option("--copies", o.copies, "duplicates or cluster size");
  synth->add_option("--noise", o.noise, "noise scale (variance for cluster)");
  synth->add_option("--ratio", o.ratio, "label-process ratio p");
  synth->add_option("--n-test", o.n_test, "test points (cluster)");
  synth->add_option("--seed", o.seed, "random seed");
  synth->add_option("--out", o.out, "output file prefix");

  auto* cert = app.add_subcommand("certify", "construct and check an instance");
  cert->add_option("--theorem", o.theorem, "T31, T35, T36 or T42");
  cert->add_option("--n", o.n, "base rows");
  cert->add_option("--d", o.d, "base columns");
  cert->add_option("--copies", o.copies, "copies (T35)");
  cert->add_option("--noise", o.noise, "label noise");
  cert->add_option("--seed", o.seed, "random seed");
  cert->add_option("--out", o.out, "output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const bool prior_debug = debug_checks().load();
  debug_checks().store(o.debug || prior_debug);
  try {
    int code = kExitOk;
    if (*fit) code = cmd_fit(o, out);
    if (*miss) code = cmd_miss(o, out);
    if (*eval) code = cmd_eval(o, out);
    if (*synth) code = cmd_synth(o, out);
    if (*cert) code = cmd_certify(o, out);
    debug_checks().store(prior_debug);
    return code;
  } catch (const NumericalError& e) {
    debug_checks().store(prior_debug);
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    debug_checks().store(prior_debug);
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    debug_checks().store(prior_debug);
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace miss
