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

#include "miss/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "miss/effects.hpp"
#include "miss/ols.hpp"
#include "miss/rng.hpp"
#include "miss/selectors.hpp"

namespace miss {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool gram_invertible(const Mat<double>& x) {
  Eigen::LDLT<Mat<double>> ldlt(x.transpose() * x);
  if (ldlt.info() != Eigen::Success) return false;
  const Vec<double> piv = ldlt.vectorD();
  return piv.minCoeff() > kPivotTolerance * piv.cwiseAbs().maxCoeff();
}

Vec<double> draw_true_params(Index d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vec<double> theta(d);
  for (Index j = 0; j < d; ++j) theta(j) = rng.uniform(-1.0, 1.0);
  return theta;
}

// Interval of p on which v_1 and v_n are both positive.
struct Bracket {
  double lo;
  double hi;
};

Bracket positivity_bracket(const PairLeverage& h, int c) {
  const double tiny = 1e-14 * (h.h11 + h.hnn);
  if (std::abs(h.h1n) <= tiny) return {1e-6, 1e6};
  if (h.h1n < 0.0) return {-h.h1n / h.hnn, -h.h11 / h.h1n};
  return {c * h.h1n / (1.0 - c * h.hnn), (1.0 - c * h.h11) / (c * h.h1n)};
}

std::string bracket_text(double lo, double hi) {
  std::ostringstream out;
  out.precision(17);
  out << "(" << lo << ", " << hi << ")";
  return out.str();
}

// Root of f at its first sign change over a grid on (lo, hi), shrunk away
// from both endpoints, refined by bisection. Log spacing needs lo > 0.
std::optional<double> first_root(const std::function<double(double)>& f,
                                 double lo, double hi, bool log_grid) {
  double a, b;
  if (log_grid) {
    a = lo * std::pow(hi / lo, kSearchShrink);
    b = hi * std::pow(lo / hi, kSearchShrink);
  } else {
    a = lo + kSearchShrink * (hi - lo);
    b = hi - kSearchShrink * (hi - lo);
  }
  auto point = [&](int k) {
    const double t = static_cast<double>(k) / (kSearchGridPoints - 1);
    return log_grid ? a * std::pow(b / a, t) : a + t * (b - a);
  };
  double prev_p = point(0), prev_f = f(prev_p);
  for (int k = 1; k < kSearchGridPoints; ++k) {
    const double p = point(k), fp = f(p);
    if (std::isfinite(prev_f) && std::isfinite(fp) &&
        (prev_f < 0.0) != (fp < 0.0)) {
      double l = prev_p, r = p;
      const bool l_neg = prev_f < 0.0;
      for (int it = 0; it < 200 && r - l > 1e-15 * std::abs(r); ++it) {
        const double m = log_grid ? std::sqrt(l * r) : 0.5 * (l + r);
        if ((f(m) < 0.0) == l_neg) {
          l = m;
        } else {
          r = m;
        }
      }
      return 0.5 * (l + r);
    }
    prev_p = p;
    prev_f = fp;
  }
  return std::nullopt;
}

// p whose ratio v_n / v_1 sits at the geometric centre of (lower, upper).
double search_ratio_window(const PairLeverage& h, int c, double lower,
                           double upper, const char* what) {
  const Bracket br = positivity_bracket(h, c);
  if (!(br.lo < br.hi) || !(br.lo > 0.0)) {
    throw SearchExhausted(std::string(what) + ": positivity interval " +
                              bracket_text(br.lo, br.hi) + " is empty",
                          br.lo, br.hi);
  }
  const double centre = 0.5 * (std::log(lower) + std::log(upper));
  auto f = [&](double p) {
    const double ratio = influence_ratio(h, p, c);
    return ratio > 0.0 ? std::log(ratio) - centre : kNaN;
  };
  const auto root = first_root(f, br.lo, br.hi, /*log_grid=*/true);
  if (root) {
    const double ratio = influence_ratio(h, *root, c);
    if (ratio - lower > kStrictMargin && upper - ratio > kStrictMargin) {
      return *root;
    }
  }
  throw SearchExhausted(std::string(what) + ": no p in " +
                            bracket_text(br.lo, br.hi) +
                            " meets the window " +
                            bracket_text(lower, upper) + " with margin",
                        br.lo, br.hi);
}

class CheckList {
 public:
  explicit CheckList(std::vector<CertificateCheck>& out) : out_(out) {}

  bool margin(const std::string& name, double value,
              double threshold = 0.0) {
    const bool pass = value > threshold;
    out_.push_back({name, value, pass});
    return pass;
  }

  bool flag(const std::string& name, bool pass, double value) {
    out_.push_back({name, value, pass});
    return pass;
  }

 private:
  std::vector<CertificateCheck>& out_;
};

double gap_tolerance(double reference) {
  return 1e-10 * std::max(1.0, std::abs(reference));
}

std::vector<RowId> sorted(std::vector<RowId> ids) {
  std::sort(ids.begin(), ids.end());
  return ids;
}

double max_excluding(const Vec<double>& v, std::span<const Index> skip) {
  double best = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::find(skip.begin(), skip.end(), i) != skip.end()) continue;
    best = std::max(best, v(i));
  }
  return best;
}

struct Instance {
  std::shared_ptr<const Dataset<double>> ds;
  TargetFunction<double> target;
  OlsFit<double> fit;
  Index first;  // position of the first copy of sample 1
  Index last;   // position of the last copy of sample n
};

Instance rebuild(const CounterexampleCertificate& cert) {
  auto ds = std::make_shared<const Dataset<double>>(build_instance(
      cert.base_design, cert.true_params, cert.noise, cert.p, cert.copies));
  auto target = TargetFunction<double>::linear(
      label_process_test_point(cert.base_design, cert.p));
  auto fit = fit_ols(ds, 0.0);
  const Index last = ds->rows() - 1;
  return {std::move(ds), std::move(target), std::move(fit), 0, last};
}

void checks_t31(CounterexampleCertificate& cert) {
  const auto inst = rebuild(cert);
  const auto& fit = inst.fit;
  const Index one = inst.first, n = inst.last;
  const Vec<double> v = influence_estimates(fit, inst.target);
  const Vec<double> a = individual_effects(fit, inst.target);
  const double h11 = fit.leverage(one), hnn = fit.leverage(n);
  const double ratio = v(n) / v(one);
  const double upper = (1.0 - hnn) / (1.0 - h11);

  CheckList c(cert.checks);
  c.margin("v1_positive", v(one));
  c.margin("vn_positive", v(n));
  c.margin("ratio_above_one", ratio - 1.0, kStrictMargin);
  c.margin("ratio_below_leverage_bound", upper - ratio, kStrictMargin);
  const auto zam = select_zam(fit, inst.target, 1);
  c.flag("zam_selects_n",
         zam.selected == std::vector<RowId>{fit.dataset().row_id(n)},
         v(n) - max_excluding(v, std::array<Index, 1>{n}));
  const Index skip_one[] = {one};
  c.margin("sample_1_has_max_effect", a(one) - max_excluding(a, skip_one));
  const auto brute = select_brute(fit, inst.target, 1, fit.rows());
  c.flag("brute_selects_1",
         brute.selected == std::vector<RowId>{fit.dataset().row_id(one)},
         brute.value_exact);
  c.margin("zam_gap_to_optimum", brute.value_exact - zam.value_exact,
           gap_tolerance(brute.value_exact));
}

void checks_t35(CounterexampleCertificate& cert) {
  const auto inst = rebuild(cert);
  const auto& fit = inst.fit;
  const int copies = cert.copies;
  const Index n_rows = fit.rows();
  const Index one = inst.first, n = inst.last;
  const Vec<double> v = influence_estimates(fit, inst.target);
  const Vec<double> a = individual_effects(fit, inst.target);
  const double h11 = fit.leverage(one), hnn = fit.leverage(n);
  const double ratio = v(n) / v(one);
  const double lower = (1.0 - hnn) / (1.0 - h11);
  const double upper = (1.0 - copies * hnn) / (1.0 - copies * h11);

  CheckList c(cert.checks);
  c.margin("h11_above_hnn", h11 - hnn);
  c.margin("leverage_below_inverse_copies", 1.0 / copies - std::max(h11, hnn));
  c.margin("v1_positive", v(one));
  c.margin("vn_positive", v(n));
  c.margin("ratio_above_lower", ratio - lower, kStrictMargin);
  c.margin("ratio_below_upper", upper - ratio, kStrictMargin);
  c.margin("individual_n_above_1", a(n) - a(one));

  IndexSet group_one, group_n;
  for (Index k = 0; k < copies; ++k) {
    group_one.push_back(k);
    group_n.push_back(n_rows - copies + k);
  }
  c.margin("group_1_above_group_n",
           actual_effect_exact(fit, group_one, inst.target) -
               actual_effect_exact(fit, group_n, inst.target));

  const auto brute = select_brute(fit, inst.target, copies, n_rows);
  const auto lags = select_lags(fit, inst.target, copies);
  AdaptiveOptions<double> opts;
  const auto adaptive =
      select_adaptive(fit.dataset_ptr(), inst.target, copies, opts);
  c.margin("lags_gap_to_optimum", brute.value_exact - lags.value_exact,
           gap_tolerance(brute.value_exact));
  c.margin("adaptive_gap_to_optimum", brute.value_exact - adaptive.value_exact,
           gap_tolerance(brute.value_exact));
}

// Shared by T36 and T42; returns false when a hypothesis fails.
bool cancellation_hypotheses(CheckList& c, const Instance& inst, double p,
                             Vec<double>& a) {
  const auto& fit = inst.fit;
  const Index one = inst.first, n = inst.last;
  a = individual_effects(fit, inst.target);
  const PairLeverage h{fit.leverage(one), fit.leverage(n),
                       fit.cross_leverage(one, n)};
  const Index pair[] = {one, n};
  const Index solo[] = {n};
  bool ok = true;
  ok &= c.margin("cancellation_condition_negative",
                 -cancellation_condition(h, p), kStrictMargin);
  ok &= c.margin("A1_positive", a(one));
  ok &= c.margin("An_positive", a(n));
  ok &= c.margin("pair_effect_below_An",
                 actual_effect_exact(fit, solo, inst.target) -
                     actual_effect_exact(fit, pair, inst.target));
  return ok;
}

void checks_t36(CounterexampleCertificate& cert) {
  const auto inst = rebuild(cert);
  const auto& fit = inst.fit;
  const Index one = inst.first, n = inst.last;
  CheckList c(cert.checks);
  Vec<double> a;
  cancellation_hypotheses(c, inst, cert.p, a);
  const auto lags = select_lags(fit, inst.target, 2);
  const Index top2[] = {one, n};
  c.flag("lags_selects_1_and_n",
         sorted(lags.selected) ==
             sorted({fit.dataset().row_id(one), fit.dataset().row_id(n)}),
         std::min(a(one), a(n)) - max_excluding(a, top2));
  const auto brute = select_brute(fit, inst.target, 2, fit.rows());
  c.margin("lags_gap_to_optimum", brute.value_exact - lags.value_exact,
           gap_tolerance(brute.value_exact));
}

CertificateStatus checks_t42(CounterexampleCertificate& cert) {
  const auto inst = rebuild(cert);
  const auto& fit = inst.fit;
  const auto& ds = fit.dataset();
  const Index n = inst.last;
  CheckList c(cert.checks);
  Vec<double> a;
  bool hypotheses = cancellation_hypotheses(c, inst, cert.p, a);
  const auto brute = select_brute(fit, inst.target, 2, fit.rows());
  const bool n_in_opt =
      std::find(brute.selected.begin(), brute.selected.end(),
                ds.row_id(n)) != brute.selected.end();
  hypotheses &= c.flag("n_in_brute_optimum", n_in_opt, brute.value_exact);
  if (!hypotheses) return CertificateStatus::hypothesis_violated;

  const Index skip_n[] = {n};
  c.margin("An_is_max_individual_effect", a(n) - max_excluding(a, skip_n));

  AdaptiveOptions<double> opts;
  const auto adaptive = select_adaptive(fit.dataset_ptr(), inst.target, 2, opts);
  c.flag("adaptive_first_pick_n",
         !adaptive.selected.empty() && adaptive.selected.front() == ds.row_id(n),
         adaptive.selected.empty() ? kNaN
                                   : static_cast<double>(adaptive.selected.front()));
  const double diff = brute.value_exact - adaptive.value_exact;
  c.flag("adaptive_matches_brute",
         sorted(adaptive.selected) == sorted(brute.selected) ||
             std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(brute.value_exact)),
         diff);

  const double base = actual_effect_exact(fit, skip_n, inst.target);
  double best_marginal = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const Index pair[] = {i, n};
    best_marginal = std::max(
        best_marginal, actual_effect_exact(fit, pair, inst.target) - base);
  }
  if (best_marginal < 0.0) {
    c.flag("case1_returns_n_only",
           adaptive.selected == std::vector<RowId>{ds.row_id(n)} &&
               adaptive.stopped_early,
           best_marginal);
  } else {
    c.flag("case2_returns_pair", adaptive.selected.size() == 2, best_marginal);
  }
  return CertificateStatus::pass;
}

void run_checks(CounterexampleCertificate& cert) {
  cert.checks.clear();
  cert.dataset_digest = dataset_digest(build_instance(
      cert.base_design, cert.true_params, cert.noise, cert.p, cert.copies));
  CertificateStatus status = CertificateStatus::pass;
  switch (cert.theorem_id) {
    case TheoremId::T31:
      checks_t31(cert);
      break;
    case TheoremId::T35:
      checks_t35(cert);
      break;
    case TheoremId::T36:
      checks_t36(cert);
      break;
    case TheoremId::T42:
      status = checks_t42(cert);
      break;
  }
  if (status == CertificateStatus::pass) {
    const bool all = std::all_of(cert.checks.begin(), cert.checks.end(),
                                 [](const auto& ch) { return ch.pass; });
    status = all ? CertificateStatus::pass : CertificateStatus::fail;
  }
  cert.status = status;
}

void require_h11_above_hnn(const PairLeverage& h, const char* what) {
  if (!(h.h11 > h.hnn)) {
    throw InvalidArgument(std::string(what) +
                          ": precondition h_11 > h_nn fails (h_11 = " +
                          std::to_string(h.h11) +
                          ", h_nn = " + std::to_string(h.hnn) + ")");
  }
}

void require_design(const Mat<double>& x_base, const char* what) {
  if (x_base.rows() < x_base.cols() + 2) {
    throw InvalidArgument(std::string(what) + ": need n >= d + 2 base rows");
  }
  if (((x_base.col(0).array() - 1.0).abs() > 0.0).any()) {
    throw InvalidArgument(std::string(what) +
                          ": first column of the base design must be ones");
  }
  if (!gram_invertible(x_base)) {
    throw InvalidArgument(std::string(what) + ": Gram matrix is singular");
  }
  if (!gram_invertible(x_base.middleRows(1, x_base.rows() - 2))) {
    throw InvalidArgument(std::string(what) +
                          ": interior rows do not span the column space");
  }
}

CounterexampleCertificate start(TheoremId id, const Mat<double>& x_base,
                                double noise, int copies, std::uint64_t seed) {
  if (!(noise > 0.0)) throw InvalidArgument("noise must be positive");
  CounterexampleCertificate cert;
  cert.theorem_id = id;
  cert.base_design = x_base;
  cert.true_params = draw_true_params(x_base.cols(), seed);
  cert.noise = noise;
  cert.copies = copies;
  return cert;
}

}  // namespace

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::T31:
      return "T31";
    case TheoremId::T35:
      return "T35";
    case TheoremId::T36:
      return "T36";
    case TheoremId::T42:
      return "T42";
  }
  return "?";
}

TheoremId parse_theorem(std::string_view name) {
  if (name == "T31") return TheoremId::T31;
  if (name == "T35") return TheoremId::T35;
  if (name == "T36") return TheoremId::T36;
  if (name == "T42") return TheoremId::T42;
  throw InvalidArgument("unknown theorem id '" + std::string(name) +
                        "' (expected T31, T35, T36 or T42)");
}

std::string to_string(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::pass:
      return "pass";
    case CertificateStatus::fail:
      return "fail";
    case CertificateStatus::hypothesis_violated:
      return "hypothesis_violated";
  }
  return "?";
}

CertificateStatus parse_status(std::string_view name) {
  if (name == "pass") return CertificateStatus::pass;
  if (name == "fail") return CertificateStatus::fail;
  if (name == "hypothesis_violated") return CertificateStatus::hypothesis_violated;
  throw InvalidArgument("unknown certificate status '" + std::string(name) + "'");
}

const CertificateCheck* CounterexampleCertificate::find(
    std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

PairLeverage pair_leverage(const Mat<double>& x_base, int copies) {
  if (copies < 1) throw InvalidArgument("pair_leverage: copies must be >= 1");
  const Index n = x_base.rows();
  const Vec<double> x1 = x_base.row(0).transpose();
  const Vec<double> xn = x_base.row(n - 1).transpose();
  Mat<double> gram = x_base.transpose() * x_base;
  gram += (copies - 1) * (x1 * x1.transpose() + xn * xn.transpose());
  Eigen::LDLT<Mat<double>> ldlt(gram);
  detail::check_pivots(ldlt, 0.0, "pair_leverage: Gram matrix");
  const Vec<double> w1 = ldlt.solve(x1), wn = ldlt.solve(xn);
  return {x1.dot(w1), xn.dot(wn), x1.dot(wn)};
}

double influence_ratio(const PairLeverage& h, double p, int copies) {
  const double c = copies;
  const double v1 = (h.h11 + p * h.h1n) * (1.0 - c * h.h11 - p * c * h.h1n);
  const double vn = (p * h.hnn + h.h1n) * (p - p * c * h.hnn - c * h.h1n);
  return vn / v1;
}

double cancellation_condition(const PairLeverage& h, double p) {
  return h.h1n * p + h.h11 * (1.0 - h.hnn) + h.h1n * h.h1n;
}

Vec<double> label_process_test_point(const Mat<double>& x_base, double p) {
  if (std::abs(p + 1.0) < 1e-12) {
    throw InvalidArgument("test point undefined at p = -1");
  }
  return (x_base.row(0) + p * x_base.row(x_base.rows() - 1)).transpose() /
         (p + 1.0);
}

Dataset<double> build_instance(const Mat<double>& x_base,
                               const Vec<double>& true_params, double noise,
                               double p, int copies) {
  SyntheticConfig<double> cfg;
  cfg.true_params = true_params;
  cfg.noise = noise;
  cfg.ratio = p;
  cfg.copies = copies;
  return generate_label_process(x_base, cfg);
}

std::uint64_t dataset_digest(const Dataset<double>& ds) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&](double value) {
    const auto q = static_cast<std::int64_t>(std::llround(value * 1e12));
    auto bits = static_cast<std::uint64_t>(q);
    for (int b = 0; b < 8; ++b) {
      hash ^= (bits >> (8 * b)) & 0xffU;
      hash *= 0x100000001b3ULL;
    }
  };
  for (Index i = 0; i < ds.rows(); ++i) {
    for (Index j = 0; j < ds.cols(); ++j) mix(ds.x()(i, j));
  }
  for (Index i = 0; i < ds.rows(); ++i) mix(ds.y()(i));
  return hash;
}

Mat<double> draw_base_design(Index n, Index d, std::uint64_t seed,
                             TheoremId theorem, int copies) {
  if (d < 1 || n < d + 2) {
    throw InvalidArgument("draw_base_design: need d >= 1 and n >= d + 2");
  }
  const int c = theorem == TheoremId::T35 ? copies : 1;
  if (theorem == TheoremId::T35 && copies < 2) {
    throw InvalidArgument("draw_base_design: T35 needs copies >= 2");
  }
  SplitMix64 rng(seed);
  for (int attempt = 0; attempt < kMaxDesignResamples; ++attempt) {
    Mat<double> x(n, d);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      for (Index j = 1; j < d; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
    }
    if (!gram_invertible(x) || !gram_invertible(x.middleRows(1, n - 2))) {
      continue;
    }
    const PairLeverage h = pair_leverage(x, c);
    switch (theorem) {
      case TheoremId::T31:
      case TheoremId::T35:
        if (h.h11 > h.hnn) return x;
        break;
      case TheoremId::T36:
      case TheoremId::T42:
        if (h.h1n < 0.0) return x;
        break;
    }
  }
  throw NumericalError("draw_base_design: no design met the preconditions in " +
                       std::to_string(kMaxDesignResamples) + " draws");
}

CounterexampleCertificate find_p_theorem31(const Mat<double>& x_base,
                                           double noise, std::uint64_t seed) {
  require_design(x_base, "find_p_theorem31");
  const PairLeverage h = pair_leverage(x_base, 1);
  require_h11_above_hnn(h, "find_p_theorem31");
  auto cert = start(TheoremId::T31, x_base, noise, 1, seed);
  cert.p = search_ratio_window(h, 1, 1.0, (1.0 - h.hnn) / (1.0 - h.h11),
                               "find_p_theorem31");
  run_checks(cert);
  return cert;
}

CounterexampleCertificate find_p_theorem35(const Mat<double>& x_base,
                                           double noise, int copies,
                                           std::uint64_t seed) {
  if (copies < 2) throw InvalidArgument("find_p_theorem35: copies must be >= 2");
  require_design(x_base, "find_p_theorem35");
  const PairLeverage h = pair_leverage(x_base, copies);
  require_h11_above_hnn(h, "find_p_theorem35");
  if (!(std::max(h.h11, h.hnn) * copies < 1.0)) {
    throw InvalidArgument("find_p_theorem35: per-copy leverage not below 1/c");
  }
  auto cert = start(TheoremId::T35, x_base, noise, copies, seed);
  cert.p = search_ratio_window(h, copies, (1.0 - h.hnn) / (1.0 - h.h11),
                               (1.0 - copies * h.hnn) / (1.0 - copies * h.h11),
                               "find_p_theorem35");
  run_checks(cert);
  return cert;
}

CounterexampleCertificate find_p_theorem36(const Mat<double>& x_base,
                                           double noise, std::uint64_t seed) {
  require_design(x_base, "find_p_theorem36");
  const PairLeverage h = pair_leverage(x_base, 1);
  if (std::abs(h.h1n) <= 1e-14 * (h.h11 + h.hnn)) {
    throw InvalidArgument("find_p_theorem36: precondition h_1n != 0 fails");
  }
  // Both individual effects are positive on (lo, hi). For h_1n > 0 that
  // interval is (-h_11/h_1n, -h_1n/h_nn); only its part above p = -1 keeps
  // the test point's orientation.
  double lo, hi;
  bool log_grid;
  if (h.h1n < 0.0) {
    lo = -h.h1n / h.hnn;
    hi = -h.h11 / h.h1n;
    log_grid = true;
  } else {
    lo = std::max(-h.h11 / h.h1n, -1.0);
    hi = -h.h1n / h.hnn;
    log_grid = false;
  }
  if (!(lo < hi)) {
    throw SearchExhausted("find_p_theorem36: positivity interval " +
                              bracket_text(lo, hi) + " is empty",
                          lo, hi);
  }
  auto cond = [&](double p) { return cancellation_condition(h, p); };
  // The condition is affine in p; the cancellation window runs from its
  // root (or the interval end) to the far endpoint where it is negative.
  double a = lo, b = hi;
  if (const auto root = first_root(cond, lo, hi, log_grid)) {
    if (cond(hi) < 0.0) {
      a = *root;
    } else {
      b = *root;
    }
  } else if (!(cond(0.5 * (lo + hi)) < 0.0)) {
    throw SearchExhausted("find_p_theorem36: cancellation condition never "
                          "holds on " + bracket_text(lo, hi),
                          lo, hi);
  }
  const double p = log_grid ? std::sqrt(a * b) : 0.5 * (a + b);
  if (!(-cond(p) > kStrictMargin)) {
    throw SearchExhausted("find_p_theorem36: cancellation window " +
                              bracket_text(a, b) + " too narrow",
                          lo, hi);
  }
  auto cert = start(TheoremId::T36, x_base, noise, 1, seed);
  cert.p = p;
  run_checks(cert);
  return cert;
}

CounterexampleCertificate verify_theorem42(
    const CounterexampleCertificate& cancellation) {
  if (cancellation.theorem_id != TheoremId::T36 &&
      cancellation.theorem_id != TheoremId::T42) {
    throw InvalidArgument("verify_theorem42: needs a cancellation certificate");
  }
  CounterexampleCertificate cert = cancellation;
  cert.theorem_id = TheoremId::T42;
  run_checks(cert);
  return cert;
}

Prop41Report verify_prop41(const Dataset<double>& ds,
                           const TargetFunction<double>& target,
                           double cancellation_value) {
  auto shared = std::make_shared<const Dataset<double>>(ds);
  const auto fit = fit_ols(shared, 0.0);
  const Index n = fit.rows() - 1;
  const Index removed[] = {n};
  const auto refit = refit_without(fit, removed);
  const Vec<double> adjusted = individual_effects(refit, target);
  const double base = actual_effect_exact(fit, removed, target);

  Prop41Report rep;
  rep.sign_consistency = true;
  Vec<double> pair_effects(n);
  for (Index i = 0; i < n; ++i) {
    const Index pair[] = {i, n};
    pair_effects(i) = actual_effect_exact(fit, pair, target);
    Prop41Entry e;
    e.position = i;
    e.adjusted = adjusted(i);
    e.marginal = pair_effects(i) - base;
    e.sign_margin = std::min(std::abs(e.adjusted), std::abs(e.marginal));
    e.sign_pass = (e.adjusted > 0.0) == (e.marginal > 0.0) &&
                  e.sign_margin > 1e-10;
    rep.sign_consistency &= e.sign_pass;
    rep.entries.push_back(e);
  }

  // Interior positions 1 .. n-1 (samples 2 .. n-1).
  IndexSet by_adjusted, by_pair;
  for (Index i = 1; i < n; ++i) {
    by_adjusted.push_back(i);
    by_pair.push_back(i);
  }
  std::sort(by_adjusted.begin(), by_adjusted.end(),
            [&](Index x, Index y) { return adjusted(x) < adjusted(y); });
  std::sort(by_pair.begin(), by_pair.end(),
            [&](Index x, Index y) { return pair_effects(x) < pair_effects(y); });
  rep.order_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < by_adjusted.size(); ++k) {
    rep.order_margin = std::min(
        {rep.order_margin, adjusted(by_adjusted[k]) - adjusted(by_adjusted[k - 1]),
         pair_effects(by_pair[k]) - pair_effects(by_pair[k - 1])});
  }
  rep.order_preservation = by_adjusted == by_pair && rep.order_margin > 1e-10;
  rep.cancellation_agrees = (adjusted(0) < 0.0) == (cancellation_value < 0.0);
  return rep;
}

Prop41Report verify_prop41(const CounterexampleCertificate& cancellation) {
  const auto ds = build_instance(cancellation.base_design,
                                 cancellation.true_params, cancellation.noise,
                                 cancellation.p, cancellation.copies);
  const auto target = TargetFunction<double>::linear(
      label_process_test_point(cancellation.base_design, cancellation.p));
  const auto fit = fit_ols(ds, 0.0);
  const Index n = fit.rows() - 1;
  const PairLeverage h{fit.leverage(0), fit.leverage(n),
                       fit.cross_leverage(0, n)};
  return verify_prop41(ds, target, cancellation_condition(h, cancellation.p));
}

CounterexampleCertificate reverify(const CounterexampleCertificate& cert) {
  CounterexampleCertificate out = cert;
  run_checks(out);
  return out;
}

CounterexampleCertificate certify(TheoremId theorem, std::uint64_t seed,
                                  const CertifyOptions& opts) {
  const Mat<double> x =
      draw_base_design(opts.n, opts.d, seed, theorem, opts.copies);
  switch (theorem) {
    case TheoremId::T31:
      return find_p_theorem31(x, opts.noise, seed);
    case TheoremId::T35:
      return find_p_theorem35(x, opts.noise, opts.copies, seed);
    case TheoremId::T36:
      return find_p_theorem36(x, opts.noise, seed);
    case TheoremId::T42:
      return verify_theorem42(find_p_theorem36(x, opts.noise, seed));
  }
  throw InvalidArgument("certify: unknown theorem");
}

}  // namespace miss
