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

// Constructs label-process instances on which the greedy heuristics provably
// misbehave, and certifies each instance against exhaustive search.
//
// Sample 1 is the first base row and sample n the last. Under the label
// process y = X theta* - e, e = (eps, 0, ..., 0, p eps), with the test point
// x_test = (x_1 + p x_n) / (p + 1), every score of interest is a rational
// function of p and the three leverages h_11, h_nn, h_1n. The searches below
// locate a p inside the regime each statement needs; the certificate then
// re-derives everything numerically from the constructed dataset.

#ifndef MISS_COUNTEREXAMPLES_HPP_
#define MISS_COUNTEREXAMPLES_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "miss/common.hpp"
#include "miss/dataset.hpp"
#include "miss/target.hpp"

namespace miss {

enum class TheoremId { T31, T35, T36, T42 };

std::string to_string(TheoremId id);
TheoremId parse_theorem(std::string_view name);

struct CertificateCheck {
  std::string name;
  double value = 0.0;
  bool pass = false;
};

enum class CertificateStatus { pass, fail, hypothesis_violated };

std::string to_string(CertificateStatus status);
CertificateStatus parse_status(std::string_view name);

struct CounterexampleCertificate {
  TheoremId theorem_id = TheoremId::T31;
  double p = 0.0;
  std::uint64_t dataset_digest = 0;
  std::vector<CertificateCheck> checks;
  CertificateStatus status = CertificateStatus::fail;

  // Everything needed to rebuild the instance.
  Mat<double> base_design;
  Vec<double> true_params;
  double noise = 1.0;
  int copies = 1;

  bool passed() const { return status == CertificateStatus::pass; }
  const CertificateCheck* find(std::string_view name) const;
};

// Raised when no p in the searched interval meets the strict window.
class SearchExhausted : public NumericalError {
 public:
  SearchExhausted(const std::string& what, double lo, double hi)
      : NumericalError(what), lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_;
};

inline constexpr int kSearchGridPoints = 256;
inline constexpr double kSearchShrink = 1e-3;
inline constexpr double kStrictMargin = 1e-8;
inline constexpr int kMaxDesignResamples = 100;

// Leverages of samples 1 and n in the design where both are replicated
// `copies` times (per-copy values).
struct PairLeverage {
  double h11 = 0.0;
  double hnn = 0.0;
  double h1n = 0.0;
};

PairLeverage pair_leverage(const Mat<double>& x_base, int copies = 1);

// v_n / v_1 under the label process with c copies.
double influence_ratio(const PairLeverage& h, double p, int copies = 1);

// h_1n p + h_11 (1 - h_nn) + h_1n^2; negative exactly when removing sample 1
// after sample n lowers the target.
double cancellation_condition(const PairLeverage& h, double p);

Vec<double> label_process_test_point(const Mat<double>& x_base, double p);

Dataset<double> build_instance(const Mat<double>& x_base,
                               const Vec<double>& true_params, double noise,
                               double p, int copies);

// FNV-1a over llround(1e12 * value) of X row-major, then y.
std::uint64_t dataset_digest(const Dataset<double>& ds);

// Uniform [-1, 1] entries with a leading ones column, redrawn until the
// statement's preconditions hold: invertible Gram matrices (full and
// interior rows), h_11 > h_nn for T31/T35 (per-copy for T35), and
// h_1n < 0 for T36/T42.
Mat<double> draw_base_design(Index n, Index d, std::uint64_t seed,
                             TheoremId theorem, int copies = 2);

// Searches p for the strict window 1 < v_n / v_1 < (1 - h_nn) / (1 - h_11)
// and certifies that the top influence estimate is not the 1-MISS optimum.
CounterexampleCertificate find_p_theorem31(const Mat<double>& x_base,
                                           double noise, std::uint64_t seed);

// Window (1 - h_nn) / (1 - h_11) < v_n / v_1 < (1 - c h_nn) / (1 - c h_11)
// on per-copy leverages; certifies LAGS and adaptive greedy miss the c-MISS
// optimum.
CounterexampleCertificate find_p_theorem35(const Mat<double>& x_base,
                                           double noise, int copies,
                                           std::uint64_t seed);

// Cancellation with both individual effects positive; certifies LAGS picks
// {1, n} and misses the 2-MISS optimum.
CounterexampleCertificate find_p_theorem36(const Mat<double>& x_base,
                                           double noise, std::uint64_t seed);

// Re-checks a cancellation certificate and tests adaptive greedy against the
// 2-MISS optimum. Status is hypothesis_violated when sample n is not in the
// optimum or the cancellation hypotheses fail.
CounterexampleCertificate verify_theorem42(
    const CounterexampleCertificate& cancellation);

struct Prop41Entry {
  Index position = 0;
  double adjusted = 0.0;  // A'_{-{i}} after removing sample n
  double marginal = 0.0;  // A_{-{i,n}} - A_{-{n}}
  bool sign_pass = false;
  double sign_margin = 0.0;
};

struct Prop41Report {
  std::vector<Prop41Entry> entries;
  bool sign_consistency = false;
  bool order_preservation = false;
  // Smallest gap between consecutive sorted values over both rankings;
  // +inf when fewer than two interior indices exist.
  double order_margin = 0.0;
  // Sample 1: A'_{-{1}} < 0 agrees with the cancellation condition.
  bool cancellation_agrees = false;
};

// Compares the adjusted scores after removing the last row with the
// marginals A_{-{i,n}} - A_{-{n}} on the full fit.
Prop41Report verify_prop41(const Dataset<double>& ds,
                           const TargetFunction<double>& target,
                           double cancellation_value);

Prop41Report verify_prop41(const CounterexampleCertificate& cancellation);

// Rebuilds the instance from the certificate and reruns every check.
CounterexampleCertificate reverify(const CounterexampleCertificate& cert);

struct CertifyOptions {
  Index n = 12;
  Index d = 3;
  int copies = 2;
  double noise = 1.0;
};

// Draws a base design for `theorem` from `seed` and runs the matching
// search. T42 runs the T36 search first.
CounterexampleCertificate certify(TheoremId theorem, std::uint64_t seed,
                                  const CertifyOptions& opts = {});

}  // namespace miss

#endif  // MISS_COUNTEREXAMPLES_HPP_
