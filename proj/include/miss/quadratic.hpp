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

#ifndef MISS_QUADRATIC_HPP_
#define MISS_QUADRATIC_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "miss/common.hpp"
#include "miss/effects.hpp"
#include "miss/ols.hpp"
#include "miss/rng.hpp"
#include "miss/selectors.hpp"
#include "miss/target.hpp"

namespace miss {

// Second-order group effect as a quadratic in the removal indicator w:
//   f(w) = v^T w + w^T B w,   v_i = a_i r_i,   b_ij = a_i h_ij r_j
// with a_i = g^T N^{-1} x_i. At an indicator of S, f equals Q_{-S}.
template <typename Scalar = double>
struct QuadraticForm {
  Vec<Scalar> linear;
  Mat<Scalar> quadratic;
  std::vector<RowId> row_ids;

  Index size() const { return linear.size(); }

  Scalar value(const Vec<Scalar>& w) const {
    return linear.dot(w) + w.dot(quadratic * w);
  }

  Scalar indicator_value(std::span<const Index> subset) const {
    Scalar total(0);
    for (Index i : subset) {
      total += linear(i);
      for (Index j : subset) total += quadratic(i, j);
    }
    return total;
  }
};

template <typename Scalar>
QuadraticForm<Scalar> build_quadratic(const OlsFit<Scalar>& fit,
                                      const TargetFunction<Scalar>& target) {
  detail::check_target_dim(target, fit.dim());
  const auto& x = fit.dataset().x();
  const Vec<Scalar> a = x * (fit.gram_inverse() * target.gradient());
  const Vec<Scalar>& r = fit.residuals();
  QuadraticForm<Scalar> q;
  q.linear = a.cwiseProduct(r);
  q.quadratic = a.asDiagonal() * fit.hat_matrix() * r.asDiagonal();
  q.row_ids = fit.dataset().row_ids();
  return q;
}

// Euclidean projection onto {w : 0 <= w <= 1, sum(w) <= k}. When clipping
// alone overshoots the budget, the answer is clip(z - tau, 0, 1) for the
// unique tau > 0 with sum = k; tau is located among the sorted breakpoints
// {z_i, z_i - 1} of that piecewise linear sum.
template <typename Scalar>
Vec<Scalar> project_capped_simplex(const Vec<Scalar>& z, Scalar k) {
  const Vec<Scalar> clipped = z.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  if (clipped.sum() <= k) return clipped;

  auto total = [&](Scalar tau) {
    return (z.array() - tau).cwiseMax(Scalar(0)).cwiseMin(Scalar(1)).sum();
  };
  std::vector<Scalar> knots;
  knots.reserve(static_cast<std::size_t>(2 * z.size()));
  for (Index i = 0; i < z.size(); ++i) {
    knots.push_back(z(i));
    knots.push_back(z(i) - Scalar(1));
  }
  std::sort(knots.begin(), knots.end());
  // total() is non-increasing in tau; find adjacent knots bracketing k.
  Scalar lo = Scalar(0), s_lo = total(lo);
  for (Scalar t : knots) {
    if (t <= lo) continue;
    const Scalar s_t = total(t);
    if (s_t <= k) {
      const Scalar tau =
          s_lo == s_t ? t : lo + (s_lo - k) * (t - lo) / (s_lo - s_t);
      return (z.array() - tau).cwiseMax(Scalar(0)).cwiseMin(Scalar(1)).matrix();
    }
    lo = t;
    s_lo = s_t;
  }
  return Vec<Scalar>::Zero(z.size());
}

template <typename Scalar = double>
struct PgdConfig {
  int iters = 500;
  // Non-positive means 1 / (2 |B|_F + |v|_inf + 1e-12).
  Scalar step = Scalar(0);
  int restarts = 8;
  std::uint64_t seed = 0;
  // Extra deterministic start, typically the LAGS indicator.
  std::optional<Vec<Scalar>> warm_start;

  void validate() const {
    if (iters < 1) throw InvalidArgument("PgdConfig: iters must be >= 1");
    if (restarts < 0) throw InvalidArgument("PgdConfig: restarts must be >= 0");
  }
};

namespace detail {

// Top-k coordinates above 1e-9, ties to the lower position.
template <typename Scalar>
IndexSet round_top_k(const Vec<Scalar>& w, Index k) {
  IndexSet order;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) > Scalar(1e-9)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return w(a) > w(b); });
  if (static_cast<Index>(order.size()) > k) order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace detail

// Projected gradient ascent on the relaxation of max f(w) over indicators
// with at most k ones. Each start keeps its best relaxed iterate, which is
// rounded to its top-k coordinates; the best rounded indicator wins.
template <typename Scalar>
SubsetTrace select_quadratic_pgd(const QuadraticForm<Scalar>& q, Index k,
                                 const PgdConfig<Scalar>& cfg = {}) {
  cfg.validate();
  if (k < 1) throw InvalidArgument("select_quadratic_pgd: k must be >= 1");
  const Index n = q.size();
  if (cfg.warm_start && cfg.warm_start->size() != n) {
    throw InvalidArgument("select_quadratic_pgd: warm start length mismatch");
  }
  Scalar step = cfg.step;
  if (!(step > Scalar(0))) {
    step = Scalar(1) / (Scalar(2) * q.quadratic.norm() +
                        (n ? q.linear.cwiseAbs().maxCoeff() : Scalar(0)) +
                        Scalar(1e-12));
  }
  const Mat<Scalar> sym = q.quadratic + q.quadratic.transpose();
  const Scalar budget = static_cast<Scalar>(k);

  std::vector<Vec<Scalar>> starts;
  if (cfg.warm_start) starts.push_back(project_capped_simplex(*cfg.warm_start, budget));
  SplitMix64 rng(cfg.seed);
  for (int s = 0; s < cfg.restarts; ++s) {
    Vec<Scalar> w(n);
    for (Index i = 0; i < n; ++i) w(i) = Scalar(rng.uniform());
    starts.push_back(project_capped_simplex(w, budget));
  }
  if (starts.empty()) starts.push_back(Vec<Scalar>::Zero(n));

  IndexSet best_set;
  Scalar best_value(0);
  bool have_best = false;
  for (const auto& start : starts) {
    Vec<Scalar> w = start;
    Vec<Scalar> best_w = w;
    Scalar best_relaxed = q.value(w);
    for (int it = 0; it < cfg.iters; ++it) {
      w = project_capped_simplex(Vec<Scalar>(w + step * (q.linear + sym * w)),
                                 budget);
      const Scalar f = q.value(w);
      if (f > best_relaxed) {
        best_relaxed = f;
        best_w = w;
      }
    }
    IndexSet rounded = detail::round_top_k(best_w, k);
    const Scalar value = q.indicator_value(rounded);
    if (!have_best || value > best_value) {
      best_value = value;
      best_set = std::move(rounded);
      have_best = true;
    }
  }

  SubsetTrace trace;
  trace.algorithm = "pgd";
  trace.budget = k;
  for (Index p : best_set) {
    trace.selected.push_back(q.row_ids.empty()
                                 ? static_cast<RowId>(p)
                                 : q.row_ids[static_cast<std::size_t>(p)]);
  }
  trace.value_second_order = static_cast<double>(best_value);
  if (static_cast<Index>(best_set.size()) < k) {
    trace.stopped_early = true;
    trace.stop_reason = "relaxed optimum has fewer than k active coordinates";
  }
  return trace;
}

// Convenience path on an OLS fit: warm-starts at the LAGS indicator and
// fills the exact values of the rounded subset.
template <typename Scalar>
SubsetTrace select_quadratic_pgd(const OlsFit<Scalar>& fit,
                                 const TargetFunction<Scalar>& target, Index k,
                                 PgdConfig<Scalar> cfg = {}) {
  const auto q = build_quadratic(fit, target);
  if (!cfg.warm_start) {
    const auto lags = select_lags(fit, target, k);
    Vec<Scalar> w = Vec<Scalar>::Zero(q.size());
    for (RowId id : lags.selected) w(fit.dataset().position_of(id)) = Scalar(1);
    cfg.warm_start = std::move(w);
  }
  auto trace = select_quadratic_pgd(q, k, cfg);
  evaluate_trace(trace, fit, target);
  return trace;
}

struct SubmodularWitness {
  Index i = 0;
  Index j = 0;
  double value = 0.0;  // b_ij + b_ji
};

// Submodularity of f over indicators requires b_ij + b_ji <= 0 for every
// pair. Scans all pairs in order when there are at most `trials` of them,
// otherwise samples `trials` random pairs. Returns the first violation.
template <typename Scalar>
std::optional<SubmodularWitness> check_submodular(const QuadraticForm<Scalar>& q,
                                                  std::size_t trials,
                                                  std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("check_submodular: trials must be >= 1");
  const Index n = q.size();
  auto test = [&](Index i, Index j) -> std::optional<SubmodularWitness> {
    const Scalar s = q.quadratic(i, j) + q.quadratic(j, i);
    if (s > Scalar(0)) return SubmodularWitness{i, j, static_cast<double>(s)};
    return std::nullopt;
  };
  const auto pairs = static_cast<std::size_t>(n) *
                     static_cast<std::size_t>(n > 0 ? n - 1 : 0) / 2;
  if (pairs <= trials) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        if (auto w = test(i, j)) return w;
      }
    }
    return std::nullopt;
  }
  SplitMix64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (j >= i) ++j;
    if (i > j) std::swap(i, j);
    if (auto w = test(i, j)) return w;
  }
  return std::nullopt;
}

}  // namespace miss

#endif  // MISS_QUADRATIC_HPP_
