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

#ifndef MISS_SELECTORS_HPP_
#define MISS_SELECTORS_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "miss/common.hpp"
#include "miss/dataset.hpp"
#include "miss/effects.hpp"
#include "miss/glm.hpp"
#include "miss/ols.hpp"
#include "miss/target.hpp"

namespace miss {

// Result of one selection run. Values are filled in against the fit on the
// full dataset; NaN marks a value that does not apply (e.g. second order for
// logistic models).
struct SubsetTrace {
  std::string algorithm;
  Index budget = 0;
  std::vector<RowId> selected;
  // One snapshot per scoring round, aligned with step_rows.
  std::vector<std::vector<double>> step_scores;
  std::vector<std::vector<RowId>> step_rows;
  bool stopped_early = false;
  std::string stop_reason;
  double value_exact = std::numeric_limits<double>::quiet_NaN();
  double value_first_order = std::numeric_limits<double>::quiet_NaN();
  double value_second_order = std::numeric_limits<double>::quiet_NaN();
};

// Thrown when a refit fails halfway through an adaptive run.
class SelectionError : public NumericalError {
 public:
  SelectionError(const std::string& what, SubsetTrace partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const SubsetTrace& partial() const { return partial_; }

 private:
  SubsetTrace partial_;
};

enum class AdaptiveScoring { exact_individual, influence_estimate };
enum class ModelKind { ols, logistic };

template <typename Scalar = double>
struct AdaptiveOptions {
  Index step = 1;
  AdaptiveScoring scoring = AdaptiveScoring::exact_individual;
  ModelKind model = ModelKind::ols;
  Scalar ridge = Scalar(0);
  GlmOptions<Scalar> glm;  // ridge is taken from `ridge` above
};

namespace detail {

// Positions of the strictly positive scores, best first; ties go to the
// lowest row id.
template <typename Scalar>
IndexSet rank_positive(const Vec<Scalar>& scores,
                       const std::vector<RowId>& row_ids) {
  IndexSet order;
  for (Index i = 0; i < scores.size(); ++i) {
    if (scores(i) > Scalar(0)) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return row_ids[static_cast<std::size_t>(a)] <
           row_ids[static_cast<std::size_t>(b)];
  });
  return order;
}

template <typename Scalar>
std::vector<double> to_doubles(const Vec<Scalar>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<double>(v(i));
  }
  return out;
}

template <typename Scalar>
IndexSet positions_of(const Dataset<Scalar>& ds,
                      const std::vector<RowId>& ids) {
  IndexSet out;
  out.reserve(ids.size());
  for (RowId id : ids) out.push_back(ds.position_of(id));
  return out;
}

}  // namespace detail

// Fills value_exact / value_first_order / value_second_order for the selected
// rows, measured against `fit`.
template <typename Scalar>
void evaluate_trace(SubsetTrace& trace, const OlsFit<Scalar>& fit,
                    const TargetFunction<Scalar>& target) {
  const IndexSet s = detail::positions_of(fit.dataset(), trace.selected);
  trace.value_exact = static_cast<double>(actual_effect_exact(fit, s, target));
  trace.value_first_order =
      static_cast<double>(first_order_effect(fit, s, target));
  trace.value_second_order =
      static_cast<double>(second_order_effect(fit, s, target));
}

template <typename Scalar>
void evaluate_trace(SubsetTrace& trace, const GlmFit<Scalar>& fit,
                    const TargetFunction<Scalar>& target) {
  const IndexSet s = detail::positions_of(*fit.dataset, trace.selected);
  trace.value_exact = static_cast<double>(actual_effect_refit(fit, s, target));
  const Vec<Scalar> v = influence_estimates_general(fit, target);
  double sum = 0.0;
  for (Index i : s) sum += static_cast<double>(v(i));
  trace.value_first_order = sum;
}

// Top-k positive scores (ZAMinfluence when fed influence estimates). May
// return fewer than k rows, in which case stopped_early is set.
template <typename Scalar>
SubsetTrace select_top_positive(const Vec<Scalar>& scores,
                                const std::vector<RowId>& row_ids, Index k,
                                std::string algorithm = "zam") {
  if (k < 0) throw InvalidArgument("select: budget must be >= 0");
  if (static_cast<Index>(row_ids.size()) != scores.size()) {
    throw InvalidArgument("select: score and row id counts differ");
  }
  SubsetTrace trace;
  trace.algorithm = std::move(algorithm);
  trace.budget = k;
  trace.step_scores.push_back(detail::to_doubles(scores));
  trace.step_rows.push_back(row_ids);
  const IndexSet order = detail::rank_positive(scores, row_ids);
  for (Index p : order) {
    if (static_cast<Index>(trace.selected.size()) == k) break;
    trace.selected.push_back(row_ids[static_cast<std::size_t>(p)]);
  }
  if (static_cast<Index>(trace.selected.size()) < k) {
    trace.stopped_early = true;
    trace.stop_reason = "no positive scores remain";
  }
  return trace;
}

template <typename Scalar>
SubsetTrace select_zam(const Vec<Scalar>& scores,
                       const std::vector<RowId>& row_ids, Index k) {
  return select_top_positive(scores, row_ids, k, "zam");
}

template <typename Scalar>
SubsetTrace select_zam(const OlsFit<Scalar>& fit,
                       const TargetFunction<Scalar>& target, Index k) {
  auto trace = select_top_positive(influence_estimates(fit, target),
                                   fit.dataset().row_ids(), k, "zam");
  evaluate_trace(trace, fit, target);
  return trace;
}

template <typename Scalar>
SubsetTrace select_zam(const GlmFit<Scalar>& fit,
                       const TargetFunction<Scalar>& target, Index k) {
  auto trace = select_top_positive(influence_estimates_general(fit, target),
                                   fit.dataset->row_ids(), k, "zam");
  evaluate_trace(trace, fit, target);
  return trace;
}

template <typename Scalar>
SubsetTrace select_lags(const OlsFit<Scalar>& fit,
                        const TargetFunction<Scalar>& target, Index k) {
  auto trace = select_top_positive(individual_effects(fit, target),
                                   fit.dataset().row_ids(), k, "lags");
  evaluate_trace(trace, fit, target);
  return trace;
}

// Exact individual effects of a logistic model, one warm-started refit each.
template <typename Scalar>
Vec<Scalar> individual_effects_refit(const GlmFit<Scalar>& fit,
                                     const TargetFunction<Scalar>& target) {
  Vec<Scalar> out(fit.rows());
  for (Index i = 0; i < fit.rows(); ++i) {
    const Index one[] = {i};
    out(i) = actual_effect_refit(fit, std::span<const Index>(one), target);
  }
  return out;
}

template <typename Scalar>
SubsetTrace select_lags(const GlmFit<Scalar>& fit,
                        const TargetFunction<Scalar>& target, Index k) {
  auto trace = select_top_positive(individual_effects_refit(fit, target),
                                   fit.dataset->row_ids(), k, "lags");
  evaluate_trace(trace, fit, target);
  return trace;
}

namespace detail {

// Shared loop of the adaptive greedy algorithm: score the current model,
// move the top-`step` positive rows into the selection, refit, repeat.
template <typename Fit, typename ScoreFn, typename RefitFn, typename IdsFn>
SubsetTrace adaptive_loop(Fit current, Index k, Index step, ScoreFn score,
                          RefitFn refit, IdsFn ids) {
  SubsetTrace trace;
  trace.algorithm = "adaptive";
  trace.budget = k;
  auto fail = [&trace](const Error& e) {
    trace.stopped_early = true;
    trace.stop_reason = std::string("refit failed: ") + e.what();
    throw SelectionError(trace.stop_reason, trace);
  };
  while (static_cast<Index>(trace.selected.size()) < k) {
    // A failure after the first pick carries the partial trace.
    const auto scores = [&] {
      try {
        return score(current);
      } catch (const Error& e) {
        if (trace.selected.empty()) throw;
        fail(e);
        throw;
      }
    }();
    const std::vector<RowId>& row_ids = ids(current);
    trace.step_scores.push_back(to_doubles(scores));
    trace.step_rows.push_back(row_ids);
    const IndexSet order = rank_positive(scores, row_ids);
    if (order.empty()) {
      trace.stopped_early = true;
      trace.stop_reason = "no positive scores remain";
      break;
    }
    const Index room = k - static_cast<Index>(trace.selected.size());
    const Index take =
        std::min({step, room, static_cast<Index>(order.size())});
    IndexSet chosen(order.begin(), order.begin() + take);
    for (Index p : chosen) {
      trace.selected.push_back(row_ids[static_cast<std::size_t>(p)]);
    }
    if (static_cast<Index>(trace.selected.size()) == k) break;
    try {
      current = refit(current, chosen);
    } catch (const Error& e) {
      fail(e);
    }
  }
  return trace;
}

}  // namespace detail

// Adaptive greedy selection. With step = k it degenerates into a single
// scoring pass.
template <typename Scalar>
SubsetTrace select_adaptive(std::shared_ptr<const Dataset<Scalar>> ds,
                            const TargetFunction<Scalar>& target, Index k,
                            const AdaptiveOptions<Scalar>& opts = {}) {
  if (k < 0) throw InvalidArgument("select_adaptive: budget must be >= 0");
  if (k >= ds->rows()) {
    throw InvalidArgument("select_adaptive: budget must be below n");
  }
  if (opts.step < 1) throw InvalidArgument("select_adaptive: step must be >= 1");

  if (opts.model == ModelKind::ols) {
    const auto base = fit_ols(ds, opts.ridge);
    auto trace = detail::adaptive_loop(
        base, k, opts.step,
        [&](const OlsFit<Scalar>& f) {
          return opts.scoring == AdaptiveScoring::exact_individual
                     ? individual_effects(f, target)
                     : influence_estimates(f, target);
        },
        [](const OlsFit<Scalar>& f, const IndexSet& s) {
          return refit_without(f, s);
        },
        [](const OlsFit<Scalar>& f) -> const std::vector<RowId>& {
          return f.dataset().row_ids();
        });
    evaluate_trace(trace, base, target);
    return trace;
  }

  GlmOptions<Scalar> glm = opts.glm;
  glm.ridge = opts.ridge;
  const auto base = fit_logistic(ds, glm);
  auto trace = detail::adaptive_loop(
      base, k, opts.step,
      [&](const GlmFit<Scalar>& f) {
        return opts.scoring == AdaptiveScoring::exact_individual
                   ? individual_effects_refit(f, target)
                   : influence_estimates_general(f, target);
      },
      [](const GlmFit<Scalar>& f, const IndexSet& s) {
        return refit_without(f, s);
      },
      [](const GlmFit<Scalar>& f) -> const std::vector<RowId>& {
        return f.dataset->row_ids();
      });
  evaluate_trace(trace, base, target);
  return trace;
}

template <typename Scalar>
SubsetTrace select_adaptive(const Dataset<Scalar>& ds,
                            const TargetFunction<Scalar>& target, Index k,
                            const AdaptiveOptions<Scalar>& opts = {}) {
  return select_adaptive(std::make_shared<const Dataset<Scalar>>(ds), target,
                         k, opts);
}

inline constexpr Index kDefaultBruteCap = 25;

struct BruteResult {
  IndexSet best;
  double value = 0.0;
  std::size_t evaluated = 0;
};

// Enumerates every subset of {0..n-1} with at most k elements in
// lexicographic order (empty set first) and returns the maximizer of
// `value`. Values within 1e-12 relative of the incumbent count as ties and
// keep the earlier subset.
inline BruteResult brute_force_argmax(
    Index n, Index k, const std::function<double(std::span<const Index>)>& value) {
  BruteResult res;
  res.value = 0.0;
  res.evaluated = 1;
  IndexSet current;
  std::function<void(Index)> dfs = [&](Index start) {
    if (static_cast<Index>(current.size()) == k) return;
    for (Index i = start; i < n; ++i) {
      current.push_back(i);
      const double v = value(current);
      ++res.evaluated;
      const double tie = 1e-12 * std::max(1.0, std::abs(res.value));
      if (v > res.value + tie) {
        res.value = v;
        res.best = current;
      }
      dfs(i + 1);
      current.pop_back();
    }
  };
  if (k > 0) dfs(0);
  return res;
}

namespace detail {

inline SubsetTrace brute_trace(const BruteResult& res,
                               const std::vector<RowId>& row_ids, Index k) {
  SubsetTrace trace;
  trace.algorithm = "brute";
  trace.budget = k;
  for (Index p : res.best) {
    trace.selected.push_back(row_ids[static_cast<std::size_t>(p)]);
  }
  trace.value_exact = res.value;
  return trace;
}

inline void check_brute_size(Index n, Index k, Index n_cap) {
  if (k < 0) throw InvalidArgument("select_brute: budget must be >= 0");
  if (n > n_cap) {
    throw InvalidArgument("select_brute: n = " + std::to_string(n) +
                          " exceeds cap " + std::to_string(n_cap));
  }
}

}  // namespace detail

// k-MISS by enumeration, using exact leave-subset-out effects.
template <typename Scalar>
SubsetTrace select_brute(const OlsFit<Scalar>& fit,
                         const TargetFunction<Scalar>& target, Index k,
                         Index n_cap = kDefaultBruteCap) {
  detail::check_brute_size(fit.rows(), k, n_cap);
  const auto res = brute_force_argmax(
      fit.rows(), k, [&](std::span<const Index> s) {
        return static_cast<double>(actual_effect_exact(fit, s, target));
      });
  auto trace = detail::brute_trace(res, fit.dataset().row_ids(), k);
  evaluate_trace(trace, fit, target);
  return trace;
}

template <typename Scalar>
SubsetTrace select_brute(const GlmFit<Scalar>& fit,
                         const TargetFunction<Scalar>& target, Index k,
                         Index n_cap = kDefaultBruteCap) {
  detail::check_brute_size(fit.rows(), k, n_cap);
  const auto res = brute_force_argmax(
      fit.rows(), k, [&](std::span<const Index> s) {
        return static_cast<double>(actual_effect_refit(fit, s, target));
      });
  auto trace = detail::brute_trace(res, fit.dataset->row_ids(), k);
  evaluate_trace(trace, fit, target);
  return trace;
}

}  // namespace miss

#endif  // MISS_SELECTORS_HPP_
