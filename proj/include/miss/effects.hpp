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

// Group effects of removing samples from a least squares fit, for a target
// phi with gradient g at the fit:
//
//   influence estimate   v_i      = g^T N^{-1} x_i r_i
//   individual effect    A_{-i}   = v_i / (1 - h_ii)
//   exact group effect   A_{-S}   = g^T N^{-1} X_S^T (I - M_S)^{-1} (X_S theta - y_S)
//   Neumann order m               = same with (I - M_S)^{-1} -> sum_{t<m} M_S^t
//
// where M_S = X_S N^{-1} X_S^T. Order 1 is the sum of influence estimates and
// order 2 is the second-order group influence Q_{-S}.

#ifndef MISS_EFFECTS_HPP_
#define MISS_EFFECTS_HPP_

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "miss/common.hpp"
#include "miss/ols.hpp"
#include "miss/target.hpp"

namespace miss {

// Largest subset accepted by the capacitance-based routines.
inline constexpr Index kDefaultSubsetCap = 512;

template <typename Scalar = double>
struct EffectReport {
  IndexSet subset;
  Scalar exact = Scalar(0);
  Scalar first_order = Scalar(0);
  Scalar second_order = Scalar(0);
  std::map<int, Scalar> neumann_orders;
};

// Scores on the rows that survive a removal, keyed by row id.
template <typename Scalar = double>
struct RowScores {
  std::vector<RowId> row_ids;
  Vec<Scalar> scores;
};

namespace detail {

template <typename Scalar>
void check_subset_cap(std::span<const Index> subset, Index cap) {
  if (static_cast<Index>(subset.size()) > cap) {
    throw InvalidArgument("subset of size " + std::to_string(subset.size()) +
                          " exceeds cap " + std::to_string(cap));
  }
}

// N^{-1} g
template <typename Scalar>
Vec<Scalar> whitened_gradient(const OlsFit<Scalar>& fit,
                              const TargetFunction<Scalar>& target) {
  check_target_dim(target, fit.dim());
  return fit.gram_inverse() * target.gradient();
}

}  // namespace detail

template <typename Scalar>
Vec<Scalar> influence_estimates(const OlsFit<Scalar>& fit,
                                const TargetFunction<Scalar>& target) {
  const Vec<Scalar> w = detail::whitened_gradient(fit, target);
  return (fit.dataset().x() * w).cwiseProduct(fit.residuals());
}

// Leverage-adjusted greedy (LAGS) scores; exact leave-one-out effects.
template <typename Scalar>
Vec<Scalar> individual_effects(const OlsFit<Scalar>& fit,
                               const TargetFunction<Scalar>& target) {
  const Vec<Scalar> h = fit.leverages();
  for (Index i = 0; i < h.size(); ++i) {
    if (h(i) >= Scalar(1) - Scalar(kLeverageCeiling)) {
      throw NumericalError("individual_effects: row " + std::to_string(i) +
                           " has leverage 1");
    }
  }
  return influence_estimates(fit, target).cwiseQuotient(
      (Scalar(1) - h.array()).matrix());
}

template <typename Scalar>
Scalar actual_effect_exact(const OlsFit<Scalar>& fit,
                           std::span<const Index> subset,
                           const TargetFunction<Scalar>& target,
                           Index cap = kDefaultSubsetCap) {
  detail::check_subset_cap<Scalar>(subset, cap);
  detail::check_target_dim(target, fit.dim());
  if (subset.empty()) return Scalar(0);
  const auto c = detail::capacitance(fit, subset);
  // g^T N^{-1} X_S^T = (X_S N^{-1} g)^T
  const Vec<Scalar> a = c.xs_ninv * target.gradient();
  return a.dot(c.ldlt.solve(c.neg_resid));
}

// Parameter change under the Neumann truncation of (I - M_S)^{-1} at order m.
template <typename Scalar>
Vec<Scalar> neumann_params_delta(const OlsFit<Scalar>& fit,
                                 std::span<const Index> subset, int order) {
  if (order < 1) throw InvalidArgument("neumann order must be >= 1");
  const auto c = detail::capacitance(fit, subset, /*factor=*/false);
  if (subset.empty()) return Vec<Scalar>::Zero(fit.dim());
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(c.m, Eigen::EigenvaluesOnly);
  const Scalar rho = eig.eigenvalues().cwiseAbs().maxCoeff();
  // Same tolerance as the capacitance pivots: rho within 1e-10 of one diverges.
  if (!(rho < Scalar(1) - Scalar(kPivotTolerance))) {
    throw NumericalError("neumann series diverges: spectral radius of M_S is " +
                         std::to_string(static_cast<double>(rho)));
  }
  Vec<Scalar> term = c.neg_resid;
  Vec<Scalar> sum = term;
  for (int t = 1; t < order; ++t) {
    term = c.m * term;
    sum += term;
  }
  return c.xs_ninv.transpose() * sum;
}

template <typename Scalar>
Scalar neumann_effect(const OlsFit<Scalar>& fit, std::span<const Index> subset,
                      const TargetFunction<Scalar>& target, int order) {
  detail::check_target_dim(target, fit.dim());
  return target.gradient().dot(neumann_params_delta(fit, subset, order));
}

// Spectral radius of M_S; below one exactly when I - M_S is positive definite.
template <typename Scalar>
Scalar subset_spectral_radius(const OlsFit<Scalar>& fit,
                              std::span<const Index> subset) {
  if (subset.empty()) return Scalar(0);
  const auto c = detail::capacitance(fit, subset, /*factor=*/false);
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(c.m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

// Q_{-S} = g^T N^{-1} X_S^T (I + M_S) (X_S theta - y_S). No convergence
// requirement, unlike the general Neumann order.
template <typename Scalar>
Scalar second_order_effect(const OlsFit<Scalar>& fit,
                           std::span<const Index> subset,
                           const TargetFunction<Scalar>& target) {
  detail::check_target_dim(target, fit.dim());
  if (subset.empty()) return Scalar(0);
  const auto c = detail::capacitance(fit, subset, /*factor=*/false);
  const Vec<Scalar> a = c.xs_ninv * target.gradient();
  return a.dot(c.neg_resid + c.m * c.neg_resid);
}

template <typename Scalar>
Scalar first_order_effect(const OlsFit<Scalar>& fit,
                          std::span<const Index> subset,
                          const TargetFunction<Scalar>& target) {
  const Vec<Scalar> v = influence_estimates(fit, target);
  Scalar sum(0);
  for (Index i : subset) sum += v(i);
  return sum;
}

// Two-sample closed form:
//   A_{-{i,j}} = [(1-h_ii)(1-h_jj)(A_i + A_j) + h_ij g^T N^{-1}(x_i r_j + x_j r_i)]
//                / [(1-h_ii)(1-h_jj) - h_ij^2]
template <typename Scalar>
Scalar pair_effect(const OlsFit<Scalar>& fit, Index i, Index j,
                   const TargetFunction<Scalar>& target) {
  if (i == j) throw InvalidArgument("pair_effect: indices must differ");
  const Vec<Scalar> w = detail::whitened_gradient(fit, target);
  const auto& x = fit.dataset().x();
  const Scalar hii = fit.leverage(i), hjj = fit.leverage(j);
  const Scalar hij = fit.cross_leverage(i, j);
  const Scalar ri = fit.residuals()(i), rj = fit.residuals()(j);
  const Scalar denom = (Scalar(1) - hii) * (Scalar(1) - hjj) - hij * hij;
  if (!(denom > Scalar(1e-12))) {
    throw NumericalError("pair_effect: degenerate denominator");
  }
  const Scalar gi = x.row(i).dot(w), gj = x.row(j).dot(w);
  const Scalar ai = gi * ri / (Scalar(1) - hii);
  const Scalar aj = gj * rj / (Scalar(1) - hjj);
  const Scalar cross = hij * (gi * rj + gj * ri);
  return ((Scalar(1) - hii) * (Scalar(1) - hjj) * (ai + aj) + cross) / denom;
}

template <typename Scalar>
EffectReport<Scalar> effect_report(const OlsFit<Scalar>& fit,
                                   std::span<const Index> subset,
                                   const TargetFunction<Scalar>& target,
                                   int max_order = 2) {
  EffectReport<Scalar> rep;
  rep.subset.assign(subset.begin(), subset.end());
  rep.exact = actual_effect_exact(fit, subset, target);
  rep.first_order = first_order_effect(fit, subset, target);
  rep.second_order = second_order_effect(fit, subset, target);
  for (int m = 1; m <= max_order; ++m) {
    rep.neumann_orders[m] = neumann_effect(fit, subset, target, m);
  }
  return rep;
}

// Individual effects after refitting without `removed`, i.e. the scores the
// adaptive greedy algorithm uses in its next round.
template <typename Scalar>
RowScores<Scalar> adjusted_scores(const OlsFit<Scalar>& fit,
                                  std::span<const Index> removed,
                                  const TargetFunction<Scalar>& target) {
  const auto refit = refit_without(fit, removed);
  return {refit.dataset().row_ids(), individual_effects(refit, target)};
}

// Ratio A_{-{i}^c} / A_{-{i}} = c (1 - h) / (1 - c h) for c copies of a row
// with per-copy leverage h.
template <typename Scalar>
Scalar amplification_ratio(Scalar h, int copies) {
  if (copies < 2) throw InvalidArgument("amplification_ratio: copies >= 2");
  if (!(h > Scalar(0)) || !(h * Scalar(copies) < Scalar(1))) {
    throw InvalidArgument("amplification_ratio: need 0 < h < 1/c");
  }
  return Scalar(copies) * (Scalar(1) - h) / (Scalar(1) - Scalar(copies) * h);
}

}  // namespace miss

#endif  // MISS_EFFECTS_HPP_
