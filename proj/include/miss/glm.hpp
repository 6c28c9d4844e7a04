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

#ifndef MISS_GLM_HPP_
#define MISS_GLM_HPP_

#include <cmath>
#include <memory>
#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "miss/common.hpp"
#include "miss/dataset.hpp"
#include "miss/target.hpp"

namespace miss {

// Per-sample losses as functions of the margin z = x^T theta.
//   logistic: L = log(1 + e^z) - y z
//   squared:  L = (z - y)^2
enum class LossKind { logistic, squared };

template <typename Scalar = double>
struct GlmOptions {
  Scalar ridge = Scalar(0);
  Scalar tol = Scalar(1e-8);
  int max_iter = 100;
};

// Minimizer of (1/n) [sum_i w_i L_i(theta) + ridge |theta|^2].
//
// `hessian` is (1/n) times the Hessian of the bracket and `per_sample_grads`
// holds the unweighted gradient of each L_i at the optimum, one per row.
template <typename Scalar = double>
struct GlmFit {
  Vec<Scalar> params;
  Mat<Scalar> hessian;
  Mat<Scalar> per_sample_grads;
  Scalar grad_norm = Scalar(0);
  int iterations = 0;
  LossKind loss = LossKind::logistic;
  GlmOptions<Scalar> options;
  std::shared_ptr<const Dataset<Scalar>> dataset;

  Index rows() const { return dataset->rows(); }
};

namespace detail {

template <typename Scalar>
Scalar log1p_exp(Scalar z) {
  using std::exp;
  using std::log1p;
  return z > Scalar(0) ? z + log1p(exp(-z)) : log1p(exp(z));
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
struct LossTerms {
  Scalar value, d1, d2;
};

template <typename Scalar>
LossTerms<Scalar> loss_terms(LossKind kind, Scalar z, Scalar y) {
  if (kind == LossKind::squared) {
    const Scalar r = z - y;
    return {r * r, Scalar(2) * r, Scalar(2)};
  }
  const Scalar p = sigmoid(z);
  return {log1p_exp(z) - y * z, p - y, p * (Scalar(1) - p)};
}

template <typename Scalar>
Scalar glm_objective(const Dataset<Scalar>& ds, LossKind kind,
                     const Vec<Scalar>& w, Scalar ridge,
                     const Vec<Scalar>& theta) {
  const Vec<Scalar> z = ds.x() * theta;
  Scalar total = ridge * theta.squaredNorm();
  for (Index i = 0; i < ds.rows(); ++i) {
    total += w(i) * loss_terms(kind, z(i), ds.y()(i)).value;
  }
  return total;
}

}  // namespace detail

// Damped Newton with step halving on objective increase. `weights`
// defaults to all ones; `warm_start` defaults to zero.
template <typename Scalar>
GlmFit<Scalar> fit_glm(std::shared_ptr<const Dataset<Scalar>> ds,
                       LossKind loss, const GlmOptions<Scalar>& opts = {},
                       const Vec<Scalar>* warm_start = nullptr,
                       const Vec<Scalar>* weights = nullptr) {
  using std::isfinite;
  if (!ds) throw InvalidArgument("fit_glm: null dataset");
  if (opts.ridge < Scalar(0)) throw InvalidArgument("fit_glm: ridge < 0");
  const Index n = ds->rows(), q = ds->cols();
  if (n == 0) throw InvalidArgument("fit_glm: empty dataset");
  const auto& x = ds->x();
  const auto& y = ds->y();
  const Vec<Scalar> w = weights ? *weights : Vec<Scalar>::Ones(n);
  if (w.size() != n) throw InvalidArgument("fit_glm: weight count mismatch");

  Vec<Scalar> theta = warm_start ? *warm_start : Vec<Scalar>::Zero(q);
  if (theta.size() != q) throw InvalidArgument("fit_glm: warm start length");

  auto gradient_and_hessian = [&](const Vec<Scalar>& t, Vec<Scalar>& g,
                                  Mat<Scalar>& h) {
    const Vec<Scalar> z = x * t;
    Vec<Scalar> d1(n), d2(n);
    for (Index i = 0; i < n; ++i) {
      const auto terms = detail::loss_terms(loss, z(i), y(i));
      d1(i) = w(i) * terms.d1;
      d2(i) = w(i) * terms.d2;
    }
    g = x.transpose() * d1 + Scalar(2) * opts.ridge * t;
    h = x.transpose() * d2.asDiagonal() * x;
    h.diagonal().array() += Scalar(2) * opts.ridge;
  };

  Vec<Scalar> g;
  Mat<Scalar> h;
  Scalar objective = detail::glm_objective(*ds, loss, w, opts.ridge, theta);
  int iter = 0;
  for (;; ++iter) {
    gradient_and_hessian(theta, g, h);
    if (g.norm() < opts.tol) break;
    if (iter >= opts.max_iter) {
      throw NumericalError("fit_glm: no convergence after " +
                           std::to_string(opts.max_iter) +
                           " Newton iterations (gradient norm " +
                           std::to_string(static_cast<double>(g.norm())) + ")");
    }
    Eigen::LDLT<Mat<Scalar>> ldlt(h);
    const Vec<Scalar> pivots = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success ||
        !(pivots.minCoeff() > Scalar(1e-14) * pivots.cwiseAbs().maxCoeff())) {
      throw NumericalError(
          opts.ridge == Scalar(0)
              ? "fit_glm: singular Hessian; data may be separable, try a ridge"
              : "fit_glm: singular Hessian");
    }
    const Vec<Scalar> step = ldlt.solve(g);
    // Objective differences below rounding noise count as no increase, so
    // Newton can still polish the gradient once the loss has flattened out.
    using std::abs;
    const Scalar slack = Scalar(64) * std::numeric_limits<Scalar>::epsilon() *
                         (Scalar(1) + abs(objective));
    Scalar t = Scalar(1);
    Vec<Scalar> next;
    Scalar next_obj;
    for (int halvings = 0;; ++halvings) {
      next = theta - t * step;
      next_obj = detail::glm_objective(*ds, loss, w, opts.ridge, next);
      if (isfinite(next_obj) && next_obj <= objective + slack) break;
      if (halvings == 60) {
        // No representable decrease; accept the point if it is stationary.
        next = theta;
        next_obj = objective;
        break;
      }
      t /= Scalar(2);
    }
    if (next == theta) {
      if (g.norm() < Scalar(1e3) * opts.tol) break;
      throw NumericalError("fit_glm: line search stalled");
    }
    theta = std::move(next);
    objective = next_obj;
    if (opts.ridge == Scalar(0) && theta.norm() > Scalar(1e6)) {
      throw NumericalError(
          "fit_glm: parameter norm diverged; data appear separable, use a "
          "ridge penalty");
    }
  }

  if (loss == LossKind::logistic && opts.ridge == Scalar(0)) {
    // Complete separation: the "optimum" sits where every probability has
    // saturated, and a finite tolerance merely stops the drift to infinity.
    using std::abs;
    const Vec<Scalar> z = x * theta;
    Scalar worst(0);
    for (Index i = 0; i < n; ++i) {
      if (w(i) == Scalar(0)) continue;
      worst = std::max(worst, abs(detail::sigmoid(z(i)) - y(i)));
    }
    if (worst < Scalar(1e-6)) {
      throw NumericalError(
          "fit_glm: every sample is fit with probability above 1 - 1e-6; data "
          "appear separable, use a ridge penalty");
    }
  }

  GlmFit<Scalar> fit;
  fit.params = theta;
  fit.hessian = h / Scalar(n);
  fit.hessian = Scalar(0.5) * (fit.hessian + fit.hessian.transpose()).eval();
  const Vec<Scalar> z = x * theta;
  fit.per_sample_grads.resize(n, q);
  for (Index i = 0; i < n; ++i) {
    fit.per_sample_grads.row(i) =
        detail::loss_terms(loss, z(i), y(i)).d1 * x.row(i);
  }
  fit.grad_norm = g.norm();
  fit.iterations = iter;
  fit.loss = loss;
  fit.options = opts;
  fit.dataset = std::move(ds);
  return fit;
}

// Binary logistic regression; targets must be exactly 0 or 1.
template <typename Scalar>
GlmFit<Scalar> fit_logistic(std::shared_ptr<const Dataset<Scalar>> ds,
                            const GlmOptions<Scalar>& opts = {},
                            const Vec<Scalar>* warm_start = nullptr) {
  if (!ds) throw InvalidArgument("fit_logistic: null dataset");
  for (Index i = 0; i < ds->rows(); ++i) {
    const Scalar v = ds->y()(i);
    if (v != Scalar(0) && v != Scalar(1)) {
      throw InvalidArgument("fit_logistic: target at row " + std::to_string(i) +
                            " is not 0 or 1");
    }
  }
  return fit_glm(std::move(ds), LossKind::logistic, opts, warm_start);
}

template <typename Scalar>
GlmFit<Scalar> fit_logistic(const Dataset<Scalar>& ds,
                            const GlmOptions<Scalar>& opts = {}) {
  return fit_logistic(std::make_shared<const Dataset<Scalar>>(ds), opts);
}

// score_i = (1/n) grad phi^T H^{-1} grad L_i. For squared loss this equals
// the least squares influence estimate g^T N^{-1} x_i r_i exactly: the 1/n
// here cancels the 1/n inside H.
template <typename Scalar>
Vec<Scalar> influence_estimates_general(const GlmFit<Scalar>& fit,
                                        const TargetFunction<Scalar>& target) {
  detail::check_target_dim(target, fit.params.size());
  Eigen::LDLT<Mat<Scalar>> ldlt(fit.hessian);
  const Vec<Scalar> pivots = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success ||
      !(pivots.minCoeff() > Scalar(kPivotTolerance) * pivots.cwiseAbs().maxCoeff())) {
    throw NumericalError("influence_estimates_general: singular Hessian");
  }
  const Vec<Scalar> hg = ldlt.solve(target.gradient());
  return fit.per_sample_grads * hg / Scalar(fit.rows());
}

// Re-optimizes on the rows outside `removed`, warm-started at the current
// optimum, and returns phi(theta_{-S}) - phi(theta).
template <typename Scalar>
Scalar actual_effect_refit(const GlmFit<Scalar>& fit,
                           std::span<const Index> removed,
                           const TargetFunction<Scalar>& target) {
  if (removed.empty()) return Scalar(0);
  auto rest = std::make_shared<const Dataset<Scalar>>(
      fit.dataset->without(removed));
  const auto refit =
      fit_glm(std::move(rest), fit.loss, fit.options, &fit.params);
  return target(refit.params) - target(fit.params);
}

template <typename Scalar>
GlmFit<Scalar> refit_without(const GlmFit<Scalar>& fit,
                             std::span<const Index> removed) {
  auto rest = std::make_shared<const Dataset<Scalar>>(
      fit.dataset->without(removed));
  return fit_glm(std::move(rest), fit.loss, fit.options, &fit.params);
}

}  // namespace miss

#endif  // MISS_GLM_HPP_
