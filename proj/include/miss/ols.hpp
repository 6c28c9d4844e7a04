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

#ifndef MISS_OLS_HPP_
#define MISS_OLS_HPP_

#include <memory>
#include <sstream>
#include <string>
#include <utility>

#include "miss/common.hpp"
#include "miss/dataset.hpp"

namespace miss {

template <typename Scalar>
class OlsFit;

template <typename Scalar>
OlsFit<Scalar> fit_ols(std::shared_ptr<const Dataset<Scalar>> ds,
                       Scalar ridge = Scalar(0));

template <typename Scalar>
OlsFit<Scalar> refit_without(const OlsFit<Scalar>& fit,
                             std::span<const Index> removed);

// Least squares fit of y on X with optional ridge penalty lambda * |theta|^2.
//
// Everything downstream works with the regularized Gram matrix
// N = X^T X + lambda I; with lambda = 0 it is the plain Gram matrix. The
// residual convention is r_i = x_i^T theta - y_i (prediction minus label).
template <typename Scalar = double>
class OlsFit {
 public:
  using Matrix = Mat<Scalar>;
  using Vector = Vec<Scalar>;

  const Vector& params() const { return params_; }
  const Matrix& gram_inverse() const { return gram_inverse_; }
  const Vector& residuals() const { return residuals_; }
  const Dataset<Scalar>& dataset() const { return *dataset_; }
  const std::shared_ptr<const Dataset<Scalar>>& dataset_ptr() const {
    return dataset_;
  }
  Scalar ridge() const { return ridge_; }
  Index rows() const { return dataset_->rows(); }
  Index dim() const { return dataset_->cols(); }

  Scalar leverage(Index i) const { return cross_leverage(i, i); }

  // h_ij = x_i^T N^{-1} x_j
  Scalar cross_leverage(Index i, Index j) const {
    check_row(i);
    check_row(j);
    const auto& x = dataset_->x();
    return x.row(i).dot(gram_inverse_ * x.row(j).transpose());
  }

  // Diagonal of the hat matrix.
  Vector leverages() const {
    const auto& x = dataset_->x();
    return (x * gram_inverse_).cwiseProduct(x).rowwise().sum();
  }

  // Full hat matrix X N^{-1} X^T; O(n^2 d).
  Matrix hat_matrix() const {
    const auto& x = dataset_->x();
    return x * gram_inverse_ * x.transpose();
  }

 private:
  friend OlsFit fit_ols<Scalar>(std::shared_ptr<const Dataset<Scalar>>, Scalar);
  friend OlsFit refit_without<Scalar>(const OlsFit&, std::span<const Index>);

  OlsFit(std::shared_ptr<const Dataset<Scalar>> ds, Vector params,
         Matrix gram_inverse, Scalar ridge)
      : dataset_(std::move(ds)),
        params_(std::move(params)),
        gram_inverse_(std::move(gram_inverse)),
        ridge_(ridge) {
    residuals_ = dataset_->x() * params_ - dataset_->y();
  }

  void check_row(Index i) const {
    if (i < 0 || i >= rows()) {
      throw InvalidArgument("row position " + std::to_string(i) +
                            " out of range");
    }
  }

  std::shared_ptr<const Dataset<Scalar>> dataset_;
  Vector params_;
  Matrix gram_inverse_;
  Vector residuals_;
  Scalar ridge_ = Scalar(0);
};

namespace detail {

template <typename Scalar>
void check_pivots(const Eigen::LDLT<Mat<Scalar>>& ldlt, Scalar scale,
                  const std::string& what) {
  using std::abs;
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError(what + ": factorization failed");
  }
  const Vec<Scalar> pivots = ldlt.vectorD();
  Scalar lo = pivots.size() ? pivots.minCoeff() : Scalar(1);
  Scalar hi = pivots.size() ? pivots.cwiseAbs().maxCoeff() : Scalar(1);
  if (scale > hi) hi = scale;
  if (!(lo > Scalar(kPivotTolerance) * hi)) {
    std::ostringstream msg;
    msg << what << ": relative pivot " << static_cast<double>(lo / hi)
        << " below " << kPivotTolerance;
    throw NumericalError(msg.str());
  }
}

// Factorization of the capacitance matrix I_k - X_S N^{-1} X_S^T together with
// the k x d block X_S N^{-1} that every leave-subset-out formula reuses.
template <typename Scalar>
struct Capacitance {
  Mat<Scalar> xs_ninv;     // X_S N^{-1}
  Mat<Scalar> m;           // M_S = X_S N^{-1} X_S^T
  Vec<Scalar> neg_resid;   // X_S theta - y_S
  Eigen::LDLT<Mat<Scalar>> ldlt;
};

template <typename Scalar>
Capacitance<Scalar> capacitance(const OlsFit<Scalar>& fit,
                                std::span<const Index> subset,
                                bool factor = true) {
  detail::check_positions(subset, fit.rows(), "capacitance");
  const auto k = static_cast<Index>(subset.size());
  const auto& x = fit.dataset().x();
  Mat<Scalar> xs(k, fit.dim());
  Vec<Scalar> rs(k);
  for (Index a = 0; a < k; ++a) {
    const Index i = subset[static_cast<std::size_t>(a)];
    xs.row(a) = x.row(i);
    rs(a) = fit.residuals()(i);
  }
  Capacitance<Scalar> cap;
  cap.xs_ninv = xs * fit.gram_inverse();
  cap.m = cap.xs_ninv * xs.transpose();
  cap.m = Scalar(0.5) * (cap.m + cap.m.transpose()).eval();
  cap.neg_resid = std::move(rs);
  if (factor && k > 0) {
    cap.ldlt.compute(Mat<Scalar>::Identity(k, k) - cap.m);
    check_pivots(cap.ldlt, Scalar(1), "capacitance matrix I - M_S");
  }
  return cap;
}

}  // namespace detail

// Solves the (ridge) normal equations. Throws NumericalError when the Gram
// matrix has a relative pivot below kPivotTolerance.
template <typename Scalar>
OlsFit<Scalar> fit_ols(std::shared_ptr<const Dataset<Scalar>> ds,
                       Scalar ridge) {
  if (!ds) throw InvalidArgument("fit_ols: null dataset");
  if (ridge < Scalar(0)) throw InvalidArgument("fit_ols: ridge must be >= 0");
  const auto& x = ds->x();
  const Index d = x.cols();
  if (ds->intercept() && ds->rows() < d + 1) {
    throw InvalidArgument("fit_ols: need n >= d + 1 rows with an intercept");
  }
  Mat<Scalar> gram = x.transpose() * x;
  gram.diagonal().array() += ridge;
  Eigen::LDLT<Mat<Scalar>> ldlt(gram);
  try {
    detail::check_pivots(ldlt, Scalar(0), "Gram matrix X^T X + ridge I");
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) +
                         (ridge == Scalar(0) ? "; try a positive ridge" : ""));
  }
  Mat<Scalar> inv = ldlt.solve(Mat<Scalar>::Identity(d, d));
  inv = Scalar(0.5) * (inv + inv.transpose()).eval();
  Vec<Scalar> params = ldlt.solve(x.transpose() * ds->y());
  return OlsFit<Scalar>(std::move(ds), std::move(params), std::move(inv),
                        ridge);
}

template <typename Scalar>
OlsFit<Scalar> fit_ols(const Dataset<Scalar>& ds, Scalar ridge = Scalar(0)) {
  return fit_ols(std::make_shared<const Dataset<Scalar>>(ds), ridge);
}

// Exact fit on the rows outside `removed`, obtained by a Woodbury downdate:
//   N_{-S}^{-1} = N^{-1} + N^{-1} X_S^T C^{-1} X_S N^{-1}
//   theta_{-S}  = theta + N^{-1} X_S^T C^{-1} (X_S theta - y_S)
// with C = I - X_S N^{-1} X_S^T. When debug_checks() is on and |S| <= 8 the
// result is compared against a fresh solve.
template <typename Scalar>
OlsFit<Scalar> refit_without(const OlsFit<Scalar>& fit,
                             std::span<const Index> removed) {
  if (static_cast<Index>(removed.size()) >= fit.rows()) {
    throw InvalidArgument("refit_without: cannot remove every row");
  }
  auto remaining =
      std::make_shared<const Dataset<Scalar>>(fit.dataset().without(removed));
  if (removed.empty()) {
    return OlsFit<Scalar>(std::move(remaining), fit.params(),
                          fit.gram_inverse(), fit.ridge());
  }
  const auto cap = detail::capacitance(fit, removed);
  Mat<Scalar> inv = fit.gram_inverse() +
                    cap.xs_ninv.transpose() * cap.ldlt.solve(cap.xs_ninv);
  inv = Scalar(0.5) * (inv + inv.transpose()).eval();
  Vec<Scalar> params =
      fit.params() + cap.xs_ninv.transpose() * cap.ldlt.solve(cap.neg_resid);
  OlsFit<Scalar> out(std::move(remaining), std::move(params), std::move(inv),
                     fit.ridge());

  if (debug_checks().load() && removed.size() <= 8) {
    const auto fresh = fit_ols(out.dataset_ptr(), fit.ridge());
    using std::abs;
    const Scalar diff = (fresh.params() - out.params()).cwiseAbs().maxCoeff();
    const Scalar scale = Scalar(1) + fresh.params().cwiseAbs().maxCoeff();
    if (!(diff <= Scalar(1e-8) * scale)) {
      throw NumericalError("refit_without: downdate disagrees with fresh fit");
    }
  }
  return out;
}

// Closed-form leave-one-out change theta_{-i} - theta = N^{-1} x_i r_i / (1 - h_ii).
template <typename Scalar>
Vec<Scalar> loo_delta(const OlsFit<Scalar>& fit, Index i) {
  const Scalar h = fit.leverage(i);
  if (h >= Scalar(1) - Scalar(kLeverageCeiling)) {
    throw NumericalError("loo_delta: row " + std::to_string(i) +
                         " has leverage 1");
  }
  const auto& x = fit.dataset().x();
  return fit.gram_inverse() * x.row(i).transpose() *
         (fit.residuals()(i) / (Scalar(1) - h));
}

}  // namespace miss

#endif  // MISS_OLS_HPP_
