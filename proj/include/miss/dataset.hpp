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

#ifndef MISS_DATASET_HPP_
#define MISS_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "miss/common.hpp"
#include "miss/rng.hpp"

namespace miss {

// A design matrix with targets. Rows carry stable identifiers so that a
// sample keeps its identity while subsets are removed around it.
//
// When `intercept` is set the first column is all ones. The n >= d + 1 row
// requirement is enforced where a model is fitted (and at CSV ingestion), so
// held-out splits may be smaller than d. Immutable once built.
template <typename Scalar = double>
class Dataset {
 public:
  using Matrix = Mat<Scalar>;
  using Vector = Vec<Scalar>;

  Dataset() = default;

  // Row ids default to 0..n-1.
  Dataset(Matrix x, Vector y, bool intercept, std::vector<RowId> row_ids = {})
      : x_(std::move(x)),
        y_(std::move(y)),
        intercept_(intercept),
        row_ids_(std::move(row_ids)) {
    if (row_ids_.empty() && x_.rows() > 0) {
      row_ids_.resize(static_cast<std::size_t>(x_.rows()));
      std::iota(row_ids_.begin(), row_ids_.end(), RowId{0});
    }
    validate();
  }

  const Matrix& x() const { return x_; }
  const Vector& y() const { return y_; }
  bool intercept() const { return intercept_; }
  const std::vector<RowId>& row_ids() const { return row_ids_; }
  Index rows() const { return x_.rows(); }
  Index cols() const { return x_.cols(); }

  RowId row_id(Index position) const {
    return row_ids_.at(static_cast<std::size_t>(position));
  }

  Index position_of(RowId id) const {
    auto it = std::find(row_ids_.begin(), row_ids_.end(), id);
    if (it == row_ids_.end()) {
      throw InvalidArgument("unknown row id " + std::to_string(id));
    }
    return static_cast<Index>(it - row_ids_.begin());
  }

  // Keeps the listed rows, in the order given.
  Dataset select(std::span<const Index> positions) const {
    detail::check_positions(positions, rows(), "Dataset::select");
    const auto k = static_cast<Index>(positions.size());
    Matrix x(k, cols());
    Vector y(k);
    std::vector<RowId> ids(positions.size());
    for (Index r = 0; r < k; ++r) {
      const Index src = positions[static_cast<std::size_t>(r)];
      x.row(r) = x_.row(src);
      y(r) = y_(src);
      ids[static_cast<std::size_t>(r)] = row_id(src);
    }
    return Dataset(std::move(x), std::move(y), intercept_, std::move(ids));
  }

  // Drops the listed rows; the survivors keep their relative order.
  Dataset without(std::span<const Index> positions) const {
    detail::check_positions(positions, rows(), "Dataset::without");
    std::vector<bool> drop(static_cast<std::size_t>(rows()), false);
    for (Index p : positions) drop[static_cast<std::size_t>(p)] = true;
    IndexSet keep;
    keep.reserve(static_cast<std::size_t>(rows()) - positions.size());
    for (Index i = 0; i < rows(); ++i) {
      if (!drop[static_cast<std::size_t>(i)]) keep.push_back(i);
    }
    return select(keep);
  }

 private:
  void validate() const {
    if (y_.size() != x_.rows()) {
      throw InvalidArgument("Dataset: " + std::to_string(x_.rows()) +
                            " rows but " + std::to_string(y_.size()) +
                            " targets");
    }
    if (static_cast<Index>(row_ids_.size()) != x_.rows()) {
      throw InvalidArgument("Dataset: row id count does not match rows");
    }
    if (!x_.allFinite() || !y_.allFinite()) {
      throw InvalidArgument("Dataset: non-finite entry");
    }
    std::unordered_set<RowId> ids(row_ids_.begin(), row_ids_.end());
    if (ids.size() != row_ids_.size()) {
      throw InvalidArgument("Dataset: row ids are not unique");
    }
    if (intercept_ && x_.cols() > 0 &&
        ((x_.col(0).array() - Scalar(1)).abs() > Scalar(0)).any()) {
      throw InvalidArgument("Dataset: intercept column must be all ones");
    }
  }

  Matrix x_;
  Vector y_;
  bool intercept_ = false;
  std::vector<RowId> row_ids_;
};

// Label process y = X theta* - e with e = (eps, 0, ..., 0, ratio * eps).
template <typename Scalar = double>
struct SyntheticConfig {
  Vec<Scalar> true_params;
  Scalar noise = Scalar(1);
  Scalar ratio = Scalar(0);
  int copies = 1;
  std::uint64_t seed = 0;

  void validate() const {
    // Zero noise is the noiseless limit; the theorem searches require > 0.
    if (!(noise >= Scalar(0))) {
      throw InvalidArgument("SyntheticConfig: noise must be non-negative");
    }
    if (copies < 1) {
      throw InvalidArgument("SyntheticConfig: copies must be >= 1");
    }
    using std::abs;
    if (abs(ratio + Scalar(1)) < Scalar(1e-12)) {
      throw InvalidArgument("SyntheticConfig: ratio must differ from -1");
    }
  }
};

// Two clusters of all-ones rows appended to a uniform design; one cluster's
// labels are pushed up and the other's down.
struct ClusterConfig {
  Index n = 1000;
  Index d = 10;
  Index cluster_size = 50;
  double noise_var = 0.2;
  Index n_test = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (d < 1 || n < 1 || cluster_size < 1 || n_test < 0) {
      throw InvalidArgument("ClusterConfig: sizes must be positive");
    }
    if (2 * cluster_size >= n) {
      throw InvalidArgument("ClusterConfig: need 2 * cluster_size < n");
    }
    if (!(noise_var > 0.0)) {
      throw InvalidArgument("ClusterConfig: noise_var must be positive");
    }
  }
};

// Applies the label process to X_base. With copies = c > 1 the first row is
// emitted c times at the top and the last row c times at the bottom, so the
// copies of the first sample occupy positions [0, c) and those of the last
// sample occupy [N - c, N).
template <typename Scalar>
Dataset<Scalar> generate_label_process(const Mat<Scalar>& x_base,
                                       const SyntheticConfig<Scalar>& cfg) {
  cfg.validate();
  const Index n = x_base.rows();
  const Index d = x_base.cols();
  if (n < 3) throw InvalidArgument("generate_label_process: need n >= 3");
  if (cfg.true_params.size() != d) {
    throw InvalidArgument("generate_label_process: true_params has length " +
                          std::to_string(cfg.true_params.size()) +
                          ", expected " + std::to_string(d));
  }
  if (((x_base.col(0).array() - Scalar(1)).abs() > Scalar(0)).any()) {
    throw InvalidArgument(
        "generate_label_process: first column of X_base must be all ones");
  }

  Vec<Scalar> y = x_base * cfg.true_params;
  y(0) -= cfg.noise;
  y(n - 1) -= cfg.ratio * cfg.noise;

  const Index c = cfg.copies;
  const Index total = n + 2 * (c - 1);
  Mat<Scalar> x(total, d);
  Vec<Scalar> labels(total);
  Index out = 0;
  for (Index k = 0; k < c; ++k, ++out) {
    x.row(out) = x_base.row(0);
    labels(out) = y(0);
  }
  for (Index i = 1; i + 1 < n; ++i, ++out) {
    x.row(out) = x_base.row(i);
    labels(out) = y(i);
  }
  for (Index k = 0; k < c; ++k, ++out) {
    x.row(out) = x_base.row(n - 1);
    labels(out) = y(n - 1);
  }

  Eigen::LDLT<Mat<Scalar>> gram(x.transpose() * x);
  const auto pivots = gram.vectorD().cwiseAbs();
  if (gram.info() != Eigen::Success ||
      pivots.minCoeff() <= Scalar(kPivotTolerance) * pivots.maxCoeff()) {
    throw NumericalError(
        "generate_label_process: Gram matrix is singular; fit with a ridge "
        "penalty instead");
  }
  return Dataset<Scalar>(std::move(x), std::move(labels), true);
}

// Returns (train, test points). Draw order from the seeded stream: theta*,
// the uniform block of X row by row, one Z per cluster row, then the test
// points row by row. Rows [n - 2c, n - c) receive +eps_i and rows
// [n - c, n) receive -eps_i.
template <typename Scalar = double>
std::pair<Dataset<Scalar>, Mat<Scalar>> generate_cancellation_cluster(
    const ClusterConfig& cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  const Index n = cfg.n, d = cfg.d, c = cfg.cluster_size;

  Vec<Scalar> theta(d);
  for (Index j = 0; j < d; ++j) theta(j) = Scalar(rng.uniform(-1.0, 1.0));

  Mat<Scalar> x(n, d);
  for (Index i = 0; i < n - 2 * c; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = Scalar(rng.uniform(-1.0, 1.0));
  }
  x.bottomRows(2 * c).setOnes();

  Vec<Scalar> y = x * theta;
  const double stddev = std::sqrt(cfg.noise_var);
  for (Index i = n - 2 * c; i < n; ++i) {
    const Scalar eps = y(i) * Scalar(rng.normal(1.0, stddev));
    y(i) += (i < n - c) ? eps : -eps;
  }

  Mat<Scalar> tests(cfg.n_test, d);
  for (Index t = 0; t < cfg.n_test; ++t) {
    for (Index j = 0; j < d; ++j) tests(t, j) = Scalar(rng.uniform(-1.0, 1.0));
  }
  return {Dataset<Scalar>(std::move(x), std::move(y), false), std::move(tests)};
}

// Inserts count - 1 extra copies of the row right after it. Copies receive
// fresh ids above the current maximum.
template <typename Scalar>
Dataset<Scalar> duplicate_rows(const Dataset<Scalar>& ds, RowId id,
                               Index count) {
  if (count < 2) throw InvalidArgument("duplicate_rows: count must be >= 2");
  const Index src = ds.position_of(id);
  const Index n = ds.rows();
  const Index total = n + count - 1;
  Mat<Scalar> x(total, ds.cols());
  Vec<Scalar> y(total);
  std::vector<RowId> ids;
  ids.reserve(static_cast<std::size_t>(total));
  RowId next_id = *std::max_element(ds.row_ids().begin(), ds.row_ids().end());
  Index out = 0;
  for (Index i = 0; i < n; ++i) {
    const Index reps = (i == src) ? count : 1;
    for (Index r = 0; r < reps; ++r, ++out) {
      x.row(out) = ds.x().row(i);
      y(out) = ds.y()(i);
      ids.push_back(r == 0 ? ds.row_id(i) : ++next_id);
    }
  }
  return Dataset<Scalar>(std::move(x), std::move(y), ds.intercept(),
                         std::move(ids));
}

// Returns (train, test). A seeded Fisher-Yates shuffle picks the test rows;
// both halves keep the original row order.
template <typename Scalar>
std::pair<Dataset<Scalar>, Dataset<Scalar>> train_test_split(
    const Dataset<Scalar>& ds, Index n_test, std::uint64_t seed) {
  const Index n = ds.rows();
  if (n_test <= 0 || n_test >= n) {
    throw InvalidArgument("train_test_split: n_test must lie in (0, " +
                          std::to_string(n) + ")");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  SplitMix64 rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  IndexSet test(perm.begin(), perm.begin() + n_test);
  IndexSet train(perm.begin() + n_test, perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {ds.select(train), ds.select(test)};
}

}  // namespace miss

#endif  // MISS_DATASET_HPP_
