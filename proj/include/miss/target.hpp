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

#ifndef MISS_TARGET_HPP_
#define MISS_TARGET_HPP_

#include <functional>
#include <utility>

#include "miss/common.hpp"

namespace miss {

enum class TargetKind { linear_test_point, logistic_logit, custom_gradient };

// Scalar quantity of interest phi(theta) whose change under sample removal is
// being maximized.
//
//  * linear_test_point: phi(theta) = x_test^T theta.
//  * logistic_logit:    log-odds of the correct class, s * x_test^T theta with
//                       s = +1 for label 1 and -1 for label 0.
//  * custom_gradient:   caller supplies grad phi at the fit and, optionally,
//                       phi itself (needed only for refit-based effects).
template <typename Scalar = double>
class TargetFunction {
 public:
  using Vector = Vec<Scalar>;
  using ValueFn = std::function<Scalar(const Vector&)>;

  static TargetFunction linear(Vector x_test) {
    TargetFunction t;
    t.kind_ = TargetKind::linear_test_point;
    t.gradient_ = x_test;
    t.test_point_ = std::move(x_test);
    return t;
  }

  static TargetFunction logit(Vector x_test, bool label_is_one) {
    TargetFunction t;
    t.kind_ = TargetKind::logistic_logit;
    t.sign_ = label_is_one ? Scalar(1) : Scalar(-1);
    t.gradient_ = t.sign_ * x_test;
    t.test_point_ = std::move(x_test);
    return t;
  }

  static TargetFunction custom(Vector gradient_at_fit, ValueFn value = {}) {
    TargetFunction t;
    t.kind_ = TargetKind::custom_gradient;
    t.gradient_ = std::move(gradient_at_fit);
    t.value_ = std::move(value);
    return t;
  }

  TargetKind kind() const { return kind_; }
  const Vector& test_point() const { return test_point_; }
  const Vector& gradient() const { return gradient_; }

  Scalar operator()(const Vector& theta) const {
    switch (kind_) {
      case TargetKind::linear_test_point:
      case TargetKind::logistic_logit:
        return sign_ * test_point_.dot(theta);
      case TargetKind::custom_gradient:
        if (!value_) {
          throw InvalidArgument("custom target has no value function");
        }
        return value_(theta);
    }
    return Scalar(0);
  }

 private:
  TargetKind kind_ = TargetKind::linear_test_point;
  Vector test_point_;
  Vector gradient_;
  Scalar sign_ = Scalar(1);
  ValueFn value_;
};

namespace detail {

template <typename Scalar>
void check_target_dim(const TargetFunction<Scalar>& target, Index d) {
  if (target.gradient().size() != d) {
    throw InvalidArgument("target gradient has length " +
                          std::to_string(target.gradient().size()) +
                          ", model has " + std::to_string(d) + " parameters");
  }
}

}  // namespace detail
}  // namespace miss

#endif  // MISS_TARGET_HPP_
