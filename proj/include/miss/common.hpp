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

#ifndef MISS_COMMON_HPP_
#define MISS_COMMON_HPP_

#include <atomic>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace miss {

using Index = Eigen::Index;
using RowId = std::int64_t;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Positions into the rows of the current design matrix.
using IndexSet = std::vector<Index>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or malformed input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Singular systems, failed convergence, exhausted searches.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Relative pivot threshold shared by every factorization in the library.
inline constexpr double kPivotTolerance = 1e-10;

// Rows whose leverage is this close to one cannot be removed individually.
inline constexpr double kLeverageCeiling = 1e-12;

// Process-wide switch for cross-checking Woodbury downdates against fresh
// solves. Off by default; the CLI flips it with --debug.
inline std::atomic<bool>& debug_checks() {
  static std::atomic<bool> flag{false};
  return flag;
}

namespace detail {

inline void check_positions(std::span<const Index> positions, Index n,
                            const char* what) {
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Index p : positions) {
    if (p < 0 || p >= n) {
      throw InvalidArgument(std::string(what) + ": row position " +
                            std::to_string(p) + " out of range [0, " +
                            std::to_string(n) + ")");
    }
    if (seen[static_cast<std::size_t>(p)]) {
      throw InvalidArgument(std::string(what) + ": duplicate row position " +
                            std::to_string(p));
    }
    seen[static_cast<std::size_t>(p)] = true;
  }
}

}  // namespace detail
}  // namespace miss

#endif  // MISS_COMMON_HPP_
