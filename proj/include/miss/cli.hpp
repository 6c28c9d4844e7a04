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

#ifndef MISS_CLI_HPP_
#define MISS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace miss {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

// Entry point of the `miss` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

// "2,3,5" or the inclusive range "2:30".
std::vector<long> parse_budget_list(const std::string& text);

}  // namespace miss

#endif  // MISS_CLI_HPP_
