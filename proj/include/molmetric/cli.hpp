//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_CLI_HPP
#define MOLMETRIC_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace molmetric::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitUsage = 64;

// args[0] is the program name. JSON results go to `out`, everything meant
// for people goes to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace molmetric::cli

#endif  // MOLMETRIC_CLI_HPP
