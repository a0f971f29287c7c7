//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molmetric/cli.hpp"

int main(int argc, char** argv) { return molmetric::cli::run(argc, argv); }
