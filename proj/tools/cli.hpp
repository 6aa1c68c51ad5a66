// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace tsa::cli {

/// Entry point shared by the `tsa` binary and the tests.
/// Exit codes: 0 ok, 1 user/data error, 2 internal invariant failure.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace tsa::cli
