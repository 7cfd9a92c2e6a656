// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

namespace rfood {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.
// Failures print a single "error: <category>: <message>" line to stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace rfood
