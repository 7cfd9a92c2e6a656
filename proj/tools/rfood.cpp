// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/cli.hpp"

int main(int argc, char** argv) { return rfood::run_cli(argc, argv); }
