// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/cli.hpp"

int main(int argc, char** argv) { return amrender::cli_main(argc, argv); }
