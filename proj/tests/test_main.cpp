// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest_torch.hpp"

#include "mptrack/app/training.hpp"

int main(int argc, char** argv) {
  mptrack::app::configure_torch();
  doctest::Context context;
  context.applyCommandLine(argc, argv);
  return context.run();
}
