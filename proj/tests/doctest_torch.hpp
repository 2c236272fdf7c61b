// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// c10 defines a glog-style CHECK; the doctest macro replaces it in tests.
#undef CHECK
#include "doctest.h"
