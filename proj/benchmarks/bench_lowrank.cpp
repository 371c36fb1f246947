// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>
