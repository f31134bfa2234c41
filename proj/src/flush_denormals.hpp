// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace gmfoo::detail {

// Covariances of distant points underflow into subnormals, which x86 handles
// in microcode at ~100x the cost. Values that small carry no information for
// a GP, so hot loops run with flush-to-zero and denormals-are-zero set.
// MXCSR is per thread; the previous state is restored on scope exit.
class FlushDenormals {
 public:
#if defined(__SSE2__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | kFtz | kDaz); }
  ~FlushDenormals() { _mm_setcsr(saved_); }
#else
  FlushDenormals() = default;
#endif
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
#if defined(__SSE2__)
  static constexpr unsigned kFtz = 0x8000;
  static constexpr unsigned kDaz = 0x0040;
  unsigned saved_;
#endif
};

}  // namespace gmfoo::detail
