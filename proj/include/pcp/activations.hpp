#pragma once

#include <cstddef>

namespace pcp {

// Elementwise kernels, compiled in their own translation unit with
// vectorization-friendly flags. All take raw pointers over `n` doubles.

void tanh_forward(const double* x, double* y, size_t n);

/// dx += dy * (1 - y^2) where y = tanh(x).
void tanh_backward(const double* y, const double* dy, double* dx, size_t n);

void silu_forward(const double* x, double* y, size_t n);

/// dx += dy * (sig + x * sig * (1 - sig)) with sig = y / x recovered from
/// sigma(x) directly; takes x and y = x * sigma(x).
void silu_backward(const double* x, const double* y, const double* dy,
                   double* dx, size_t n);

}  // namespace pcp
