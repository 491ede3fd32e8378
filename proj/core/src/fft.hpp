// Internal FFTW bridge: unnormalized DFTs plus the centered continuum
// normalization used by FieldState. Not installed.
#pragma once

#include "microloc/common.hpp"
#include "microloc/field.hpp"

namespace microloc::detail {

// Unnormalized c2c DFT on the n^d row-major array; sign -1 is the forward
// exponent e^{-2 pi i j k / n}. in and out must be distinct buffers.
void raw_dft(int d, int n, int sign, const cdouble* in, cdouble* out);

// values -> coeffs with u_hat(xi_k) = dx^d sum_j e^{-i x_j xi_k} u(x_j),
// centered spectral storage.
void forward_fft(const GridSpec& grid, const cdouble* values, cdouble* coeffs);

// coeffs -> values with u(x_j) = (2 pi)^{-d} dxi^d sum_k e^{i x_j xi_k} c_k.
void inverse_fft(const GridSpec& grid, const cdouble* coeffs, cdouble* values);

}  // namespace microloc::detail
