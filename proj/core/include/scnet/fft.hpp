#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "scnet/tensor.hpp"

namespace scnet {
namespace fft {

// In-place complex transform of arbitrary length n >= 1. Forward uses the
// e^{-2*pi*i*k*j/n} convention; the inverse is unnormalized (scale by 1/n to
// invert a forward transform). Power-of-two lengths run radix-2 directly,
// everything else goes through a Bluestein chirp-z convolution.
void cfft(std::vector<double>& re, std::vector<double>& im, bool inverse);

// Forward DFT of a real signal; writes the n/2 + 1 non-redundant bins.
void rdft(const double* x, std::size_t n, double* re, double* im);

// Inverse of rdft: rebuild length-n real signal from the half spectrum,
// treating the bins as a linear map (conjugate mirror, then scaled inverse).
void irdft(const double* re, const double* im, std::size_t n, double* x);

// Adjoint of the rdft linear map: spectrum-space gradients -> signal space.
void rdft_adjoint(const double* gre, const double* gim, std::size_t n,
                  double* gx);

// Adjoint of the irdft linear map: signal-space gradients -> half spectrum.
void irdft_adjoint(const double* gx, std::size_t n, double* gre, double* gim);

}  // namespace fft

// Forward real FFT along an axis of extent L; returns (re, im) tensors whose
// extent at that axis is L/2 + 1.
std::pair<TensorPtr, TensorPtr> rfft_axis(TensorPtr x, int axis);

// Inverse: (re, im) with extent target_len/2 + 1 at `axis` back to a real
// tensor of extent target_len.
TensorPtr irfft_axis(TensorPtr re, TensorPtr im, int axis,
                     std::int64_t target_len);

}  // namespace scnet
