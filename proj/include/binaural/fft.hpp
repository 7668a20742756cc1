// fft.hpp
// Thin wrappers over FFTW for real transforms of even length n.

#ifndef BINAURAL_FFT_HPP
#define BINAURAL_FFT_HPP

#include <vector>

#include "binaural/types.hpp"

namespace binaural {

// Forward real FFT; input is zero-padded or truncated to n, returns n/2+1 bins.
std::vector<Complex> rfft(const RVector& x, int n);

// Inverse of rfft (scaled by 1/n), returns n samples.
RVector irfft(const std::vector<Complex>& spectrum, int n);

}  // namespace binaural

#endif
