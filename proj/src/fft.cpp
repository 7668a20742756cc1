#include "binaural/fft.hpp"

#include <algorithm>
#include <mutex>

#include <fftw3.h>

#include "binaural/errors.hpp"

namespace binaural {

namespace {
// FFTW plan creation is not thread-safe; execution of a fresh plan is.
std::mutex g_plan_mutex;
}  // namespace

std::vector<Complex> rfft(const RVector& x, int n) {
  if (n <= 0 || n % 2 != 0) throw PreconditionError("rfft: length must be even and positive");
  std::vector<double> in(static_cast<size_t>(n), 0.0);
  const int copy = std::min<int>(n, static_cast<int>(x.size()));
  std::copy_n(x.data(), copy, in.begin());

  std::vector<Complex> out(static_cast<size_t>(n / 2 + 1));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fftw_destroy_plan(plan);
  }
  return out;
}

RVector irfft(const std::vector<Complex>& spectrum, int n) {
  if (n <= 0 || n % 2 != 0) throw PreconditionError("irfft: length must be even and positive");
  if (spectrum.size() != static_cast<size_t>(n / 2 + 1))
    throw DimensionMismatch("irfft: spectrum length must be n/2+1");
  std::vector<Complex> in(spectrum);  // c2r destroys its input
  RVector out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    plan = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fftw_destroy_plan(plan);
  }
  out /= static_cast<double>(n);
  return out;
}

}  // namespace binaural
