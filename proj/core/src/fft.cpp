#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace microloc::detail {

namespace {

// FFTW planning is not thread-safe; executing a cached plan on fresh buffers
// is. Plans use ESTIMATE (deterministic results) and UNALIGNED (so any
// heap buffer is acceptable at execution time).
std::map<std::tuple<int, int, int>, fftw_plan> g_plans;
std::mutex g_plan_mutex;

fftw_plan plan_for(int d, int n, int sign) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  const auto key = std::make_tuple(d, n, sign);
  if (const auto it = g_plans.find(key); it != g_plans.end()) {
    return it->second;
  }
  const std::size_t size = d == 1 ? static_cast<std::size_t>(n)
                                  : static_cast<std::size_t>(n) * n;
  std::vector<cdouble> a(size), b(size);
  auto* ap = reinterpret_cast<fftw_complex*>(a.data());
  auto* bp = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = d == 1 ? fftw_plan_dft_1d(n, ap, bp, sign, flags)
                          : fftw_plan_dft_2d(n, n, ap, bp, sign, flags);
  if (plan == nullptr) {
    fail(ErrorKind::numeric, "FFTW refused to build a transform plan");
  }
  g_plans.emplace(key, plan);
  return plan;
}

}  // namespace

void raw_dft(int d, int n, int sign, const cdouble* in, cdouble* out) {
  fftw_plan plan = plan_for(d, n, sign);
  // Out-of-place c2c transforms leave the input untouched.
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

// With x_j = -L + j dx and xi = pi (k - n/2) / L, the continuum kernel
// e^{-i x_j xi} splits into the raw DFT kernel times (-1)^{k} on output and
// an index rotation by n/2; n is a power of two >= 4, so (-1)^{n/2} = 1.
void forward_fft(const GridSpec& grid, const cdouble* values,
                 cdouble* coeffs) {
  const int n = grid.n;
  const int half = n / 2;
  std::vector<cdouble> raw(static_cast<std::size_t>(grid.point_count()));
  raw_dft(grid.d, n, -1, values, raw.data());
  const double scale = std::pow(grid.dx(), grid.d);
  if (grid.d == 1) {
    for (int k = 0; k < n; ++k) {
      const double parity = (k & 1) ? -1.0 : 1.0;
      coeffs[k] = scale * parity * raw[static_cast<std::size_t>((k + half) % n)];
    }
  } else {
    for (int k1 = 0; k1 < n; ++k1) {
      for (int k2 = 0; k2 < n; ++k2) {
        const double parity = ((k1 + k2) & 1) ? -1.0 : 1.0;
        const std::size_t src =
            static_cast<std::size_t>((k1 + half) % n) * n + (k2 + half) % n;
        coeffs[static_cast<std::size_t>(k1) * n + k2] =
            scale * parity * raw[src];
      }
    }
  }
}

void inverse_fft(const GridSpec& grid, const cdouble* coeffs,
                 cdouble* values) {
  const int n = grid.n;
  const int half = n / 2;
  const std::size_t size = static_cast<std::size_t>(grid.point_count());
  std::vector<cdouble> staged(size);
  if (grid.d == 1) {
    for (int m = 0; m < n; ++m) {
      const double parity = (m & 1) ? -1.0 : 1.0;
      staged[static_cast<std::size_t>(m)] =
          parity * coeffs[static_cast<std::size_t>((m + half) % n)];
    }
  } else {
    for (int m1 = 0; m1 < n; ++m1) {
      for (int m2 = 0; m2 < n; ++m2) {
        const double parity = ((m1 + m2) & 1) ? -1.0 : 1.0;
        const std::size_t src =
            static_cast<std::size_t>((m1 + half) % n) * n + (m2 + half) % n;
        staged[static_cast<std::size_t>(m1) * n + m2] = parity * coeffs[src];
      }
    }
  }
  raw_dft(grid.d, n, +1, staged.data(), values);
  const double scale = std::pow(grid.dxi() / kTwoPi, grid.d);
  for (std::size_t i = 0; i < size; ++i) values[i] *= scale;
}

}  // namespace microloc::detail
