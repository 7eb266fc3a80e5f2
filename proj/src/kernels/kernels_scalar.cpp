#include "tlmor/kernels/kernels.hpp"

#include <cmath>

namespace tlmor::kernels {

namespace {

void em_combine_scalar(std::size_t n, std::size_t cols, const double* x, const double* const* w, std::size_t q,
                       const double* dw, const double* drift, const double* scale, double* out) {
  for (std::size_t j = 0; j < cols; ++j) {
    const double* xj = x + j * n;
    double* oj = out + j * n;
    for (std::size_t r = 0; r < n; ++r) {
      double acc = xj[r] + drift[r];
      for (std::size_t i = 0; i < q; ++i) acc += dw[i + q * j] * w[i][r + j * n];
      oj[r] = scale ? scale[r] * acc : acc;
    }
  }
}

void column_distance_scalar(std::size_t p, std::size_t cols, const double* a, const double* b, double* out) {
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < p; ++r) {
      const double d = a[r + j * p] - b[r + j * p];
      s += d * d;
    }
    out[j] = std::sqrt(s);
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", em_combine_scalar, column_distance_scalar};
  return table;
}

}  // namespace tlmor::kernels
