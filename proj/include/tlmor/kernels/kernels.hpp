#pragma once

#include <cstddef>
#include <string>

namespace tlmor::kernels {

/// Inner loops of the path simulation. All blocks are column-major with a
/// leading dimension equal to their row count.
struct KernelTable {
  const char* name;

  /// out[:, j] = scale .* (x[:, j] + drift + sum_i dw[i + q j] * w_i[:, j])
  /// for j < cols. `scale` may be null (identity). `out` may alias `x`.
  void (*em_combine)(std::size_t n, std::size_t cols, const double* x, const double* const* w, std::size_t q,
                     const double* dw, const double* drift, const double* scale, double* out);

  /// out[j] = || a[:, j] - b[:, j] ||_2 for p-row blocks.
  void (*column_distance)(std::size_t p, std::size_t cols, const double* a, const double* b, double* out);
};

const KernelTable& scalar_kernels();
/// Null when the binary or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// Kernels used by the simulator. Picked once from the CPU features unless
/// TLMOR_KERNELS=scalar|avx2 says otherwise.
const KernelTable& active_kernels();
/// Overrides the selection; returns false for an unknown or unsupported name.
bool select_kernels(const std::string& name);

}  // namespace tlmor::kernels
