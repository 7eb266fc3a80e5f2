#include "tlmor/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace tlmor::kernels {

namespace {

const KernelTable* initial_selection() {
  if (const char* env = std::getenv("TLMOR_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_kernels();
    if (want == "avx2" && avx2_kernels()) return avx2_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_selection()};
  return table;
}

}  // namespace

const KernelTable& active_kernels() { return *current().load(std::memory_order_acquire); }

bool select_kernels(const std::string& name) {
  const KernelTable* t = nullptr;
  if (name == "scalar") t = &scalar_kernels();
  else if (name == "avx2") t = avx2_kernels();
  if (!t) return false;
  current().store(t, std::memory_order_release);
  return true;
}

}  // namespace tlmor::kernels
