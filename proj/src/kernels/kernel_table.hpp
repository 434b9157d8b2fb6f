#pragma once

#include <cstddef>

#include "sparsefield/kernels.hpp"

namespace sparsefield::kernels::detail {

struct KernelTable {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum_abs_diff)(const double*, const double*, std::size_t);
  double (*sum_sq_diff)(const double*, const double*, std::size_t);
  void (*stencil_row)(const double*, const double*, const double*,
                      const double*, double*, std::size_t,
                      const StencilCoefs&);
};

const KernelTable& scalar_table();
#if defined(SPARSEFIELD_X86_64)
const KernelTable& avx2_table();
#endif

}  // namespace sparsefield::kernels::detail
