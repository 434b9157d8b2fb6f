#pragma once

#include <cstddef>

namespace sparsefield::kernels {

// Inner-loop primitives with a scalar reference implementation and an AVX2
// variant selected at runtime. The scalar path is the ground truth; the
// equivalence of both paths is covered by tests/unit/test_kernels.cpp.
// Set SPARSEFIELD_ISA=scalar (or =avx2) to override auto-detection.

enum class Backend { scalar, avx2 };

const char* backend_name(Backend b);
bool backend_available(Backend b);
Backend active_backend();
// Force a specific backend. Throws ConfigError if unavailable on this CPU.
void select_backend(Backend b);
// Return to auto-detection (env override still applies).
void reset_backend();

double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);

// One line of the explicit heat-step update:
//   out[j] = c_center*center[j] + c_x*(center[j-1] + center[j+1])
//          + c_y*(up[j] + down[j]) + c_source*source[j] + c_const
// center[-1] and center[n] must be readable; boundary columns are the
// caller's job.
struct StencilCoefs {
  double c_center;
  double c_x;
  double c_y;
  double c_source;
  double c_const;
};

void stencil_row(const double* up, const double* center, const double* down,
                 const double* source, double* out, std::size_t n,
                 const StencilCoefs& c);

}  // namespace sparsefield::kernels
