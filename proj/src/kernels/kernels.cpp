#include "sparsefield/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "kernel_table.hpp"
#include "sparsefield/errors.hpp"

namespace sparsefield::kernels {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void stencil_row_scalar(const double* up, const double* center,
                        const double* down, const double* source, double* out,
                        std::size_t n, const StencilCoefs& c) {
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = c.c_center * center[j] + c.c_x * (center[j - 1] + center[j + 1]) +
             c.c_y * (up[j] + down[j]) + c.c_source * source[j] + c.c_const;
  }
}

bool cpu_has_avx2() {
#if defined(SPARSEFIELD_X86_64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const detail::KernelTable* table_for(Backend b) {
  if (b == Backend::scalar) return &detail::scalar_table();
#if defined(SPARSEFIELD_X86_64)
  return &detail::avx2_table();
#else
  return nullptr;
#endif
}

Backend detect_backend() {
  if (const char* env = std::getenv("SPARSEFIELD_ISA")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::avx2))
      return Backend::avx2;
  }
  return backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

struct Dispatch {
  std::atomic<const detail::KernelTable*> table;
  std::atomic<Backend> backend;
  Dispatch() {
    Backend b = detect_backend();
    backend.store(b);
    table.store(table_for(b));
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

namespace detail {

const KernelTable& scalar_table() {
  static const KernelTable t{sum_scalar,         dot_scalar,
                             axpy_scalar,        sum_abs_diff_scalar,
                             sum_sq_diff_scalar, stencil_row_scalar};
  return t;
}

}  // namespace detail

const char* backend_name(Backend b) {
  return b == Backend::scalar ? "scalar" : "avx2";
}

bool backend_available(Backend b) {
  if (b == Backend::scalar) return true;
  return cpu_has_avx2();
}

Backend active_backend() { return dispatch().backend.load(); }

void select_backend(Backend b) {
  if (!backend_available(b))
    throw ConfigError(std::string("kernel backend not available: ") +
                      backend_name(b));
  dispatch().backend.store(b);
  dispatch().table.store(table_for(b));
}

void reset_backend() {
  Backend b = detect_backend();
  dispatch().backend.store(b);
  dispatch().table.store(table_for(b));
}

double sum(const double* x, std::size_t n) {
  return dispatch().table.load()->sum(x, n);
}

double dot(const double* x, const double* y, std::size_t n) {
  return dispatch().table.load()->dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  dispatch().table.load()->axpy(a, x, y, n);
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  return dispatch().table.load()->sum_abs_diff(a, b, n);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return dispatch().table.load()->sum_sq_diff(a, b, n);
}

void stencil_row(const double* up, const double* center, const double* down,
                 const double* source, double* out, std::size_t n,
                 const StencilCoefs& c) {
  dispatch().table.load()->stencil_row(up, center, down, source, out, n, c);
}

}  // namespace sparsefield::kernels
