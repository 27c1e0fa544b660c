#pragma once

#include <cstddef>

// Low-level dense kernels used by the linear-algebra layer. Every operation
// exists in a scalar reference form and, on x86-64, an AVX2/FMA form compiled
// in a separate translation unit. The backend is picked once at startup
// (overridable via the LCQP_KERNELS environment variable or select_backend)
// and the two implementations are equivalence-tested against each other.

namespace lcqp::kernels {

struct Ops {
  const char* name;

  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);

  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  // x[i] *= a
  void (*scal)(double a, double* x, std::size_t n);

  // max_i |x[i]|, 0 for n == 0
  double (*norm_inf)(const double* x, std::size_t n);

  // y = A x for row-major A (rows x cols)
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y);

  // y = A^T x for row-major A (rows x cols), y has length cols
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y);

  // Plane rotation: (x[i], y[i]) <- (c*x[i] + s*y[i], -s*x[i] + c*y[i])
  void (*rot)(double c, double s, double* x, double* y, std::size_t n);
};

// Scalar reference backend; always available.
const Ops& scalar_backend();

// AVX2/FMA backend, or nullptr when unsupported by the build or the CPU.
const Ops* avx2_backend();

// Currently selected backend. First use consults LCQP_KERNELS
// ("scalar", "avx2", "auto"); unknown values and unavailable
// backends fall back to auto-detection.
const Ops& active();

// Force a backend by name ("scalar", "avx2", "auto"). Returns false and
// leaves the selection unchanged if the name is unknown or unavailable.
bool select_backend(const char* name);

}  // namespace lcqp::kernels
