#pragma once

// Dense double-precision kernels behind the counting forms, box norms and
// grid convolutions. Every kernel has a scalar reference implementation and
// may have SIMD variants (AVX2 on x86-64, NEON on aarch64); the active
// variant is selected once at runtime from CPU capabilities and can be
// forced with CONFIG_COUNT_ISA=scalar|avx2|neon. All variants use a fixed
// reduction order, so results are deterministic across runs on a given
// machine; scalar and SIMD variants agree to ~1e-12 relative error and are
// equivalence-tested against each other.

#include <cstddef>

namespace confcount::kern {

enum class Isa { Scalar, Avx2, Neon };

Isa active_isa();
const char* isa_name(Isa isa);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);
// sum_i a[i]*b[i]*c[i]
double dot3(const double* a, const double* b, const double* c, std::size_t n);
// sum_i a[i]
double sum(const double* a, std::size_t n);
// out[i] = a[i]*b[i]
void mul(double* out, const double* a, const double* b, std::size_t n);
// acc[i] += a[i]
void add(double* acc, const double* a, std::size_t n);
// acc[i] += alpha*a[i]
void axpy(double* acc, double alpha, const double* a, std::size_t n);
// acc[i] += a[(i+rot) mod n], 0 <= rot < n
void add_rotated(double* acc, const double* a, std::size_t n, std::size_t rot);

// Reference implementations. The dispatched entry points above resolve to
// these when no SIMD variant is available or when forced via the
// environment.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double sum(const double* a, std::size_t n);
void mul(double* out, const double* a, const double* b, std::size_t n);
void add(double* acc, const double* a, std::size_t n);
void axpy(double* acc, double alpha, const double* a, std::size_t n);
}  // namespace scalar

}  // namespace confcount::kern
