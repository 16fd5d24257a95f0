#include "confcount/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace confcount::kern {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

void mul(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void add(double* acc, const double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a[i];
}

void axpy(double* acc, double alpha, const double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += alpha * a[i];
}

}  // namespace scalar

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define CONFCOUNT_HAVE_AVX2_TU 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double sum(const double* a, std::size_t n);
void mul(double* out, const double* a, const double* b, std::size_t n);
void add(double* acc, const double* a, std::size_t n);
void axpy(double* acc, double alpha, const double* a, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define CONFCOUNT_HAVE_NEON_TU 1
namespace neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t ab = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, ab, vld1q_f64(c + i));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

double sum(const double* a, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(a + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i];
  return s;
}

void mul(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void add(double* acc, const double* a, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(a + i)));
  for (; i < n; ++i) acc[i] += a[i];
}

void axpy(double* acc, double alpha, const double* a, std::size_t n) {
  float64x2_t al = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(acc + i, vfmaq_f64(vld1q_f64(acc + i), al, vld1q_f64(a + i)));
  for (; i < n; ++i) acc[i] += alpha * a[i];
}

}  // namespace neon
#endif

namespace {

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*mul)(double*, const double*, const double*, std::size_t);
  void (*add)(double*, const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
};

constexpr Table kScalarTable = {Isa::Scalar, scalar::dot, scalar::dot3,
                                scalar::sum, scalar::mul, scalar::add,
                                scalar::axpy};

#if defined(CONFCOUNT_HAVE_AVX2_TU)
constexpr Table kAvx2Table = {Isa::Avx2, avx2::dot, avx2::dot3,
                              avx2::sum, avx2::mul, avx2::add, avx2::axpy};
#endif
#if defined(CONFCOUNT_HAVE_NEON_TU)
constexpr Table kNeonTable = {Isa::Neon, neon::dot, neon::dot3,
                              neon::sum, neon::mul, neon::add, neon::axpy};
#endif

Table select_table() {
  const char* forced = std::getenv("CONFIG_COUNT_ISA");
  if (forced != nullptr) {
    if (std::strcmp(forced, "scalar") == 0) return kScalarTable;
#if defined(CONFCOUNT_HAVE_AVX2_TU)
    if (std::strcmp(forced, "avx2") == 0) {
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return kAvx2Table;
      std::fprintf(stderr,
                   "confcount: CONFIG_COUNT_ISA=avx2 not supported by this "
                   "CPU, using scalar kernels\n");
      return kScalarTable;
    }
#endif
#if defined(CONFCOUNT_HAVE_NEON_TU)
    if (std::strcmp(forced, "neon") == 0) return kNeonTable;
#endif
    std::fprintf(stderr,
                 "confcount: unknown CONFIG_COUNT_ISA value '%s', using "
                 "scalar kernels\n",
                 forced);
    return kScalarTable;
  }
#if defined(CONFCOUNT_HAVE_AVX2_TU)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return kAvx2Table;
#endif
#if defined(CONFCOUNT_HAVE_NEON_TU)
  return kNeonTable;
#endif
  return kScalarTable;
}

const Table& table() {
  static const Table t = select_table();
  return t;
}

}  // namespace

Isa active_isa() { return table().isa; }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

double dot(const double* a, const double* b, std::size_t n) {
  return table().dot(a, b, n);
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  return table().dot3(a, b, c, n);
}

double sum(const double* a, std::size_t n) { return table().sum(a, n); }

void mul(double* out, const double* a, const double* b, std::size_t n) {
  table().mul(out, a, b, n);
}

void add(double* acc, const double* a, std::size_t n) {
  table().add(acc, a, n);
}

void axpy(double* acc, double alpha, const double* a, std::size_t n) {
  table().axpy(acc, alpha, a, n);
}

void add_rotated(double* acc, const double* a, std::size_t n,
                 std::size_t rot) {
  // Split at the wrap point; both halves are contiguous adds.
  add(acc, a + rot, n - rot);
  add(acc + (n - rot), a, rot);
}

}  // namespace confcount::kern
