#include "confcount/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "confcount/dft.hpp"
#include "confcount/kernels.hpp"
#include "confcount/parallel.hpp"

namespace confcount::forms {

namespace {

constexpr double kBoundTol = 1e-12;

// index of (a - b) on F_q^2, both given as point indices
inline std::size_t diff_index(std::size_t a, std::size_t b, std::uint32_t q) {
  std::uint32_t ax = static_cast<std::uint32_t>(a) % q, ay = static_cast<std::uint32_t>(a) / q;
  std::uint32_t bx = static_cast<std::uint32_t>(b) % q, by = static_cast<std::uint32_t>(b) / q;
  return (ax + q - bx) % q + static_cast<std::size_t>((ay + q - by) % q) * q;
}

// dst[y] += sum over sphere points s of src[y + s] (coordinates mod q)
void sphere_shift_sum(double* dst, const double* src, std::uint32_t q,
                      const std::vector<std::array<std::uint32_t, 2>>& support) {
  for (const auto& s : support) {
    const std::uint32_t sx = s[0], sy = s[1];
    for (std::uint32_t y = 0; y < q; ++y) {
      const std::uint32_t src_row = (y + sy) % q;
      kern::add_rotated(dst + static_cast<std::size_t>(y) * q,
                        src + static_cast<std::size_t>(src_row) * q, q, sx);
    }
  }
}

// E_{x1,x2 in F_q^2} f1(x1) f2(x2) sigma_t(x2 - x1), via the sphere support
double d1_term(const ff::FieldFunction& f1, const ff::FieldFunction& f2,
               const ff::SphereFunction& sph) {
  const std::uint32_t q = sph.q;
  const std::size_t n = f1.size();
  std::vector<double> shift(n, 0.0);
  sphere_shift_sum(shift.data(), f2.data(), q, sph.support);
  const double raw = kern::dot(f1.data(), shift.data(), n);
  // one factor q from sigma, q^{-4} from the two means
  return raw / (static_cast<double>(n) * n / q);
}

// table with the two q^2-blocks swapped: out[x2 + N*x1] = f[x1 + N*x2]
std::vector<double> transpose_blocks(const ff::FieldFunction& f) {
  const std::size_t n = static_cast<std::size_t>(f.q()) * f.q();
  std::vector<double> out(n * n);
  for (std::size_t x2 = 0; x2 < n; ++x2)
    for (std::size_t x1 = 0; x1 < n; ++x1) out[x2 + n * x1] = f[x1 + n * x2];
  return out;
}

double eval_N_d2k2(const ConfigurationSpace& space, const EdgeFunctionFamily& fam) {
  const std::uint32_t q = space.field.q;
  const std::size_t n = static_cast<std::size_t>(q) * q;
  // edges in enumeration order: (1:1,2:1), (1:1,2:2), (1:2,2:1), (1:2,2:2)
  const auto f11 = transpose_blocks(fam.fn(0));
  const auto f12 = transpose_blocks(fam.fn(1));
  const auto f21 = transpose_blocks(fam.fn(2));
  const auto f22 = transpose_blocks(fam.fn(3));
  const auto sph1 = ff::make_sphere(space.field, space.t[0]);
  const auto sph2 = ff::make_sphere(space.field, space.t[1]);

  double total = par::sum_blocks(n, [&](std::size_t x11) {
    std::vector<double> g(n), h(n), shift(n);
    double acc = 0.0;
    for (const auto& s : sph1.support) {
      const std::size_t x12 =
          (x11 % q + s[0]) % q + static_cast<std::size_t>((x11 / q + s[1]) % q) * q;
      kern::mul(g.data(), f11.data() + n * x11, f21.data() + n * x12, n);
      kern::mul(h.data(), f12.data() + n * x11, f22.data() + n * x12, n);
      std::fill(shift.begin(), shift.end(), 0.0);
      sphere_shift_sum(shift.data(), h.data(), q, sph2.support);
      acc += kern::dot(g.data(), shift.data(), n);
    }
    return acc;
  });
  // two sigma factors contribute q^2; the four means contribute q^{-8}
  return total * q * q / (static_cast<double>(n) * n * n * n);
}

double eval_M_d2k2(const EdgeFunctionFamily& fam) {
  const std::size_t n = static_cast<std::size_t>(fam.q()) * fam.q();
  const auto f11 = transpose_blocks(fam.fn(0));
  const auto f12 = transpose_blocks(fam.fn(1));
  const auto f21 = transpose_blocks(fam.fn(2));
  const auto f22 = transpose_blocks(fam.fn(3));
  // M = E_{x11,x12} (E_y f11(x11,y) f21(x12,y)) (E_y f12(x11,y) f22(x12,y))
  double total = par::sum_blocks(n, [&](std::size_t x11) {
    double acc = 0.0;
    for (std::size_t x12 = 0; x12 < n; ++x12) {
      const double a = kern::dot(f11.data() + n * x11, f21.data() + n * x12, n);
      const double b = kern::dot(f12.data() + n * x11, f22.data() + n * x12, n);
      acc += a * b;
    }
    return acc;
  });
  return total / (static_cast<double>(n) * n * n * n);
}

struct ReferenceGrid {
  // per edge: slot indices (into the 2d x-slots) of its blocks, ascending
  std::vector<std::vector<std::uint32_t>> edge_slots;
};

ReferenceGrid reference_grid(const EdgeFunctionFamily& fam) {
  ReferenceGrid grid;
  for (std::size_t i = 0; i < fam.edge_count(); ++i) {
    std::vector<std::uint32_t> slots;
    for (const auto& entry : fam.edge(i).entries)
      slots.push_back((entry.block - 1) * 2 + (entry.label - 1));
    grid.edge_slots.push_back(std::move(slots));
  }
  return grid;
}

double eval_reference(const ConfigurationSpace* space, const EdgeFunctionFamily& fam) {
  const std::uint32_t q = fam.q();
  const std::size_t n = static_cast<std::size_t>(q) * q;
  const std::uint32_t d = fam.d();
  const std::uint32_t slots = 2 * d;
  const ReferenceGrid grid = reference_grid(fam);

  std::vector<ff::SphereFunction> spheres;
  if (space != nullptr)
    for (std::uint32_t j = 0; j < d; ++j)
      spheres.push_back(ff::make_sphere(space->field, space->t[j]));

  std::vector<std::size_t> x(slots, 0);
  double total = 0.0;
  double count = 0.0;
  for (;;) {
    double term = 1.0;
    for (std::size_t e = 0; e < fam.edge_count(); ++e) {
      std::size_t idx = 0;
      const auto& es = grid.edge_slots[e];
      for (std::size_t p = es.size(); p-- > 0;) idx = idx * n + x[es[p]];
      term *= fam.fn(e)[idx];
      if (term == 0.0) break;
    }
    if (space != nullptr && term != 0.0)
      for (std::uint32_t j = 0; j < d; ++j)
        term *= spheres[j].table[diff_index(x[2 * j + 1], x[2 * j], q)];
    total += term;
    count += 1.0;
    std::uint32_t s = 0;
    while (s < slots && ++x[s] == n) x[s++] = 0;
    if (s == slots) break;
  }
  return total / count;
}

}  // namespace

ConfigurationSpace::ConfigurationSpace(ff::PrimeField field_, std::uint32_t d_,
                                       std::vector<std::uint32_t> t_)
    : field(field_), d(d_), t(std::move(t_)) {
  if (d < 1) throw std::invalid_argument("ConfigurationSpace: d must be >= 1");
  if (t.size() != d)
    throw std::invalid_argument("ConfigurationSpace: need one t_j per block");
  for (auto tj : t)
    if (tj == 0 || tj % field.q == 0 || tj >= field.q)
      throw std::invalid_argument("ConfigurationSpace: t_j must be nonzero mod q");
}

EdgeFunctionFamily::EdgeFunctionFamily(ff::PrimeField field, std::uint32_t d,
                                       std::uint32_t k)
    : spec_(hg::BundleSpec::uniform(d, k, 2)), field_(field),
      edges_(hg::enumerate_bundle(spec_)) {
  fns_.reserve(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i)
    fns_.emplace_back(field_, 2 * k, 1.0);
}

void EdgeFunctionFamily::set(std::size_t i, ff::FieldFunction f) {
  if (f.q() != field_.q || f.m() != 2 * spec_.k)
    throw std::invalid_argument("EdgeFunctionFamily::set: wrong table shape");
  if (f.max_abs() > 1.0 + kBoundTol)
    throw std::invalid_argument("EdgeFunctionFamily::set: function must be bounded by 1");
  fns_.at(i) = std::move(f);
}

double eval_N(const ConfigurationSpace& space, const EdgeFunctionFamily& fam) {
  if (space.field.q != fam.q() || space.d != fam.d())
    throw std::invalid_argument("eval_N: space and family disagree");
  if (fam.k() == 1) {
    double prod = 1.0;
    for (std::uint32_t j = 0; j < fam.d(); ++j) {
      const auto sph = ff::make_sphere(space.field, space.t[j]);
      prod *= d1_term(fam.fn(2 * j), fam.fn(2 * j + 1), sph);
    }
    return prod;
  }
  if (fam.d() == 2 && fam.k() == 2) return eval_N_d2k2(space, fam);
  return eval_reference(&space, fam);
}

double eval_N_reference(const ConfigurationSpace& space, const EdgeFunctionFamily& fam) {
  if (space.field.q != fam.q() || space.d != fam.d())
    throw std::invalid_argument("eval_N_reference: space and family disagree");
  return eval_reference(&space, fam);
}

double eval_M(const EdgeFunctionFamily& fam) {
  if (fam.k() == 1) {
    double prod = 1.0;
    for (std::size_t i = 0; i < fam.edge_count(); ++i) prod *= fam.fn(i).mean();
    return prod;
  }
  if (fam.d() == 2 && fam.k() == 2) return eval_M_d2k2(fam);
  return eval_reference(nullptr, fam);
}

double eval_M_reference(const EdgeFunctionFamily& fam) {
  return eval_reference(nullptr, fam);
}

double fourier_count_d1(ff::PrimeField field, std::uint32_t t,
                        const ff::FieldFunction& f1, const ff::FieldFunction& f2) {
  if (f1.q() != field.q || f2.q() != field.q || f1.m() != 2 || f2.m() != 2)
    throw std::invalid_argument("fourier_count_d1: functions must live on F_q^2");
  const auto h1 = ff::dft(f1);
  const auto h2 = ff::dft(f2);
  const auto hs = ff::dft(ff::make_sphere(field, t).table);
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i)
    acc += h1[i] * std::conj(h2[i]) * hs[i];
  return acc.real();
}

double box_average_reference(const ff::FieldFunction& f, std::uint32_t k) {
  if (f.m() != 2 * k)
    throw std::invalid_argument("box_average_reference: dimension mismatch");
  const std::size_t n = static_cast<std::size_t>(f.q()) * f.q();
  const std::uint32_t slots = 2 * k;  // x_p and x'_p per block position
  std::vector<std::size_t> x(slots, 0);
  double total = 0.0;
  double count = 0.0;
  for (;;) {
    double term = 1.0;
    for (std::uint32_t mask = 0; mask < (1u << k) && term != 0.0; ++mask) {
      std::size_t idx = 0;
      for (std::uint32_t p = k; p-- > 0;)
        idx = idx * n + x[2 * p + ((mask >> p) & 1u)];
      term *= f[idx];
    }
    total += term;
    count += 1.0;
    std::uint32_t s = 0;
    while (s < slots && ++x[s] == n) x[s++] = 0;
    if (s == slots) break;
  }
  return total / count;
}

namespace {

double box_average_gram_k2(const ff::FieldFunction& f) {
  const std::size_t n = static_cast<std::size_t>(f.q()) * f.q();
  const auto ft = transpose_blocks(f);  // ft[x2 + n*x1], rows contiguous in x2
  double total = par::sum_blocks(n, [&](std::size_t i) {
    double acc = 0.0;
    const double gii = kern::dot(ft.data() + n * i, ft.data() + n * i, n);
    acc += gii * gii;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gij = kern::dot(ft.data() + n * i, ft.data() + n * j, n);
      acc += 2.0 * gij * gij;
    }
    return acc;
  });
  return total / (static_cast<double>(n) * n * n * n);
}

}  // namespace

double box_norm(const ff::FieldFunction& f, std::uint32_t k) {
  if (f.m() != 2 * k) throw std::invalid_argument("box_norm: dimension mismatch");
  if (k == 1) return std::fabs(f.mean());
  double avg = k == 2 ? box_average_gram_k2(f) : box_average_reference(f, k);
  if (avg < -1e-9)
    throw std::logic_error("box_norm: box average is negative beyond tolerance");
  if (avg < 0.0) avg = 0.0;
  return std::pow(avg, 1.0 / static_cast<double>(1u << k));
}

CsCheck gowers_cs_check(const EdgeFunctionFamily& fam) {
  const double lhs = std::fabs(eval_M(fam));
  double rhs = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fam.edge_count(); ++i)
    rhs = std::min(rhs, box_norm(fam.fn(i), fam.k()));
  return {lhs, rhs, lhs <= rhs + 1e-9};
}

CountingGap counting_gap(const ConfigurationSpace& space,
                         const ff::FieldFunction& indicator) {
  const std::uint32_t d = space.d;
  if (indicator.q() != space.field.q || indicator.m() != 2 * d)
    throw std::invalid_argument("counting_gap: indicator must live on F_q^{2d}");
  EdgeFunctionFamily fam(space.field, d, d);
  for (std::size_t i = 0; i < fam.edge_count(); ++i) fam.set(i, indicator);
  const double n = eval_N(space, fam);
  const double m = eval_M(fam);
  const double lower = std::pow(indicator.mean(), static_cast<double>(1u << d));
  if (m < lower - 1e-12)
    throw std::logic_error("counting_gap: unconditional lower bound violated");
  return {n, m, std::fabs(n - m), lower};
}

}  // namespace confcount::forms
