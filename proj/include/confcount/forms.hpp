#pragma once

// Multilinear counting forms over V = V_1 x ... x V_d with V_j = F_q^2.
// For a family of [-1,1]-valued functions f_e indexed by the bundle edges,
//
//   N_t(f) = E_{x in V^2} prod_e f_e(x_e) prod_j sigma_{t_j}(x_{j2}-x_{j1})
//   M(f)   = E_{x in V^2} prod_e f_e(x_e)
//
// together with the Gowers box norm that controls both. The direct sum over
// the full (q^2)^{2d} grid is the reference semantics; eval_N/eval_M run
// equivalent factorized kernels (exploiting that sigma_t is supported on
// ~q sphere points) and are tested against the reference to 1e-9.

#include <cstdint>
#include <vector>

#include "confcount/field.hpp"
#include "confcount/hypergraph.hpp"

namespace confcount::forms {

struct ConfigurationSpace {
  ff::PrimeField field;
  std::uint32_t d;
  std::vector<std::uint32_t> t;  // t_1..t_d, all nonzero mod q

  ConfigurationSpace(ff::PrimeField field_, std::uint32_t d_,
                     std::vector<std::uint32_t> t_);
};

// Functions f_e on V_{pi(e)} (a 2k-dimensional table) for every edge of
// H_{d,k}^{(2,..,2)}, in enumeration order, each bounded by 1.
class EdgeFunctionFamily {
 public:
  EdgeFunctionFamily(ff::PrimeField field, std::uint32_t d, std::uint32_t k);

  std::uint32_t d() const { return spec_.d; }
  std::uint32_t k() const { return spec_.k; }
  std::uint32_t q() const { return field_.q; }
  std::size_t edge_count() const { return edges_.size(); }
  const hg::Edge& edge(std::size_t i) const { return edges_[i]; }
  const ff::FieldFunction& fn(std::size_t i) const { return fns_[i]; }

  void set(std::size_t i, ff::FieldFunction f);

 private:
  hg::BundleSpec spec_;
  ff::PrimeField field_;
  std::vector<hg::Edge> edges_;
  std::vector<ff::FieldFunction> fns_;
};

double eval_N(const ConfigurationSpace& space, const EdgeFunctionFamily& fam);
double eval_N_reference(const ConfigurationSpace& space, const EdgeFunctionFamily& fam);

double eval_M(const EdgeFunctionFamily& fam);
double eval_M_reference(const EdgeFunctionFamily& fam);

// Frequency-side evaluation of the d=1 form:
//   sum_xi f1hat(xi) conj(f2hat(xi)) sigmahat_t(xi)
// (the second factor is conjugated so that the identity with
// E f1(x1) f2(x2) sigma_t(x2-x1) is exact, not just up to symmetry).
double fourier_count_d1(ff::PrimeField field, std::uint32_t t,
                        const ff::FieldFunction& f1, const ff::FieldFunction& f2);

// 2^k-th root of the box average of f over a k-fold product of blocks
// (f.m() must equal 2k). The average is a square average in disguise;
// values below -1e-9 signal a bug and throw, tiny negatives are clamped.
double box_norm(const ff::FieldFunction& f, std::uint32_t k);
double box_average_reference(const ff::FieldFunction& f, std::uint32_t k);

struct CsCheck {
  double lhs;  // |M(fam)|
  double rhs;  // min_e box_norm(f_e)
  bool holds;  // lhs <= rhs + 1e-9
};
CsCheck gowers_cs_check(const EdgeFunctionFamily& fam);

struct CountingGap {
  double n;
  double m;
  double gap;          // |n - m|
  double lower_bound;  // (|S|/q^{2d})^{2^d}
};
// indicator: 0/1 table on F_q^{2d}; evaluates the k=d forms with f_e = 1_S.
CountingGap counting_gap(const ConfigurationSpace& space,
                         const ff::FieldFunction& indicator);

}  // namespace confcount::forms
