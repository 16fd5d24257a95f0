#include <doctest.h>

#include <cmath>
#include <map>

#include "confcount/forms.hpp"
#include "confcount/harness.hpp"
#include "confcount/regularity.hpp"
#include "confcount/rng.hpp"

using namespace confcount;
using hg::BaseEdge;

namespace {

std::vector<std::uint8_t> random_set(std::size_t n, double density, Rng& rng) {
  std::vector<std::uint8_t> s(n);
  for (auto& b : s) b = rng.bernoulli(density) ? 1 : 0;
  return s;
}

}  // namespace

TEST_SUITE("regularity") {

TEST_CASE("trivial partitions average to the global mean") {
  ff::PrimeField field(3);
  Rng rng(1);
  const auto f = harness::random_bounded(field, 4, rng);
  reg::PartitionSystem sys(field, 2, 2);
  const auto ce = reg::cond_exp(f, BaseEdge({1, 2}), sys);
  for (std::size_t i = 0; i < ce.size(); ++i)
    CHECK(ce[i] == doctest::Approx(f.mean()).epsilon(1e-12));
  CHECK(reg::energy(f, BaseEdge({1, 2}), sys) ==
        doctest::Approx(f.mean() * f.mean()).epsilon(1e-12));
}

TEST_CASE("singleton partitions reproduce the function") {
  ff::PrimeField field(3);
  Rng rng(2);
  const auto f = harness::random_bounded(field, 4, rng);
  reg::PartitionSystem sys(field, 2, 2);
  // split both vertex blocks down to singletons with coordinate bit sets
  for (auto block : {1u, 2u}) {
    for (std::size_t bit = 0; bit < 4; ++bit) {
      std::vector<std::uint8_t> set(9);
      for (std::size_t p = 0; p < 9; ++p) set[p] = (p >> bit) & 1u;
      sys.refine(BaseEdge({block}), set);
    }
  }
  CHECK(sys.part(BaseEdge({1})).atom_count() == 9);
  const auto ce = reg::cond_exp(f, BaseEdge({1, 2}), sys);
  for (std::size_t i = 0; i < ce.size(); ++i)
    CHECK(ce[i] == doctest::Approx(f[i]).epsilon(1e-12));
  double ef2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) ef2 += f[i] * f[i];
  ef2 /= static_cast<double>(f.size());
  CHECK(reg::energy(f, BaseEdge({1, 2}), sys) == doctest::Approx(ef2).epsilon(1e-12));
}

TEST_CASE("conditional expectation against an independent group-by oracle") {
  ff::PrimeField field(3);
  Rng rng(3);
  const auto f = harness::random_bounded(field, 4, rng);
  reg::PartitionSystem sys(field, 2, 2);
  const auto s1 = random_set(9, 0.5, rng);
  const auto s2 = random_set(9, 0.4, rng);
  sys.refine(BaseEdge({1}), s1);
  sys.refine(BaseEdge({2}), s2);

  // oracle: group by the (s1 membership of x1, s2 membership of x2) pair
  std::map<std::pair<int, int>, std::pair<double, int>> groups;
  for (std::size_t x2 = 0; x2 < 9; ++x2)
    for (std::size_t x1 = 0; x1 < 9; ++x1) {
      auto& g = groups[{s1[x1], s2[x2]}];
      g.first += f[x1 + 9 * x2];
      g.second += 1;
    }
  const auto ce = reg::cond_exp(f, BaseEdge({1, 2}), sys);
  for (std::size_t x2 = 0; x2 < 9; ++x2)
    for (std::size_t x1 = 0; x1 < 9; ++x1) {
      const auto& g = groups[{s1[x1], s2[x2]}];
      CHECK(ce[x1 + 9 * x2] ==
            doctest::Approx(g.first / g.second).epsilon(1e-12));
    }
}

TEST_CASE("cond_exp is idempotent and a sup-norm contraction") {
  ff::PrimeField field(5);
  Rng rng(4);
  const auto f = harness::random_bounded(field, 4, rng);
  reg::PartitionSystem sys(field, 2, 2);
  sys.refine(BaseEdge({1}), random_set(25, 0.5, rng));
  sys.refine(BaseEdge({2}), random_set(25, 0.3, rng));
  const auto ce = reg::cond_exp(f, BaseEdge({1, 2}), sys);
  const auto ce2 = reg::cond_exp(ce, BaseEdge({1, 2}), sys);
  for (std::size_t i = 0; i < ce.size(); ++i)
    CHECK(ce2[i] == doctest::Approx(ce[i]).epsilon(1e-12));
  CHECK(ce.max_abs() <= f.max_abs() + 1e-12);
}

TEST_CASE("Pythagoras: E f^2 = energy + E residual^2") {
  ff::PrimeField field(3);
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = harness::random_bounded(field, 4, rng);
    reg::PartitionSystem sys(field, 2, 2);
    sys.refine(BaseEdge({1}), random_set(9, 0.5, rng));
    sys.refine(BaseEdge({2}), random_set(9, 0.5, rng));
    const auto ce = reg::cond_exp(f, BaseEdge({1, 2}), sys);
    double ef2 = 0.0, resid2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      ef2 += f[i] * f[i];
      resid2 += (f[i] - ce[i]) * (f[i] - ce[i]);
    }
    ef2 /= static_cast<double>(f.size());
    resid2 /= static_cast<double>(f.size());
    CHECK(std::fabs(ef2 - (reg::energy(f, BaseEdge({1, 2}), sys) + resid2)) < 1e-9);
  }
}

TEST_CASE("energy is monotone along a refinement chain") {
  ff::PrimeField field(3);
  Rng rng(6);
  const auto f = harness::random_bounded(field, 4, rng);
  reg::PartitionSystem sys(field, 2, 2);
  double prev = reg::energy(f, BaseEdge({1, 2}), sys);
  for (int step = 0; step < 6; ++step) {
    sys.refine(BaseEdge({step % 2 == 0 ? 1u : 2u}), random_set(9, 0.5, rng));
    const double cur = reg::energy(f, BaseEdge({1, 2}), sys);
    CHECK(cur >= prev - 1e-12);
    prev = cur;
  }
}

TEST_CASE("partition bookkeeping: atoms bounded by 2^generators") {
  reg::Partition p = reg::Partition::trivial(reg::GridSpace{3, 2});
  Rng rng(7);
  for (int step = 1; step <= 5; ++step) {
    p.refine_with(random_set(9, 0.5, rng));
    CHECK(p.generator_count() == static_cast<std::uint32_t>(step));
    CHECK(p.atom_count() <= (1u << step));
    CHECK(p.atom_count() <= 9);
  }
}

TEST_CASE("witness search: zero function yields nothing") {
  ff::PrimeField field(3);
  ff::FieldFunction zero(field, 4, 0.0);
  CHECK_FALSE(reg::witness_search(zero, BaseEdge({1, 2}), 0.5).has_value());
}

TEST_CASE("witness search recovers a planted product set") {
  ff::PrimeField field(5);
  std::vector<std::uint8_t> a1(25, 0), a2(25, 0);
  for (std::size_t i = 0; i < 25; ++i) {
    a1[i] = i % 3 == 0 ? 1 : 0;   // 9 of 25
    a2[i] = i % 2 == 0 ? 1 : 0;   // 13 of 25
  }
  const auto table = harness::planted_product(field, a1, a2);
  const double mean = table.mean();
  ff::FieldFunction g(field, 4);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = table[i] - mean;

  const double beta = mean;  // = density(a1) * density(a2)
  const double planted_corr = beta * (1.0 - beta);
  const auto w = reg::witness_search(g, BaseEdge({1, 2}), 0.3);
  REQUIRE(w.has_value());
  CHECK(w->correlation >= planted_corr - 1e-9);
}

TEST_CASE("witness correlation meets the guaranteed bound at q=3") {
  ff::PrimeField field(3);
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = harness::random_signs(field, 4, rng);
    const double box = forms::box_norm(g, 2);
    if (box < 0.3) continue;
    const auto w = reg::witness_search(g, BaseEdge({1, 2}), 0.3);
    REQUIRE(w.has_value());
    CHECK(w->correlation >= 0.25 * std::pow(0.3, 4.0) - 1e-12);
  }
}

TEST_CASE("weak_regularize: constant family needs no refinement") {
  ff::PrimeField field(5);
  forms::EdgeFunctionFamily fam(field, 2, 2);
  for (std::size_t i = 0; i < 4; ++i)
    fam.set(i, ff::FieldFunction(field, 4, 0.25 * static_cast<double>(i + 1) - 0.5));
  const auto res = reg::weak_regularize(fam, 0.1);
  CHECK(res.iterations == 0);
  for (double b : res.final_box_norms) CHECK(b <= 1e-12);
}

TEST_CASE("weak_regularize recovers a planted product structure") {
  ff::PrimeField field(5);
  Rng rng(9);
  std::vector<std::uint8_t> a1(25, 0), a2(25, 0);
  for (std::size_t i = 0; i < 25; ++i) {
    a1[i] = rng.bernoulli(0.5) ? 1 : 0;
    a2[i] = rng.bernoulli(0.5) ? 1 : 0;
  }
  forms::EdgeFunctionFamily fam(field, 2, 2);
  const auto table = harness::planted_product(field, a1, a2);
  for (std::size_t i = 0; i < 4; ++i) fam.set(i, table);

  const auto res = reg::weak_regularize(fam, 0.1);
  for (double b : res.final_box_norms) CHECK(b <= 1e-9);
  // the planted sets are found in few steps, far below the worst-case cap
  CHECK(res.iterations <= 4);
}

TEST_CASE("weak_regularize on random sign families: full postcondition") {
  const double eps = 0.3;
  ff::PrimeField field(5);
  Rng rng(10);
  forms::EdgeFunctionFamily fam(field, 2, 2);
  for (std::size_t i = 0; i < 4; ++i)
    fam.set(i, harness::random_signs(field, 4, rng));
  const auto res = reg::weak_regularize(fam, eps);

  const std::uint64_t cap = static_cast<std::uint64_t>(
      std::ceil(4.0 * 16.0 * std::pow(eps, -8.0))) + 1;
  CHECK(res.iterations <= cap);

  // independently re-verify the residual box norms via the reference route
  for (std::size_t i = 0; i < 4; ++i) {
    const auto ce = reg::cond_exp(fam.fn(i), hg::projection(fam.edge(i)), res.system);
    ff::FieldFunction r = fam.fn(i);
    for (std::size_t p = 0; p < r.size(); ++p) r[p] -= ce[p];
    const double avg = forms::box_average_reference(r, 2);
    CHECK(std::pow(std::max(avg, 0.0), 0.25) <= eps + 1e-12);
  }

  // every accepted step raised the energy by at least 2^{-2k} eps^{2^{k+1}}
  const double bound = std::pow(2.0, -4.0) * std::pow(eps, 8.0) - 1e-12;
  for (std::size_t s = 1; s < res.energy_trace.size(); ++s)
    CHECK(res.energy_trace[s] - res.energy_trace[s - 1] >= bound);

  // complexity accounting
  for (std::size_t i = 0; i < res.system.part_count(); ++i)
    CHECK(res.system.part(i).generator_count() <= res.iterations);
}

TEST_CASE("weak_regularize handles d=3, k=2 families across projections") {
  ff::PrimeField field(3);
  Rng rng(11);
  forms::EdgeFunctionFamily fam(field, 3, 2);
  REQUIRE(fam.edge_count() == 12);
  for (std::size_t i = 0; i < fam.edge_count(); ++i)
    fam.set(i, harness::random_signs(field, 4, rng));
  const double eps = 0.35;
  const auto res = reg::weak_regularize(fam, eps);
  CHECK(res.system.part_count() == 3);  // partitions on V_1, V_2, V_3
  for (std::size_t i = 0; i < fam.edge_count(); ++i) {
    const auto ce = reg::cond_exp(fam.fn(i), hg::projection(fam.edge(i)), res.system);
    ff::FieldFunction r = fam.fn(i);
    for (std::size_t p = 0; p < r.size(); ++p) r[p] -= ce[p];
    CHECK(forms::box_norm(r, 2) <= eps + 1e-12);
  }
  for (std::size_t s = 1; s < res.energy_trace.size(); ++s)
    CHECK(res.energy_trace[s] - res.energy_trace[s - 1] >
          0.25 * std::pow(eps, 8.0) - 1e-12);
}

TEST_CASE("weak_regularize handles k=3 with partitions on block pairs") {
  ff::PrimeField field(3);
  Rng rng(12);
  forms::EdgeFunctionFamily fam(field, 3, 3);
  REQUIRE(fam.edge_count() == 8);
  for (std::size_t i = 0; i < fam.edge_count(); ++i)
    fam.set(i, harness::random_signs(field, 6, rng));
  const double eps = 0.55;
  const auto res = reg::weak_regularize(fam, eps);
  CHECK(res.system.part_count() == 3);  // partitions on V_12, V_13, V_23
  for (std::size_t i = 0; i < fam.edge_count(); ++i) {
    const auto ce = reg::cond_exp(fam.fn(i), hg::projection(fam.edge(i)), res.system);
    ff::FieldFunction r = fam.fn(i);
    for (std::size_t p = 0; p < r.size(); ++p) r[p] -= ce[p];
    CHECK(forms::box_norm(r, 3) <= eps + 1e-12);
  }
  const double bound = std::pow(2.0, -6.0) * std::pow(eps, 16.0) - 1e-12;
  for (std::size_t s = 1; s < res.energy_trace.size(); ++s)
    CHECK(res.energy_trace[s] - res.energy_trace[s - 1] >= bound);
}

TEST_CASE("weak_regularize validates eps") {
  ff::PrimeField field(3);
  forms::EdgeFunctionFamily fam(field, 2, 2);
  CHECK_THROWS_AS(reg::weak_regularize(fam, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(reg::weak_regularize(fam, -1.0), std::invalid_argument);
  CHECK_NOTHROW(reg::weak_regularize(fam, 2.0));  // clamped to 1 with a warning
}

}  // TEST_SUITE
