#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "confcount/harness.hpp"
#include "confcount/lattice.hpp"
#include "confcount/rng.hpp"

using namespace confcount;
using lat::GridCube;
using lat::Point;
using lat::SimplexSpec;

namespace {

SimplexSpec segment5() { return SimplexSpec(5, {Point(5, 0), {1, 0, 0, 0, 0}}); }

SimplexSpec right_triangle(std::uint32_t n) {
  Point v2(n, 0), v3(n, 0);
  v2[0] = 1;
  v3[1] = 1;
  return SimplexSpec(n, {Point(n, 0), v2, v3});
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("simplex validation") {
  CHECK_THROWS_AS(SimplexSpec(3, {Point{1, 0, 0}, Point{0, 1, 0}}),
                  std::invalid_argument);  // first point not origin
  CHECK_THROWS_AS(SimplexSpec(3, {Point(3, 0), {1, 0, 0}, {2, 0, 0}}),
                  std::invalid_argument);  // collinear => degenerate
  CHECK_NOTHROW(right_triangle(3));
}

TEST_CASE("simplex JSON round-trip") {
  const auto spec = right_triangle(4);
  const auto text = spec.to_json();
  const auto back = SimplexSpec::from_json(text);
  CHECK(back.n == 4);
  CHECK(back.points == spec.points);
  CHECK(back.gram == spec.gram);
}

TEST_CASE("isometry check: dilates and signed permutations pass") {
  const auto spec = right_triangle(3);
  // m_i = 2 v_i
  std::vector<Point> dilate = {{2, 0, 0}, {0, 2, 0}};
  CHECK(lat::isometry_check(spec, dilate, 4));
  // signed permutation of the dilate
  std::vector<Point> perm = {{0, -2, 0}, {0, 0, 2}};
  CHECK(lat::isometry_check(spec, perm, 4));
  // broken Gram
  std::vector<Point> bad = {{2, 0, 0}, {2, 0, 0}};
  CHECK_FALSE(lat::isometry_check(spec, bad, 4));
}

TEST_CASE("segment in Z^5 with lambda^2 = 2 admits the (1,1,0,0,0) copy") {
  const auto spec = segment5();
  std::vector<Point> cand = {{1, 1, 0, 0, 0}};
  CHECK(lat::isometry_check(spec, cand, 2));
}

TEST_CASE("isometry check is invariant under signed coordinate permutations") {
  const auto spec = right_triangle(4);
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    // arbitrary candidate pair (mostly non-copies) and a random lambda^2
    std::vector<Point> cand(2, Point(4));
    for (auto& p : cand)
      for (auto& c : p) c = static_cast<std::int64_t>(rng.below(7)) - 3;
    const auto l2 = static_cast<std::int64_t>(1 + rng.below(9));

    // random signed permutation applied to all points simultaneously
    std::vector<std::uint32_t> perm = {0, 1, 2, 3};
    for (std::size_t i = 3; i > 0; --i)
      std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<std::int64_t> sign(4);
    for (auto& sgn : sign) sgn = rng.bernoulli(0.5) ? 1 : -1;
    std::vector<Point> mapped(2, Point(4));
    for (std::size_t p = 0; p < 2; ++p)
      for (std::size_t a = 0; a < 4; ++a)
        mapped[p][a] = sign[a] * cand[p][perm[a]];

    CHECK(lat::isometry_check(spec, cand, l2) ==
          lat::isometry_check(spec, mapped, l2));
  }
}

TEST_CASE("sphere counts: r_5(1) = 10, even grid has no odd vectors") {
  const auto spec = segment5();
  CHECK(lat::count_copies(spec, 1, 1, 1) == 10);
  CHECK(lat::count_copies(spec, 1, 2, 2) == 0);
}

TEST_CASE("orthonormal pairs in Z^9 at lambda = 1: 18 * 16") {
  const auto spec = right_triangle(9);
  CHECK(lat::count_copies(spec, 1, 1, 1) == 18 * 16);
}

TEST_CASE("enumeration agrees with the box brute force") {
  const auto seg = segment5();
  for (std::int64_t l2 : {1, 2, 3, 4, 5}) {
    std::int64_t b = 0;
    while (b * b < l2) ++b;
    CHECK(lat::enumerate_copies(seg, l2, 1, b) ==
          lat::enumerate_copies_naive(seg, l2, 1, b));
    CHECK(lat::enumerate_copies(seg, l2, 2, b + 2) ==
          lat::enumerate_copies_naive(seg, l2, 2, b + 2));
  }
  const auto tri = right_triangle(5);
  for (std::int64_t l2 : {1, 2}) {
    std::int64_t b = 0;
    while (b * b < l2) ++b;
    CHECK(lat::enumerate_copies(tri, l2, 1, b) ==
          lat::enumerate_copies_naive(tri, l2, 1, b));
  }
}

TEST_CASE("skewed Gram constraints: enumeration matches the brute force") {
  // nonzero cross terms exercise the linear-constraint propagation
  const SimplexSpec spec(5, {Point(5, 0), {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}});
  CHECK(spec.gram[0][1] == 1);
  for (std::int64_t l2 : {1, 4}) {
    std::int64_t b = 0;
    while (b * b < 2 * l2) ++b;
    CHECK(lat::enumerate_copies(spec, l2, 1, b) ==
          lat::enumerate_copies_naive(spec, l2, 1, b));
  }
  CHECK(lat::count_copies(spec, 1, 1, 2) > 0);
}

TEST_CASE("four-point simplex: enumeration matches the brute force") {
  Point v2(5, 0), v3(5, 0), v4(5, 0);
  v2[0] = 1;
  v3[1] = 1;
  v4[2] = 1;
  const SimplexSpec spec(5, {Point(5, 0), v2, v3, v4});
  CHECK(lat::enumerate_copies(spec, 1, 1, 1) ==
        lat::enumerate_copies_naive(spec, 1, 1, 1));
  // 10 unit vectors, 8 orthogonal to the first, 6 orthogonal to both
  CHECK(lat::count_copies(spec, 1, 1, 1) == 10 * 8 * 6);
}

TEST_CASE("B too small is rejected") {
  CHECK_THROWS_AS(lat::enumerate_copies(segment5(), 9, 1, 2), std::invalid_argument);
}

TEST_CASE("rescaling bijection: count(q=2, 4m) = count(q=1, m)") {
  const auto spec = segment5();
  for (std::int64_t m = 1; m <= 6; ++m) {
    std::int64_t b1 = 0;
    while (b1 * b1 < m) ++b1;
    CHECK(lat::count_copies(spec, 4 * m, 2, 2 * b1) ==
          lat::count_copies(spec, m, 1, b1));
  }
}

TEST_CASE("asymptotic scan normalizes by (lambda/q)^{(n-k)(k-1)}") {
  const auto rows = lat::count_asymptotic_scan(segment5(), 1, 4, 20);
  for (const auto& r : rows) {
    const double lam = std::sqrt(static_cast<double>(r.lambda2));
    CHECK(r.normalized ==
          doctest::Approx(static_cast<double>(r.raw) / std::pow(lam, 3.0)));
    CHECK(r.raw > 0);
  }
}

TEST_CASE("sigma weights sum to one exactly") {
  const auto sigma = lat::sigma_normalized(segment5(), 1, 1);
  CHECK(sigma.raw == 10);
  CHECK(sigma.weight == 0.1);
  CHECK(static_cast<double>(sigma.raw) * sigma.weight == 1.0);
  // no copies on the even grid at odd lambda^2
  CHECK_THROWS_AS(lat::sigma_normalized(segment5(), 2, 1), std::domain_error);
}

TEST_CASE("N^1 on all-ones inputs is one minus the reported deficit") {
  GridCube window(5, Point(5, 0), 8);
  std::vector<double> ones(window.volume(), 1.0);
  const std::vector<std::vector<double>> fs = {ones, ones};
  const auto v = lat::eval_N1_lattice(segment5(), 1, 1, window, fs);
  CHECK(v.value == doctest::Approx(1.0 - v.boundary_deficit).epsilon(1e-12));
  CHECK(v.boundary_deficit > 0.0);
  CHECK(v.boundary_deficit < 0.3);
}

TEST_CASE("parity obstruction: even set, odd lambda^2, exact zero") {
  GridCube window(5, Point(5, 0), 8);
  const auto set = harness::congruence_class_set(window, 2, Point(5, 0));
  std::vector<double> table(window.volume());
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = set.contains(i) ? 1.0 : 0.0;
  const std::vector<std::vector<double>> fs = {table, table};
  for (std::int64_t l2 : {1, 9}) {
    const auto v = lat::eval_N1_lattice(segment5(), 1, l2, window, fs);
    CHECK(v.value == 0.0);
  }
  // a zero factor annihilates the form
  std::vector<double> zero(window.volume(), 0.0);
  const std::vector<std::vector<double>> fz = {table, zero};
  CHECK(lat::eval_N1_lattice(segment5(), 1, 4, window, fz).value == 0.0);
}

TEST_CASE("M^1 against a direct convolution oracle in one dimension") {
  GridCube window(1, Point(1, 0), 100);
  // S = one full aligned tap window
  std::vector<double> table(100, 0.0);
  for (int x = 45; x < 55; ++x) table[static_cast<std::size_t>(x)] = 1.0;
  const std::vector<std::vector<double>> fs = {table, table};
  const auto v = lat::eval_M1_lattice(1, 100, window, fs);  // lambda = 10

  // oracle: brute-force double average
  double oracle = 0.0;
  for (int t = 0; t < 100; ++t) {
    double avg = 0.0;
    for (int u = -5; u < 5; ++u) {
      const int p = t + u;
      if (p >= 0 && p < 100) avg += table[static_cast<std::size_t>(p)];
    }
    avg /= 10.0;
    oracle += avg * avg;
  }
  oracle /= 100.0;
  CHECK(v.value == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("M^1 on all-ones inputs is one minus the reported deficit") {
  GridCube window(2, Point(2, 0), 40);
  std::vector<double> ones(window.volume(), 1.0);
  const std::vector<std::vector<double>> fs = {ones, ones};
  const auto v = lat::eval_M1_lattice(1, 16, window, fs);
  CHECK(v.value == doctest::Approx(1.0 - v.boundary_deficit).epsilon(1e-12));
  CHECK(v.boundary_deficit > 0.0);
  CHECK(v.boundary_deficit < 0.25);
}

TEST_CASE("M^1 lower bound delta^k - O(eps) on random sets") {
  GridCube window(2, Point(2, 0), 60);
  Rng rng(12);
  double worst_excess = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    const auto set = harness::random_lattice_set(window, 0.5, rng);
    std::vector<double> table(window.volume());
    for (std::size_t i = 0; i < table.size(); ++i)
      table[i] = set.contains(i) ? 1.0 : 0.0;
    const std::vector<std::vector<double>> fs = {table, table};
    const auto v = lat::eval_M1_lattice(1, 16, window, fs);  // lambda = 4
    const double bound = 0.25 - 3.0 * 2.0 * 4.0 / 60.0;
    CHECK(v.value >= bound);
    worst_excess = std::max(worst_excess, 0.25 - v.value);
  }
  // measured O(eps) term stays within the margin 3 k lambda / side
  CHECK(worst_excess <= 3.0 * 2.0 * 4.0 / 60.0);
}

TEST_CASE("U^1 norm: constants, cell-balanced sets, alternating blocks") {
  GridCube window(1, Point(1, 0), 400);
  // constant
  std::vector<double> c(400, -0.7);
  const double u_const = lat::u1_norm(c, window, 1, 20);
  CHECK(u_const <= 0.7 + 1e-12);
  CHECK(u_const >= 0.7 * 0.9);

  // 20-periodic stripes of width 6: every interior window holds exactly 6
  std::vector<double> stripes(400);
  for (int x = 0; x < 400; ++x) stripes[static_cast<std::size_t>(x)] = (x % 20 < 6) ? 0.7 : -0.3;
  const double u_stripes = lat::u1_norm(stripes, window, 1, 20);
  CHECK(u_stripes <= 0.1);

  // alternating +-1 blocks at the window scale stay bounded away from zero
  const auto alt = harness::two_scale_set(window, 20);
  std::vector<double> f(400);
  for (std::size_t i = 0; i < 400; ++i) f[i] = alt.contains(i) ? 1.0 : -1.0;
  CHECK(lat::u1_norm(f, window, 1, 20) >= 0.4);

  CHECK_THROWS_AS(lat::u1_norm(c, window, 3, 20), std::invalid_argument);  // 3 does not divide 20
}

TEST_CASE("grid conditional expectation averages residue classes inside cells") {
  GridCube window(1, Point(1, 0), 16);
  std::vector<double> f(16);
  for (int x = 0; x < 16; ++x) f[static_cast<std::size_t>(x)] = x;
  const auto ce = lat::grid_cond_exp(f, window, 2, 8);
  // cell [0,8), even residues: mean of 0,2,4,6 = 3
  CHECK(ce[0] == doctest::Approx(3.0));
  CHECK(ce[2] == doctest::Approx(3.0));
  CHECK(ce[1] == doctest::Approx(4.0));   // odd: 1,3,5,7
  CHECK(ce[8] == doctest::Approx(11.0));  // second cell, even: 8,10,12,14
}

TEST_CASE("grid conditional expectation is an idempotent mean projection") {
  GridCube window(2, Point(2, 0), 24);
  Rng rng(21);
  std::vector<double> f(window.volume());
  for (auto& v : f) v = rng.uniform_pm1();
  const auto ce = lat::grid_cond_exp(f, window, 2, 6);
  const auto ce2 = lat::grid_cond_exp(ce, window, 2, 6);
  double mean_f = 0.0, mean_ce = 0.0, ef2 = 0.0, e_ce2 = 0.0, resid2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    mean_f += f[i];
    mean_ce += ce[i];
    ef2 += f[i] * f[i];
    e_ce2 += ce[i] * ce[i];
    resid2 += (f[i] - ce[i]) * (f[i] - ce[i]);
    CHECK(std::fabs(ce2[i] - ce[i]) < 1e-12);
  }
  // mean preserved, Pythagoras between energy and residual
  CHECK(std::fabs(mean_f - mean_ce) < 1e-9);
  CHECK(std::fabs(ef2 - (e_ce2 + resid2)) < 1e-9 * static_cast<double>(f.size()));
}

TEST_CASE("kvn: grid-measurable input succeeds at level one with residual zero") {
  GridCube window(1, Point(1, 0), 256);
  std::vector<double> f(256);
  for (int x = 0; x < 256; ++x) f[static_cast<std::size_t>(x)] = ((x / 64) % 2 == 0) ? 0.5 : -0.5;
  lat::ScaleSequence scales(1.0, 1, {256, 64, 16, 4});
  const auto res = lat::kvn_grid_decompose(f, window, scales, 1, 1, 1.0, 0.12);
  CHECK(res.level == 1);
  CHECK(res.u1_trace.back() <= 1e-12);
}

TEST_CASE("kvn: iid signs are already uniform at the first level") {
  GridCube window(1, Point(1, 0), 4096);
  Rng rng(77);
  std::vector<double> f(4096);
  for (auto& v : f) v = rng.sign();
  lat::ScaleSequence scales(0.5, 1, {4096, 256, 16});
  const auto res = lat::kvn_grid_decompose(f, window, scales, 1, 1, 0.5, 0.12);
  CHECK(res.level == 1);
  CHECK(res.u1_trace.back() <= 0.5);
}

TEST_CASE("kvn: adversarial two-scale set fails level one, succeeds at two") {
  const double eps = 0.25;
  GridCube window(1, Point(1, 0), 2097152);
  const auto set = harness::two_scale_set(window, 512);
  std::vector<double> f(window.volume());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = set.contains(i) ? 0.5 : -0.5;
  lat::ScaleSequence scales(eps, 8, {2097152, 32768, 512, 8});
  const auto res = lat::kvn_grid_decompose(f, window, scales, 1, 2, eps, 0.12);
  CHECK(res.level == 2);
  CHECK(res.u1_trace[0] > eps);
  CHECK(res.u1_trace[1] <= eps);
  // energy increment between the failed and the succeeding level
  CHECK(res.energy_trace[1] - res.energy_trace[0] >= 0.5 * eps * eps);
  // independent re-verification
  std::vector<double> resid(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) resid[i] = f[i] - res.cond_table[i];
  CHECK(lat::u1_norm(resid, window, 8, 8) <= eps);
}

TEST_CASE("kvn rejects sequences shorter than the guaranteed bound") {
  GridCube window(1, Point(1, 0), 25600);
  std::vector<double> f(25600, 0.0);
  lat::ScaleSequence scales(0.1, 1, {25600, 64});  // far fewer than ceil(C eps^-2)
  CHECK_THROWS_AS(lat::kvn_grid_decompose(f, window, scales, 1, 1, 0.1, 0.12),
                  std::invalid_argument);
}

TEST_CASE("admissible sequence validation") {
  CHECK_NOTHROW(lat::ScaleSequence(1.0, 2, {64, 16, 4}));
  CHECK_THROWS_AS(lat::ScaleSequence(1.0, 2, {64, 24, 4}), std::invalid_argument);  // 64/24
  CHECK_THROWS_AS(lat::ScaleSequence(1.0, 2, {64, 32, 8}), std::invalid_argument);  // ratio 2 < 4
  CHECK_THROWS_AS(lat::ScaleSequence(1.0, 3, {64, 16, 4}), std::invalid_argument);  // 3 not | 4
  CHECK_THROWS_AS(lat::ScaleSequence(0.0, 1, {64, 4}), std::invalid_argument);
}

TEST_CASE("q_epsilon: lcm values, monotonicity, desk cap") {
  CHECK(lat::q_epsilon(1.0, 6.0) == 60);     // lcm{1..6}
  CHECK(lat::q_epsilon(1.0, 10.0) == 2520);  // lcm{1..10}
  CHECK(lat::q_epsilon(0.9, 10.0) >= lat::q_epsilon(1.0, 10.0));
  CHECK(lat::q_epsilon(0.8, 10.0) >= lat::q_epsilon(0.9, 10.0));
  CHECK_THROWS_AS(lat::q_epsilon(0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(lat::q_epsilon(1.5, 1.0), std::invalid_argument);
}

TEST_CASE("uniformity: full window, congruence class, random set") {
  GridCube window(5, Point(5, 0), 8);
  lat::LatticeSet full(window);
  for (std::size_t i = 0; i < window.volume(); ++i) full.set(i, true);
  auto rep = lat::uniformity_test(full, 0.1, 2);
  CHECK(rep.is_uniform);
  CHECK(rep.max_relative == 1.0);
  CHECK(rep.overall == 1.0);

  const auto even = harness::congruence_class_set(window, 2, Point(5, 0));
  rep = lat::uniformity_test(even, 0.1, 2);
  CHECK_FALSE(rep.is_uniform);
  CHECK(rep.max_relative == 1.0);
  CHECK(rep.overall == doctest::Approx(1.0 / 32.0));
  CHECK(rep.worst_residue == Point(5, 0));

  GridCube w1(1, Point(1, 0), 4000);
  Rng rng(5);
  const auto rnd = harness::random_lattice_set(w1, 0.5, rng);
  rep = lat::uniformity_test(rnd, 0.2, 2);
  CHECK(rep.is_uniform);  // fluctuation ~ 1/sqrt(2000) well under eps^2 = 0.04
}

TEST_CASE("density increment: uniform input stops immediately") {
  GridCube window(1, Point(1, 0), 4000);
  Rng rng(6);
  const auto rnd = harness::random_lattice_set(window, 0.5, rng);
  const auto res = lat::density_increment(rnd, 0.2, 2);
  CHECK(res.steps == 0);
  CHECK(res.status == "uniform");
}

TEST_CASE("density increment: even grid reaches full density in one step") {
  GridCube window(5, Point(5, 0), 8);
  const auto even = harness::congruence_class_set(window, 2, Point(5, 0));
  const auto res = lat::density_increment(even, 0.1, 2);
  CHECK(res.steps == 1);
  CHECK(res.status == "uniform");
  CHECK(res.final_set.density() == 1.0);
  CHECK(res.final_set.window().side == 4);
}

TEST_CASE("density increment: concentrated set gains the class ratio") {
  GridCube window(1, Point(1, 0), 6561);
  Rng rng(7);
  const auto set = harness::concentrated_set(window, 3, {1}, 0.3, 0.92, rng);
  const auto res = lat::density_increment(set, 0.2, 3);
  REQUIRE(res.steps >= 1);
  CHECK(res.history[0].density_after / res.history[0].density_before >= 2.7);
  const double cap = std::ceil(std::log(1.0 / 0.3) / std::log1p(0.04));
  CHECK(res.steps <= static_cast<std::uint32_t>(cap));
}

TEST_CASE("density increment reports window exhaustion") {
  // side 6 supports one mod-2 rescale to side 3, then 2 no longer divides it
  GridCube window(1, Point(1, 0), 6);
  lat::LatticeSet set(window);
  set.set(0, true);
  set.set(2, true);
  set.set(4, true);
  const auto res = lat::density_increment(set, 0.1, 2);
  CHECK(res.steps == 1);
  CHECK(res.status == "window exhausted");
  CHECK(res.final_set.density() == 1.0);
}

TEST_CASE("uniform distribution keeps U^1 small, congruence classes do not") {
  GridCube window(1, Point(1, 0), 4000);
  Rng rng(8);
  const auto rnd = harness::random_lattice_set(window, 0.5, rng);
  std::vector<double> f(4000);
  for (std::size_t i = 0; i < 4000; ++i) f[i] = (rnd.contains(i) ? 1.0 : 0.0) - 0.5;
  CHECK(lat::u1_norm(f, window, 2, 40) <= 0.2);
  CHECK(lat::u1_norm(f, window, 2, 400) <= 0.06);

  const auto even = harness::congruence_class_set(window, 2, {0});
  for (std::size_t i = 0; i < 4000; ++i) f[i] = (even.contains(i) ? 1.0 : 0.0) - 0.5;
  CHECK(lat::u1_norm(f, window, 2, 40) >= 0.45);
}

TEST_CASE("generalized von Neumann: N^1 bounded by min U^1 plus an envelope") {
  // |N^1(f_1,f_2)| <= min_i U^1_{q',L}(f_i) + O(eps); the 0.75 envelope is
  // the recorded desk-scale constant for these window sizes
  GridCube window(5, Point(5, 0), 12);
  Rng rng(9);
  double worst = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<double> f1(window.volume()), f2(window.volume());
    for (auto& v : f1) v = rng.uniform_pm1();
    for (auto& v : f2) v = rng.uniform_pm1();
    const std::vector<std::vector<double>> fs = {f1, f2};
    const auto v = lat::eval_N1_lattice(segment5(), 1, 9, window, fs);
    const double u = std::min(lat::u1_norm(f1, window, 2, 2),
                              lat::u1_norm(f2, window, 2, 2));
    worst = std::max(worst, std::fabs(v.value) - u);
  }
  CHECK(worst <= 0.75);
}

TEST_CASE("lattice set RLE round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "confcount_test";
  std::filesystem::create_directories(dir);
  GridCube window(2, Point{-3, 5}, 12);
  Rng rng(10);
  const auto set = harness::random_lattice_set(window, 0.37, rng);
  const auto path = dir / "set.rle";
  set.save(path);
  const auto back = lat::LatticeSet::load(path);
  CHECK(back.window().n == 2);
  CHECK(back.window().corner == Point{-3, 5});
  CHECK(back.window().side == 12);
  CHECK(back.membership() == set.membership());
}

}  // TEST_SUITE
