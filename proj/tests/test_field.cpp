#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include "confcount/field.hpp"
#include "confcount/rng.hpp"

using namespace confcount;

TEST_SUITE("field") {

TEST_CASE("prime validation") {
  CHECK(ff::is_prime(2));
  CHECK(ff::is_prime(101));
  CHECK_FALSE(ff::is_prime(1));
  CHECK_FALSE(ff::is_prime(91));  // 7*13
  CHECK_NOTHROW(ff::PrimeField(3));
  CHECK_THROWS_AS(ff::PrimeField(2), std::invalid_argument);  // q >= 3
  CHECK_THROWS_AS(ff::PrimeField(9), std::invalid_argument);
  CHECK_THROWS_AS(ff::PrimeField(0), std::invalid_argument);
}

TEST_CASE("indexing round-trips") {
  ff::FieldFunction f(ff::PrimeField(5), 3);
  CHECK(f.size() == 125);
  std::uint32_t coords[3];
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.unpack(i, coords);
    CHECK(f.pack(coords) == i);
  }
}

TEST_CASE("sphere q=3 t=1: four support points of value 3, mean 4/3") {
  const auto s = ff::make_sphere(ff::PrimeField(3), 1);
  const std::set<std::pair<std::uint32_t, std::uint32_t>> expect = {
      {0, 1}, {0, 2}, {1, 0}, {2, 0}};
  std::set<std::pair<std::uint32_t, std::uint32_t>> got;
  for (const auto& p : s.support) got.insert({p[0], p[1]});
  CHECK(got == expect);
  CHECK(s.support.size() == 4);
  for (const auto& p : s.support)
    CHECK(s.table[p[0] + 3 * p[1]] == 3.0);
  CHECK(s.mean() == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("sphere q=5 t=2 has support size 4") {
  const auto s = ff::make_sphere(ff::PrimeField(5), 2);
  CHECK(s.support.size() == 4);  // (+-1, +-1)
  for (const auto& p : s.support) {
    CHECK((p[0] == 1 || p[0] == 4));
    CHECK((p[1] == 1 || p[1] == 4));
  }
}

TEST_CASE("sphere rejects t = 0 and non-prime q") {
  CHECK_THROWS_AS(ff::make_sphere(ff::PrimeField(7), 0), std::invalid_argument);
  CHECK_THROWS_AS(ff::make_sphere(ff::PrimeField(7), 7), std::invalid_argument);
}

TEST_CASE("sphere values are only 0 and q") {
  for (std::uint32_t q : {3u, 5u, 7u, 11u}) {
    for (std::uint32_t t = 1; t < q; ++t) {
      const auto s = ff::make_sphere(ff::PrimeField(q), t);
      for (std::size_t i = 0; i < s.table.size(); ++i)
        CHECK((s.table[i] == 0.0 || s.table[i] == static_cast<double>(q)));
    }
  }
}

TEST_CASE("sphere is invariant under the eight square-lattice symmetries") {
  for (std::uint32_t q : {5u, 7u, 11u, 13u}) {
    for (std::uint32_t t = 1; t < q; ++t) {
      const auto s = ff::make_sphere(ff::PrimeField(q), t);
      auto at = [&](std::uint32_t x, std::uint32_t y) {
        return s.table[(x % q) + static_cast<std::size_t>(y % q) * q];
      };
      for (std::uint32_t x = 0; x < q; ++x) {
        for (std::uint32_t y = 0; y < q; ++y) {
          const std::uint32_t nx = (q - x) % q, ny = (q - y) % q;
          const double v = at(x, y);
          CHECK(at(nx, y) == v);
          CHECK(at(x, ny) == v);
          CHECK(at(nx, ny) == v);
          CHECK(at(y, x) == v);
          CHECK(at(ny, x) == v);
          CHECK(at(y, nx) == v);
          CHECK(at(ny, nx) == v);
        }
      }
    }
  }
}

TEST_CASE("table CSV round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "confcount_test";
  std::filesystem::create_directories(dir);

  Rng rng(42);
  ff::FieldFunction f(ff::PrimeField(5), 2);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform_pm1();
  const auto real_path = dir / "table_real.csv";
  f.save_csv(real_path);
  const auto g = ff::FieldFunction::load_csv(real_path);
  CHECK(g.q() == 5);
  CHECK(g.m() == 2);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);

  ff::FourierTable c(ff::PrimeField(3), 2);
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = {rng.uniform_pm1(), rng.uniform_pm1()};
  const auto cplx_path = dir / "table_complex.csv";
  c.save_csv(cplx_path);
  const auto h = ff::FourierTable::load_csv(cplx_path);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(h[i] == c[i]);

  // kind mismatch is rejected
  CHECK_THROWS(ff::FieldFunction::load_csv(cplx_path));
}

}  // TEST_SUITE
