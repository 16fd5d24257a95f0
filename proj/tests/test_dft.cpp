#include <doctest.h>

#include <cmath>
#include <complex>

#include "confcount/dft.hpp"
#include "confcount/rng.hpp"

using namespace confcount;

TEST_SUITE("dft") {

TEST_CASE("constant function transforms to a delta at zero") {
  ff::FieldFunction f(ff::PrimeField(5), 2, 1.0);
  const auto hat = ff::dft(f);
  CHECK(std::abs(hat[0] - std::complex<double>(1.0, 0.0)) < 1e-12);
  for (std::size_t i = 1; i < hat.size(); ++i) CHECK(std::abs(hat[i]) < 1e-12);
}

TEST_CASE("scaled delta transforms to the constant one") {
  ff::FieldFunction f(ff::PrimeField(7), 2);
  f[0] = static_cast<double>(f.size());
  const auto hat = ff::dft(f);
  for (std::size_t i = 0; i < hat.size(); ++i)
    CHECK(std::abs(hat[i] - std::complex<double>(1.0, 0.0)) < 1e-9);
}

TEST_CASE("fast path agrees with the naive transform") {
  Rng rng(3);
  for (std::uint32_t q : {3u, 5u, 7u}) {
    for (std::uint32_t m : {1u, 2u, 3u}) {
      ff::FieldFunction f(ff::PrimeField(q), m);
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform_pm1();
      const auto fast = ff::dft(f);
      const auto naive = ff::dft_naive(f);
      for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(std::abs(fast[i] - naive[i]) < 1e-9);
    }
  }
}

TEST_CASE("Parseval holds for random tables") {
  Rng rng(11);
  for (std::uint32_t q : {3u, 5u, 7u, 11u}) {
    for (std::uint32_t m : {1u, 2u, 4u}) {
      ff::FieldFunction f(ff::PrimeField(q), m);
      double spatial = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = rng.uniform_pm1();
        spatial += f[i] * f[i];
      }
      spatial /= static_cast<double>(f.size());
      const auto hat = ff::dft(f);
      double freq = 0.0;
      for (std::size_t i = 0; i < hat.size(); ++i) freq += std::norm(hat[i]);
      CHECK(std::fabs(freq - spatial) < 1e-9);
    }
  }
}

TEST_CASE("inverse transform round-trips to 1e-9") {
  Rng rng(17);
  for (std::uint32_t q : {3u, 7u, 11u}) {
    ff::FieldFunction f(ff::PrimeField(q), 2);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform_pm1();
    const auto back = ff::idft_real(ff::dft(f));
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(std::fabs(back[i] - f[i]) < 1e-9);
  }
}

TEST_CASE("sphere decay at q=3, t=1 reproduces the hand enumeration") {
  const auto decay = ff::sphere_decay(ff::PrimeField(3), 1);
  // E sigma - 1 = 1/3, scaled by sqrt(3)
  CHECK(decay.mean_deviation == doctest::Approx(std::sqrt(3.0) / 3.0).epsilon(1e-12));
  CHECK(decay.max_decay_const > 0.0);
}

TEST_CASE("the zero frequency is excluded from the decay maximum") {
  // at q=3 the mean is 4/3, so including xi=0 would dominate the max when
  // the nonzero modes are small; check the max is attained off zero
  const auto s = ff::make_sphere(ff::PrimeField(13), 1);
  const auto hat = ff::dft(s.table);
  const auto decay = ff::sphere_decay(ff::PrimeField(13), 1);
  double max_nonzero = 0.0;
  for (std::size_t i = 1; i < hat.size(); ++i)
    max_nonzero = std::max(max_nonzero, std::abs(hat[i]));
  CHECK(decay.max_decay_const ==
        doctest::Approx(max_nonzero * std::sqrt(13.0)).epsilon(1e-12));
}

TEST_CASE("decay envelope over small primes") {
  // the full q <= 101 sweep is an acceptance criterion; spot-check here
  for (std::uint32_t q : {3u, 5u, 7u, 11u, 13u, 17u}) {
    for (std::uint32_t t = 1; t < q; ++t) {
      const auto d = ff::sphere_decay(ff::PrimeField(q), t);
      CHECK(d.mean_deviation <= 3.0);
      CHECK(d.max_decay_const <= 3.0);
    }
  }
}

}  // TEST_SUITE
