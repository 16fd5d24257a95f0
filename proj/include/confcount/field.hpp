#pragma once

// Dense functions on F_q^m with q prime. A FieldFunction is the real-valued
// spatial-side table (set indicators, sphere weights, residuals); complex
// frequency-side tables live in FourierTable. There is no implicit
// conversion between the two.
//
// Point indexing is little-endian in the coordinates: the point
// (a_0,...,a_{m-1}) has index a_0 + a_1 q + ... + a_{m-1} q^{m-1}.

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace confcount::ff {

bool is_prime(std::uint64_t n);

// Prime modulus q >= 3, verified by trial division.
struct PrimeField {
  std::uint32_t q;
  explicit PrimeField(std::uint32_t q_);
};

class FieldFunction {
 public:
  FieldFunction(PrimeField field, std::uint32_t m, double fill = 0.0);

  std::uint32_t q() const { return q_; }
  std::uint32_t m() const { return m_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  double mean() const;
  double max_abs() const;

  std::size_t pack(std::span<const std::uint32_t> coords) const;
  void unpack(std::size_t index, std::span<std::uint32_t> coords) const;

  void save_csv(const std::filesystem::path& path) const;
  static FieldFunction load_csv(const std::filesystem::path& path);

 private:
  std::uint32_t q_;
  std::uint32_t m_;
  std::vector<double> values_;
};

class FourierTable {
 public:
  FourierTable(PrimeField field, std::uint32_t m);

  std::uint32_t q() const { return q_; }
  std::uint32_t m() const { return m_; }
  std::size_t size() const { return values_.size(); }

  std::complex<double> operator[](std::size_t i) const { return values_[i]; }
  std::complex<double>& operator[](std::size_t i) { return values_[i]; }

  void save_csv(const std::filesystem::path& path) const;
  static FourierTable load_csv(const std::filesystem::path& path);

 private:
  std::uint32_t q_;
  std::uint32_t m_;
  std::vector<std::complex<double>> values_;
};

// sigma_t on F_q^2: value q on {x : x_1^2+x_2^2 = t mod q}, 0 elsewhere.
// The support list is in index order.
struct SphereFunction {
  std::uint32_t q = 0;
  std::uint32_t t = 0;
  FieldFunction table;
  std::vector<std::array<std::uint32_t, 2>> support;

  double mean() const { return table.mean(); }
};

// Rejects t == 0 mod q (and non-prime q via PrimeField).
SphereFunction make_sphere(PrimeField field, std::uint32_t t);

}  // namespace confcount::ff
