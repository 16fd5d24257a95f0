#include "confcount/field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "confcount/kernels.hpp"

namespace confcount::ff {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

PrimeField::PrimeField(std::uint32_t q_) : q(q_) {
  if (q < 3 || !is_prime(q))
    throw std::invalid_argument("PrimeField: modulus " + std::to_string(q_) +
                                " is not a prime >= 3");
}

namespace {

std::size_t table_size(std::uint32_t q, std::uint32_t m) {
  if (m < 1) throw std::invalid_argument("FieldFunction: dimension must be >= 1");
  std::size_t n = 1;
  for (std::uint32_t i = 0; i < m; ++i) {
    if (n > (std::size_t{1} << 40) / q)
      throw std::invalid_argument("FieldFunction: table q^m too large");
    n *= q;
  }
  return n;
}

}  // namespace

FieldFunction::FieldFunction(PrimeField field, std::uint32_t m, double fill)
    : q_(field.q), m_(m), values_(table_size(field.q, m), fill) {}

double FieldFunction::mean() const {
  return kern::sum(values_.data(), values_.size()) /
         static_cast<double>(values_.size());
}

double FieldFunction::max_abs() const {
  double mx = 0.0;
  for (double v : values_) mx = std::max(mx, std::fabs(v));
  return mx;
}

std::size_t FieldFunction::pack(std::span<const std::uint32_t> coords) const {
  std::size_t idx = 0;
  for (std::size_t i = coords.size(); i-- > 0;) idx = idx * q_ + coords[i];
  return idx;
}

void FieldFunction::unpack(std::size_t index, std::span<std::uint32_t> coords) const {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    coords[i] = static_cast<std::uint32_t>(index % q_);
    index /= q_;
  }
}

void FieldFunction::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << q_ << ',' << m_ << ",real\n";
  char buf[40];
  for (double v : values_) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

void parse_header(std::istream& in, const char* want_kind, std::uint32_t& q,
                  std::uint32_t& m) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty table file");
  std::istringstream h(line);
  std::string qs, ms, kind;
  if (!std::getline(h, qs, ',') || !std::getline(h, ms, ',') ||
      !std::getline(h, kind))
    throw std::runtime_error("bad table header: " + line);
  q = static_cast<std::uint32_t>(std::stoul(qs));
  m = static_cast<std::uint32_t>(std::stoul(ms));
  if (kind != want_kind)
    throw std::runtime_error("table kind mismatch: expected " +
                             std::string(want_kind) + ", got " + kind);
}

}  // namespace

FieldFunction FieldFunction::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint32_t q = 0, m = 0;
  parse_header(in, "real", q, m);
  FieldFunction f(PrimeField(q), m);
  std::string line;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("truncated table: " + path.string());
    f[i] = std::stod(line);
  }
  return f;
}

FourierTable::FourierTable(PrimeField field, std::uint32_t m)
    : q_(field.q), m_(m), values_(table_size(field.q, m)) {}

void FourierTable::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << q_ << ',' << m_ << ",complex\n";
  char buf[96];
  for (auto v : values_) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", v.real(), v.imag());
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

FourierTable FourierTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint32_t q = 0, m = 0;
  parse_header(in, "complex", q, m);
  FourierTable f(PrimeField(q), m);
  std::string line;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("truncated table: " + path.string());
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("bad complex entry: " + line);
    f[i] = {std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))};
  }
  return f;
}

SphereFunction make_sphere(PrimeField field, std::uint32_t t) {
  const std::uint32_t q = field.q;
  if (t == 0 || t >= q)
    throw std::invalid_argument("make_sphere: t must satisfy 1 <= t <= q-1");
  SphereFunction s{q, t, FieldFunction(field, 2), {}};
  for (std::uint32_t y = 0; y < q; ++y) {
    for (std::uint32_t x = 0; x < q; ++x) {
      if ((static_cast<std::uint64_t>(x) * x + static_cast<std::uint64_t>(y) * y) % q == t) {
        s.table[x + static_cast<std::size_t>(y) * q] = static_cast<double>(q);
        s.support.push_back({x, y});
      }
    }
  }
  return s;
}

}  // namespace confcount::ff
