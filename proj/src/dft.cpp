#include "confcount/dft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace confcount::ff {

namespace {

// omega^j for j = 0..q-1, omega = e^{sign * 2 pi i / q}
std::vector<std::complex<double>> root_table(std::uint32_t q, int sign) {
  std::vector<std::complex<double>> w(q);
  for (std::uint32_t j = 0; j < q; ++j) {
    double angle = sign * 2.0 * std::numbers::pi * j / q;
    w[j] = {std::cos(angle), std::sin(angle)};
  }
  return w;
}

// In-place length-q transforms along one axis of a q^m table.
void axis_transform(std::vector<std::complex<double>>& v, std::uint32_t q,
                    std::uint32_t axis,
                    const std::vector<std::complex<double>>& w) {
  std::size_t stride = 1;
  for (std::uint32_t i = 0; i < axis; ++i) stride *= q;
  std::size_t outer = v.size() / (stride * q);
  std::vector<std::complex<double>> line(q), out(q);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < stride; ++s) {
      std::size_t base = o * stride * q + s;
      for (std::uint32_t j = 0; j < q; ++j) line[j] = v[base + j * stride];
      for (std::uint32_t k = 0; k < q; ++k) {
        std::complex<double> acc = 0.0;
        std::size_t jk = 0;
        for (std::uint32_t j = 0; j < q; ++j) {
          acc += line[j] * w[jk];
          jk += k;
          if (jk >= q) jk -= q;
        }
        out[k] = acc;
      }
      for (std::uint32_t k = 0; k < q; ++k) v[base + k * stride] = out[k];
    }
  }
}

}  // namespace

FourierTable dft(const FieldFunction& f) {
  const std::uint32_t q = f.q();
  const std::uint32_t m = f.m();
  std::vector<std::complex<double>> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = f[i];
  auto w = root_table(q, +1);
  for (std::uint32_t axis = 0; axis < m; ++axis) axis_transform(v, q, axis, w);
  FourierTable out(PrimeField(q), m);
  const double norm = 1.0 / static_cast<double>(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * norm;
  return out;
}

FourierTable dft_naive(const FieldFunction& f) {
  const std::uint32_t q = f.q();
  const std::uint32_t m = f.m();
  auto w = root_table(q, +1);
  FourierTable out(PrimeField(q), m);
  std::vector<std::uint32_t> x(m), xi(m);
  for (std::size_t k = 0; k < out.size(); ++k) {
    f.unpack(k, xi);
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f.unpack(i, x);
      std::uint64_t phase = 0;
      for (std::uint32_t c = 0; c < m; ++c) phase += static_cast<std::uint64_t>(x[c]) * xi[c];
      acc += f[i] * w[phase % q];
    }
    out[k] = acc / static_cast<double>(f.size());
  }
  return out;
}

FourierTable idft(const FourierTable& g) {
  const std::uint32_t q = g.q();
  const std::uint32_t m = g.m();
  std::vector<std::complex<double>> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = g[i];
  auto w = root_table(q, -1);
  for (std::uint32_t axis = 0; axis < m; ++axis) axis_transform(v, q, axis, w);
  FourierTable out(PrimeField(q), m);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

FieldFunction idft_real(const FourierTable& g, double imag_tol) {
  FourierTable full = idft(g);
  FieldFunction out(PrimeField(g.q()), g.m());
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (std::fabs(full[i].imag()) > imag_tol)
      throw std::runtime_error("idft_real: imaginary residue above tolerance");
    out[i] = full[i].real();
  }
  return out;
}

SphereDecay sphere_decay(PrimeField field, std::uint32_t t) {
  SphereFunction s = make_sphere(field, t);
  FourierTable hat = dft(s.table);
  const double sq = std::sqrt(static_cast<double>(field.q));
  double max_nonzero = 0.0;
  for (std::size_t i = 1; i < hat.size(); ++i)
    max_nonzero = std::max(max_nonzero, std::abs(hat[i]));
  return {std::fabs(hat[0].real() - 1.0) * sq, max_nonzero * sq};
}

}  // namespace confcount::ff
