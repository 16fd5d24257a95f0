#pragma once

// Multidimensional DFT on F_q^m. Forward transform:
//
//   fhat(xi) = q^{-m} sum_x f(x) e^{+2 pi i (x.xi)/q}
//
// i.e. a mean over the spatial side; the inverse is the plain sum with the
// conjugate character. Under this convention sum_xi |fhat(xi)|^2 equals the
// spatial mean square (Parseval), and fhat(0) is the mean of f.
//
// dft() runs the dimension-by-dimension fast path, O(m q^{m+1});
// dft_naive() is the O(q^{2m}) reference the fast path is tested against.

#include "confcount/field.hpp"

namespace confcount::ff {

FourierTable dft(const FieldFunction& f);
FourierTable dft_naive(const FieldFunction& f);

FourierTable idft(const FourierTable& g);

// Inverse transform back to a real table; throws if any imaginary residue
// exceeds imag_tol.
FieldFunction idft_real(const FourierTable& g, double imag_tol = 1e-9);

struct SphereDecay {
  double mean_deviation;   // |E sigma_t - 1| * sqrt(q)
  double max_decay_const;  // max_{xi != 0} |sigma_hat_t(xi)| * sqrt(q)
};

SphereDecay sphere_decay(PrimeField field, std::uint32_t t);

}  // namespace confcount::ff
