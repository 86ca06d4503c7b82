#pragma once

// Exact Fourier analysis. Conventions: hat f(gamma) = E_x f(x) conj(gamma(x)),
// (f * g)(x) = E_y f(y) g(x - y). Characters of Z_2^m are indexed by r via
// x -> (-1)^{r.x}; characters of Z_4^n by r via x -> i^{r.x}.

#include <string>
#include <utility>
#include <vector>

#include "rothz4/group.hpp"
#include "rothz4/rational.hpp"

namespace rothz4 {

struct RealFn2 {
  int m = 0;
  std::vector<Rational> values;  // indexed by code

  RealFn2() = default;
  explicit RealFn2(int dim) : m(dim), values(z2::order(dim)) {}
  RealFn2(int dim, std::vector<Rational> v);

  static RealFn2 indicator(const Z2Set& s);
  // The normalized measure P_H' = 1_H' / P(H').
  static RealFn2 measure(const Subgroup2& h);
  Rational mean() const;
  Rational mean_square() const;
};

struct Spectrum2 {
  int m = 0;
  std::vector<Rational> coeffs;  // indexed by character code
};

struct GaussRational {
  Rational re;
  Rational im;
  friend bool operator==(const GaussRational&, const GaussRational&) = default;
};

struct Spectrum4 {
  int n = 0;
  std::vector<GaussRational> coeffs;
};

Spectrum2 wht(const RealFn2& f);
RealFn2 inverse_wht(const Spectrum2& s);
// Scaled-integer fast path for indicators; equal to wht(RealFn2::indicator(s)).
Spectrum2 wht_indicator(const Z2Set& s);
RealFn2 convolve2(const RealFn2& f, const RealFn2& g);
Spectrum4 dft4(const Z4Set& a);

struct SupResult {
  Code character = 0;
  Rational magnitude;
};
// max over gamma != 0 of |coeffs(gamma)|, least character on ties.
SupResult sup_nontrivial(const Spectrum2& s);

// {"<character bits>": [num, den], ...}
std::string spectrum_json(const Spectrum2& s);
// {"<character digits>": [[re_num, re_den], [im_num, im_den]], ...}
std::string spectrum_json(const Spectrum4& s);

}  // namespace rothz4
