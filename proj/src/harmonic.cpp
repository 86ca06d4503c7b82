#include "rothz4/harmonic.hpp"

#include <cstdint>

#include "rothz4/errors.hpp"
#include "rothz4/json.hpp"
#include "rothz4/kernels.hpp"

namespace rothz4 {

namespace {

// Unnormalized butterfly over rationals; parallel within a stage.
void butterfly(std::vector<Rational>& v) {
  const std::size_t size = v.size();
  const auto half = static_cast<std::int64_t>(size / 2);
  for (std::size_t len = 1; len < size; len <<= 1) {
#pragma omp parallel for schedule(static) if (half >= 512)
    for (std::int64_t p = 0; p < half; ++p) {
      std::size_t up = static_cast<std::size_t>(p);
      std::size_t j = (up / len) * 2 * len + (up % len);
      Rational a = v[j];
      v[j] += v[j + len];
      v[j + len] = a - v[j + len];
    }
  }
}

}  // namespace

RealFn2::RealFn2(int dim, std::vector<Rational> v) : m(dim), values(std::move(v)) {
  if (values.size() != z2::order(dim)) throw DomainError("function must be total on Z_2^m");
}

RealFn2 RealFn2::indicator(const Z2Set& s) {
  RealFn2 f(s.dim());
  for (Code x : s.members()) f.values[x] = 1;
  return f;
}

RealFn2 RealFn2::measure(const Subgroup2& h) {
  RealFn2 f(h.ambient());
  Rational w = pow2(h.index_log2());
  for (Code x : h.members()) f.values[x] = w;
  return f;
}

Rational RealFn2::mean() const {
  Rational s = 0;
  for (const auto& v : values) s += v;
  return s * pow2(-m);
}

Rational RealFn2::mean_square() const {
  Rational s = 0;
  for (const auto& v : values) s += v * v;
  return s * pow2(-m);
}

Spectrum2 wht(const RealFn2& f) {
  Spectrum2 s{f.m, f.values};
  butterfly(s.coeffs);
  Rational scale = pow2(-f.m);
  for (auto& c : s.coeffs) c *= scale;
  return s;
}

RealFn2 inverse_wht(const Spectrum2& s) {
  RealFn2 f(s.m, s.coeffs);
  butterfly(f.values);
  return f;
}

Spectrum2 wht_indicator(const Z2Set& set) {
  auto ints = indicator_wht(set);
  Spectrum2 s{set.dim(), std::vector<Rational>(ints.size())};
  Rational scale = pow2(-set.dim());
  for (std::size_t i = 0; i < ints.size(); ++i) s.coeffs[i] = Rational(static_cast<long>(ints[i])) * scale;
  return s;
}

RealFn2 convolve2(const RealFn2& f, const RealFn2& g) {
  if (f.m != g.m) throw DomainError("convolve2: dimension mismatch");
  Spectrum2 a = wht(f);
  Spectrum2 b = wht(g);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) a.coeffs[i] *= b.coeffs[i];
  return inverse_wht(a);
}

Spectrum4 dft4(const Z4Set& a) {
  auto ints = parallel::dft4(a);
  Spectrum4 s{a.dim(), std::vector<GaussRational>(ints.size())};
  Rational scale = pow2(-2 * a.dim());
  for (std::size_t i = 0; i < ints.size(); ++i) {
    s.coeffs[i].re = Rational(static_cast<long>(ints[i].re)) * scale;
    s.coeffs[i].im = Rational(static_cast<long>(ints[i].im)) * scale;
  }
  return s;
}

SupResult sup_nontrivial(const Spectrum2& s) {
  if (s.m < 1) throw DomainError("sup_nontrivial requires m >= 1");
  SupResult best{1, abs_q(s.coeffs[1])};
  for (std::size_t g = 2; g < s.coeffs.size(); ++g) {
    Rational mag = abs_q(s.coeffs[g]);
    if (mag > best.magnitude) best = {static_cast<Code>(g), mag};
  }
  return best;
}

std::string spectrum_json(const Spectrum2& s) {
  Json j = Json::object();
  for (std::size_t g = 0; g < s.coeffs.size(); ++g) j[z2_string(static_cast<Code>(g), s.m)] = rational_json(s.coeffs[g]);
  return j.dump();
}

std::string spectrum_json(const Spectrum4& s) {
  Json j = Json::object();
  for (std::size_t g = 0; g < s.coeffs.size(); ++g) {
    j[z4_string(static_cast<Code>(g), s.n)] =
        Json::array({rational_json(s.coeffs[g].re), rational_json(s.coeffs[g].im)});
  }
  return j.dump();
}

}  // namespace rothz4
