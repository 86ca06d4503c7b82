#include <doctest.h>

#include "oracles.hpp"
#include "rothz4/harmonic.hpp"
#include "rothz4/kernels.hpp"
#include "rothz4/random.hpp"

using namespace rothz4;

namespace {

RealFn2 random_fn(int m, Rng& rng) {
  std::uniform_int_distribution<long> num(-9, 9), den(1, 7);
  RealFn2 f(m);
  for (auto& v : f.values) v = make_rational(num(rng), den(rng));
  return f;
}

std::map<oracle::Digits, Rational> as_map(const RealFn2& f) {
  std::map<oracle::Digits, Rational> out;
  for (Code x = 0; x < f.values.size(); ++x) out[ElemZ2(f.m, x).bits()] = f.values[x];
  return out;
}

}  // namespace

TEST_CASE("WHT matches the defining sum") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = trial % 5;
    RealFn2 f = random_fn(m, rng);
    Spectrum2 s = wht(f);
    auto fm = as_map(f);
    for (Code r = 0; r < s.coeffs.size(); ++r) CHECK(s.coeffs[r] == oracle::wht(fm, ElemZ2(m, r).bits()));
  }
}

TEST_CASE("inverse WHT, Parseval and the convolution identity") {
  Rng rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = trial % 5;
    RealFn2 f = random_fn(m, rng), g = random_fn(m, rng);
    Spectrum2 fs = wht(f), gs = wht(g);
    CHECK(inverse_wht(fs).values == f.values);
    Rational energy_x = f.mean_square(), energy_hat = 0;
    for (const auto& c : fs.coeffs) energy_hat += c * c;
    CHECK(energy_x == energy_hat);
    Spectrum2 cs = wht(convolve2(f, g));
    for (std::size_t r = 0; r < cs.coeffs.size(); ++r) CHECK(cs.coeffs[r] == fs.coeffs[r] * gs.coeffs[r]);
  }
}

TEST_CASE("indicator fast path equals the rational transform") {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    Z2Set b = random_z2set(trial % 7, 0.4, rng);
    CHECK(wht_indicator(b).coeffs == wht(RealFn2::indicator(b)).coeffs);
  }
}

TEST_CASE("measure of a subgroup has transform equal to the annihilator indicator") {
  for (const auto& h : enumerate_subgroups(4)) {
    Spectrum2 s = wht(RealFn2::measure(h));
    Subgroup2 perp = Subgroup2::span_of(4, h.annihilator());
    for (Code r = 0; r < s.coeffs.size(); ++r) CHECK(s.coeffs[r] == (perp.contains(r) ? 1 : 0));
  }
}

TEST_CASE("Z_4 transform matches the defining sum") {
  Rng rng(24);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = trial % 4;
    Z4Set a = random_z4set(n, 0.5, rng);
    Spectrum4 s = dft4(a);
    auto digits = oracle::z4_digits(a);
    for (Code r = 0; r < s.coeffs.size(); ++r) {
      auto [re, im] = oracle::dft4(digits, ElemZ4(n, r).digits());
      CHECK(s.coeffs[r].re == re);
      CHECK(s.coeffs[r].im == im);
    }
  }
}

TEST_CASE("real characters of Z_4 give real coefficients") {
  Rng rng(25);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    Z4Set a = random_z4set(n, 0.5, rng);
    Spectrum4 s = dft4(a);
    for (Code r = 0; r < s.coeffs.size(); ++r) {
      if (z4::twice(r) == 0) CHECK(s.coeffs[r].im == 0);
    }
  }
}

TEST_CASE("sup_nontrivial picks the least character among maxima") {
  Spectrum2 s{2, {Rational(1), Rational(1, 2), make_rational(-1, 2), Rational(1, 4)}};
  SupResult r = sup_nontrivial(s);
  CHECK(r.character == 1);
  CHECK(r.magnitude == Rational(1, 2));
}
