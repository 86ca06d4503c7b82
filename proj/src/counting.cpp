#include "rothz4/counting.hpp"

#include <stdexcept>

#include "rothz4/errors.hpp"

namespace rothz4 {

namespace {

using i128 = __int128;

BigInt from_i128(i128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  BigInt hi(static_cast<unsigned long>(u >> 64));
  BigInt lo(static_cast<unsigned long>(u & ~std::uint64_t{0}));
  BigInt r = (hi << 64) + lo;
  return neg ? BigInt(-r) : r;
}

BigInt from_u64(std::uint64_t v) { return from_i128(static_cast<i128>(v)); }

BigInt pow_big(unsigned long base, unsigned long e) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, e);
  return r;
}

Rational ratio(const BigInt& num, const BigInt& den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

}  // namespace

const char* method_name(CountMethod m) {
  switch (m) {
    case CountMethod::naive: return "naive";
    case CountMethod::fourier: return "fourier";
    case CountMethod::fibre: return "fibre";
  }
  return "?";
}

LambdaReport lambda_naive(const Z4Set& a) {
  if (a.dim() > caps().naive_n) {
    throw DomainError("naive count refused: n = " + std::to_string(a.dim()) + " exceeds cap " +
                      std::to_string(caps().naive_n));
  }
  BigInt raw = from_u64(parallel::progression_count(a));
  return {ratio(raw, pow_big(16, a.dim())), raw, CountMethod::naive};
}

LambdaReport lambda_fourier(const Z4Set& a) {
  const int n = a.dim();
  auto f = parallel::dft4(a);
  i128 re = 0, im = 0;
  for (Code g = 0; g < f.size(); ++g) {
    const GaussInt z = f[g];
    const GaussInt w = f[z4::twice(g)];
    i128 sq_re = static_cast<i128>(z.re) * z.re - static_cast<i128>(z.im) * z.im;
    i128 sq_im = 2 * static_cast<i128>(z.re) * z.im;
    re += sq_re * w.re - sq_im * w.im;
    im += sq_re * w.im + sq_im * w.re;
  }
  if (im != 0) throw std::logic_error("lambda_fourier: imaginary part does not vanish");
  // sum F^2 F(2.) = 4^{3n} Lambda and raw = 16^n Lambda, so raw = sum / 4^n.
  BigInt total = from_i128(re);
  BigInt scale = pow_big(4, n);
  if (total % scale != 0) throw std::logic_error("lambda_fourier: sum not divisible by 4^n");
  BigInt raw = total / scale;
  return {ratio(raw, pow_big(16, n)), raw, CountMethod::fourier};
}

BigInt family_raw_count(const Family& f) { return from_u64(parallel::quadruple_count(f)); }

LambdaReport lambda_family(const Family& f) {
  const int m = f.dim();
  const std::size_t order = f.order();
  BigInt quad = family_raw_count(f);

  // G(gamma) = sum_h |A_h| (-1)^{gamma.h}; F_h = integer WHT of 1_{A_h}.
  std::vector<std::int64_t> g(order);
  for (Code h = 0; h < order; ++h) g[h] = static_cast<std::int64_t>(f.fibre_size(h));
  parallel::wht(g);
  i128 total = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : total) if (order >= 64)
  for (std::int64_t hi = 0; hi < static_cast<std::int64_t>(order); ++hi) {
    const auto h = static_cast<Code>(hi);
    if (f.fibre(h).empty()) continue;
    auto fh = indicator_wht(f.fibre(h));
    i128 inner = 0;
    for (Code gam = 0; gam < order; ++gam) {
      i128 term = static_cast<i128>(fh[gam]) * fh[gam] * g[gam];
      inner += z2::dot(gam, h) ? -term : term;
    }
    total += inner;
  }
  BigInt sum = from_i128(total);
  BigInt scale = pow_big(2, m);
  if (sum % scale != 0 || sum / scale != quad) {
    throw std::logic_error("lambda_family: WHT path " + sum.get_str() + "/2^" + std::to_string(m) +
                           " disagrees with quadruple count " + quad.get_str());
  }
  return {ratio(quad, pow_big(2, 4ul * m)), quad, CountMethod::fibre};
}

BigInt trivial_count(int n) {
  if (n < 0) throw DomainError("trivial_count: negative dimension");
  return pow_big(8, n);
}

BigInt trivial_count_pairs_enumerated(int n) {
  if (n < 0 || n > 3) throw DomainError("trivial-count enumeration is limited to n <= 3");
  const auto size = static_cast<Code>(z4::order(n));
  std::uint64_t c = 0;
  for (Code x = 0; x < size; ++x) {
    for (Code d = 0; d < size; ++d) c += z4::twice(d) == 0 ? 1 : 0;
  }
  return from_u64(c);
}

BigInt trivial_count_triples_enumerated(int n) {
  if (n < 0 || n > 3) throw DomainError("trivial-count enumeration is limited to n <= 3");
  const auto size = static_cast<Code>(z4::order(n));
  std::uint64_t c = 0;
  for (Code x = 0; x < size; ++x) {
    for (Code y = 0; y < size; ++y) {
      Code z = z4::sub(z4::twice(y), x);
      if (x == y || y == z || x == z) ++c;
    }
  }
  return from_u64(c);
}

BigInt trivial_pairs_in(const Z4Set& a) {
  const Code low = z4::low_mask(a.dim());
  std::uint64_t c = 0;
  for (Code x : a.members()) {
    // d ranges over ker 2 = codes with every digit in {0, 2}.
    for (Code s = 0;; s = (s - (low << 1)) & (low << 1)) {
      if (a.contains(z4::add(x, s))) ++c;
      if (s == (low << 1)) break;
    }
  }
  return from_u64(c);
}

std::optional<Witness> has_proper_progression(const Z4Set& a) {
  return parallel::first_proper_progression(a);
}

Rational energy(const Z2Set& b) {
  const int m = b.dim();
  auto f = indicator_wht(b);
  i128 s = 0;
  for (std::int64_t v : f) {
    i128 sq = static_cast<i128>(v) * v;
    s += sq * sq;
  }
  Rational via_wht = ratio(from_i128(s), pow_big(2, 4ul * m));
  Rational via_count = ratio(from_u64(parallel::energy_count(b)), pow_big(2, 3ul * m));
  if (via_wht != via_count) throw std::logic_error("energy: WHT path disagrees with direct count");
  return via_wht;
}

RealFn2 density_function(const Family& f) {
  RealFn2 fn(f.dim());
  for (Code h = 0; h < f.order(); ++h) fn.values[h] = f.density_fn(h);
  return fn;
}

Diagnostics diagnostics(const Family& f) {
  RealFn2 fn = density_function(f);
  Diagnostics d;
  d.alpha = fn.mean();
  if (d.alpha == 0) throw DomainError("diagnostics: family has density 0");
  d.mean_square = fn.mean_square();
  d.k = d.mean_square / (d.alpha * d.alpha);
  if (f.dim() >= 1) {
    SupResult s = sup_nontrivial(wht(fn));
    d.sup_character = s.character;
    d.sup_f_hat = s.magnitude;
  }
  return d;
}

Rational lev_sum(const Z4Set& a) {
  Spectrum4 s = dft4(a);
  const Code low = z4::low_mask(a.dim());
  Rational total = 0;
  for (Code g = 0; g < s.coeffs.size(); ++g) {
    if (g & low) continue;
    if (s.coeffs[g].im != 0) throw std::logic_error("lev_sum: real character with complex coefficient");
    total += s.coeffs[g].re * s.coeffs[g].re;
  }
  return total;
}

}  // namespace rothz4
