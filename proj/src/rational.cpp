#include "rothz4/rational.hpp"

#include <mpfr.h>

#include "rothz4/errors.hpp"

namespace rothz4 {

Rational make_rational(std::int64_t num, std::int64_t den) {
  Rational r(BigInt(static_cast<long>(num)), BigInt(static_cast<long>(den)));
  r.canonicalize();
  return r;
}

Rational pow2(long e) {
  BigInt p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e < 0 ? -e : e));
  if (e >= 0) return Rational(p);
  Rational r(BigInt(1), p);
  return r;
}

Rational pow_int(const Rational& base, unsigned long e) {
  BigInt n, d;
  mpz_pow_ui(n.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(d.get_mpz_t(), base.get_den_mpz_t(), e);
  Rational r(n, d);
  r.canonicalize();
  return r;
}

Rational abs_q(const Rational& x) { return x < 0 ? Rational(-x) : x; }

std::string to_string(const Rational& x) { return x.get_str(); }

Rational parse_rational(const std::string& text) {
  Rational r;
  if (text.empty() || r.set_str(text, 10) != 0 || r.get_den() == 0) {
    throw DomainError("malformed rational: '" + text + "'");
  }
  r.canonicalize();
  return r;
}

unsigned long bitlength(const BigInt& x) {
  if (x <= 0) return 0;
  return mpz_sizeinbase(x.get_mpz_t(), 2);
}

BigInt ceil_q(const Rational& x) {
  BigInt r;
  mpz_cdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

BigInt floor_q(const Rational& x) {
  BigInt r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

namespace {

// ln(x) rounded in direction `rnd`, then snapped to the 2^-bits grid in the
// same direction.
Rational ln_directed(const Rational& x, unsigned bits, mpfr_rnd_t rnd) {
  if (x <= 0) throw DomainError("logarithm of non-positive rational " + to_string(x));
  mpfr_t v;
  mpfr_init2(v, 128 + bits);
  mpfr_set_q(v, x.get_mpq_t(), rnd);
  mpfr_log(v, v, rnd);
  mpfr_mul_2ui(v, v, bits, rnd);
  BigInt grid;
  mpfr_get_z(grid.get_mpz_t(), v, rnd);
  mpfr_clear(v);
  return Rational(grid) * pow2(-static_cast<long>(bits));
}

}  // namespace

Rational ln_lower(const Rational& x, unsigned bits) { return ln_directed(x, bits, MPFR_RNDD); }
Rational ln_upper(const Rational& x, unsigned bits) { return ln_directed(x, bits, MPFR_RNDU); }

Rational sqrt_lower(const Rational& x, unsigned bits) {
  if (x < 0) throw DomainError("square root of negative rational");
  // floor(sqrt(floor(x * 4^bits))) / 2^bits
  BigInt scaled = floor_q(x * pow2(2 * static_cast<long>(bits)));
  BigInt root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  return Rational(root) * pow2(-static_cast<long>(bits));
}

Rational sqrt_upper(const Rational& x, unsigned bits) {
  Rational lo = sqrt_lower(x, bits);
  if (lo * lo == x) return lo;
  return lo + pow2(-static_cast<long>(bits));
}

double approx(const Rational& x) { return x.get_d(); }

}  // namespace rothz4
