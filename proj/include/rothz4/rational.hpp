#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace rothz4 {

using Rational = mpq_class;
using BigInt = mpz_class;

Rational make_rational(std::int64_t num, std::int64_t den = 1);

// 2^e for any integer e (negative allowed).
Rational pow2(long e);
Rational pow_int(const Rational& base, unsigned long e);
Rational abs_q(const Rational& x);

// "p/q" or "p".
std::string to_string(const Rational& x);
Rational parse_rational(const std::string& text);

// Number of bits of a positive integer (bitlength(1) == 1).
unsigned long bitlength(const BigInt& x);
BigInt ceil_q(const Rational& x);
BigInt floor_q(const Rational& x);

// Sound fixed-point bounds. Each result is a multiple of 2^-bits; `lower`
// variants never exceed the true value, `upper` variants never fall below it.
Rational ln_lower(const Rational& x, unsigned bits);
Rational ln_upper(const Rational& x, unsigned bits);
Rational sqrt_lower(const Rational& x, unsigned bits);
Rational sqrt_upper(const Rational& x, unsigned bits);

// Approximate value for display only; never used in a decision.
double approx(const Rational& x);

}  // namespace rothz4
