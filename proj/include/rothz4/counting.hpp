#pragma once

// Progression and energy counts. Every quantity has two independent
// computation paths; disagreement is an internal error, never a tolerance.

#include <cstdint>
#include <optional>

#include "rothz4/group.hpp"
#include "rothz4/harmonic.hpp"
#include "rothz4/kernels.hpp"
#include "rothz4/rational.hpp"

namespace rothz4 {

enum class CountMethod { naive, fourier, fibre };
const char* method_name(CountMethod m);

struct LambdaReport {
  Rational lambda;
  BigInt raw_count;  // lambda * 16^n for Z_4^n sets, lambda * |H|^4 for families
  CountMethod method = CountMethod::naive;
};

LambdaReport lambda_naive(const Z4Set& a);
LambdaReport lambda_fourier(const Z4Set& a);
// Quadruple count and WHT path; throws std::logic_error if they differ.
LambdaReport lambda_family(const Family& f);
// Quadruple count only (no WHT cross-check); for hot loops in the engine.
BigInt family_raw_count(const Family& f);

// #{(x,d) : 2d = 0} = 8^n.
BigInt trivial_count(int n);
// Same count by enumerating (x,d); n <= 3.
BigInt trivial_count_pairs_enumerated(int n);
// #{(x,y,z) : x + z = 2y and two of x, y, z coincide}; n <= 3.
BigInt trivial_count_triples_enumerated(int n);
// #{(x,d) : 2d = 0, x in A, x + d in A}, i.e. non-proper progressions in A.
BigInt trivial_pairs_in(const Z4Set& a);

std::optional<Witness> has_proper_progression(const Z4Set& a);

// ||1_B * 1_B||^2 = sum_gamma hat(1_B)(gamma)^4 = E(B) / 2^{3m}.
Rational energy(const Z2Set& b);

struct Diagnostics {
  Rational alpha;
  Rational mean_square;  // ||f||_2^2
  Rational k;            // mean_square / alpha^2
  Code sup_character = 0;
  Rational sup_f_hat;    // max over gamma != 0 of |hat f(gamma)|
};
Diagnostics diagnostics(const Family& f);

// sum over gamma in {0,2}^n of hat(1_A)(gamma)^2, the real characters of Z_4^n.
Rational lev_sum(const Z4Set& a);

// Density function of a family as a RealFn2.
RealFn2 density_function(const Family& f);

}  // namespace rothz4
