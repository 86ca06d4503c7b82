#pragma once

// Small-scale structure extraction: an exhaustive search for a subgroup and
// shift on which a set is dense, and the loop that makes it Fourier-uniform.

#include <optional>
#include <vector>

#include "rothz4/group.hpp"
#include "rothz4/json.hpp"
#include "rothz4/rational.hpp"

namespace rothz4 {

struct BsgResult {
  Subgroup2 subgroup;
  Code shift = 0;             // x, an ambient element
  Rational local_density;     // (1_A * P_H')(x) = |A cap (x + H')| / |H'|
  Z2Set local_set;            // A' = A cap (x + H') - x, in H'-coordinates
  Rational sup_coeff;         // sup over gamma != 0 of |hat 1_A'(gamma)| on H'
  Rational uniformity;        // sup_coeff / local_density (0 when A' is empty)
};
Json bsg_json(const BsgResult& r);

// Exhaustive over subgroups of density >= min_density and all cosets. Among
// pairs with local density >= c/2, maximizes local density, then subgroup
// size, then canonical subgroup order, then the least shift.
std::optional<BsgResult> bsg_oracle(const Z2Set& a, const Rational& c, const Rational& min_density);

// The pair (H', x) as a BsgResult, with A' and its uniformity filled in.
BsgResult bsg_at(const Z2Set& a, const Subgroup2& sub, Code shift);

struct UniformizeStep {
  Code gamma = 0;     // character of H_i, in H_i-coordinates
  Code shift = 0;     // x_{i+1}, ambient
  Rational density;   // alpha_{i+1}
};
struct UniformizeResult {
  BsgResult result;
  std::vector<UniformizeStep> steps;
  BigInt step_bound;
};
UniformizeResult uniformize(const Z2Set& a, const Rational& epsilon, const BsgResult& inner, unsigned bits = 8);

}  // namespace rothz4
