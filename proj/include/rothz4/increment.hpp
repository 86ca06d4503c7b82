#pragma once

// Density-increment steps on families. Each step returns the new family and a
// certificate that re-verifies from the two families alone.

#include <optional>
#include <string>
#include <vector>

#include "rothz4/counting.hpp"
#include "rothz4/group.hpp"
#include "rothz4/harmonic.hpp"
#include "rothz4/json.hpp"
#include "rothz4/rational.hpp"

namespace rothz4 {

struct LinfResult {
  Subgroup2 subgroup;  // {gamma}^perp
  Code coset = 0;      // 0 or the least element outside the subgroup
  Rational value;      // (f * P_H')(coset) = E f + |hat f(gamma)|
};
LinfResult linf_increment(const RealFn2& f, Code gamma);

enum class IncrementKind {
  fibre_simultaneous,  // one character, every fibre pushed into its best coset
  density_fn,          // one character, the density function pushed into its best coset
  large_l2_step,       // f = delta 1_S, S pushed into its best coset, fibres trimmed
  subfamily,           // same group, fibrewise subsets (trimming)
  grouping,            // arbitrary-index subgroup, arbitrary per-fibre shifts
};
const char* kind_name(IncrementKind k);

struct FamilySummary {
  int m = 0;  // |H| = 2^m
  Rational density;
  BigInt raw_count;  // |H|^4 Lambda
  std::size_t total = 0;
  friend bool operator==(const FamilySummary&, const FamilySummary&) = default;
};
FamilySummary summarize(const Family& f);

// The new family lives on the subgroup H' of the old ambient group, written
// in H'-coordinates: fibre c is A'_{h'} for h' = embed(c), and its members are
// coordinates too. Containment: embed(a') + shift_table[c] in A_{h1 + h'}.
struct IncrementCertificate {
  IncrementKind kind = IncrementKind::subfamily;
  std::optional<Code> gamma;
  Subgroup2 subgroup;
  Code h1 = 0;
  std::vector<Code> shift_table;
  FamilySummary before;
  FamilySummary after;
  Rational claimed_gain;  // after.density >= before.density + claimed_gain
  std::optional<Rational> sigma_before, sigma_after, delta_before, delta_after;
};

Json certificate_json(const IncrementCertificate& c);
IncrementCertificate certificate_from_json(const Json& j);

// Recomputes everything from the two families. Returns the first failing
// check, or nullopt if the certificate is sound.
std::optional<std::string> check_certificate(const IncrementCertificate& c, const Family& before,
                                             const Family& after);

struct IncrementStep {
  Family family;
  IncrementCertificate certificate;
};

// E_h |hat(1_{A_h})(gamma)|
Rational mean_fibre_coefficient(const Family& f, Code gamma);

IncrementStep fibre_increment(const Family& f, Code gamma);
IncrementStep density_fn_increment(const Family& f, Code gamma);

// Restriction helper shared with the engine: fibre c of the result is
// (A_{h1+embed(c)} + shifts[c]) intersected with H', in coordinates, cut to
// its `keep[c]` least members when keep is given.
Family restrict_family(const Family& f, const Subgroup2& sub, Code h1, const std::vector<Code>& shifts,
                       const std::vector<std::size_t>* keep = nullptr);
IncrementCertificate make_certificate(IncrementKind kind, const Family& before, const Family& after,
                                      const Subgroup2& sub, Code h1, std::vector<Code> shifts,
                                      Rational claimed_gain);

// f = delta 1_S view of a family; nullopt if f takes two distinct nonzero values.
struct FlatShape {
  Rational delta;  // 0 for the empty family
  Z2Set support;
  Rational sigma;
};
std::optional<FlatShape> flat_shape(const Family& f);

struct LargeL2Step {
  bool floor_branch = false;
  Rational lambda;        // exact Lambda of the input
  Rational lambda_floor;  // delta^3 sigma^2 / 2 on the floor branch
  Code gamma = 0;
  Rational coefficient;   // |hat 1_S(gamma)| on the increment branch
  std::optional<IncrementStep> step;
};
LargeL2Step large_l2_step(const Family& f);

struct LargeL2Drive {
  Family final_family;
  std::vector<IncrementCertificate> certificates;
  std::vector<Family> families;  // families[0] is the input, families[k] the final one
  std::size_t steps = 0;
  BigInt step_bound;
  Rational final_floor;  // delta_k^3 sigma_k^2 / 2
  Rational chain_floor;  // 2^{-4 steps} final_floor, verified <= Lambda(input)
  Rational lambda_input;
};
LargeL2Drive large_l2_drive(const Family& f, unsigned bits = 8);

struct DyadicSelection {
  int level = 0;
  Z2Set level_set;
  Rational delta;  // 2^{-(level+1)}
  Rational trimmed_delta;  // actual fibre density after trimming, >= delta
  Family subfamily;
  Rational k;
  unsigned long q = 1;  // epsilon = 1/q
  bool k_below_two = false;
  bool eqn_j_holds = false;
  std::vector<Rational> level_densities;
  IncrementCertificate certificate;  // kind subfamily
};
DyadicSelection dyadic_select(const Family& f);

}  // namespace rothz4
