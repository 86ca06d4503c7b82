#include <doctest.h>

#include "rothz4/counting.hpp"
#include "rothz4/errors.hpp"
#include "rothz4/random.hpp"
#include "rothz4/regularize.hpp"

using namespace rothz4;

namespace {

// Best local density over all subgroups of density >= min_density and all shifts.
Rational brute_best_density(const Z2Set& a, const Rational& min_density) {
  Rational best = -1;
  for (const auto& h : enumerate_subgroups(a.dim())) {
    if (h.density() < min_density) continue;
    for (Code x = 0; x < z2::order(a.dim()); ++x) {
      std::size_t count = 0;
      for (Code y : h.members()) count += a.contains(x ^ y);
      best = std::max(best, Rational(Rational(static_cast<unsigned long>(count)) * pow2(-h.dim())));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("subgroup oracle finds the densest coset") {
  Rng rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 1 + trial % 5;
    Z2Set a = random_z2set(m, 0.3 + 0.1 * (trial % 5), rng);
    if (a.empty()) continue;
    const Rational c = energy(a) / (a.density() * a.density() * a.density());
    auto r = bsg_oracle(a, c, Rational(1, 8));
    const Rational best = brute_best_density(a, Rational(1, 8));
    if (best >= c / 2) {
      REQUIRE(r);
      CHECK(r->local_density == best);
      CHECK(r->local_density >= c / 2);
      CHECK(r->subgroup.density() >= Rational(1, 8));
      CHECK(r->local_set.density() == r->local_density);
      for (Code y : r->local_set.members()) CHECK(a.contains(r->subgroup.embed(y) ^ r->shift));
    } else {
      CHECK_FALSE(r);
    }
  }
}

TEST_CASE("subgroup oracle respects the cap") {
  CHECK_THROWS_AS(bsg_oracle(Z2Set(caps().subgroup_m + 1), 1, Rational(1, 2)), DomainError);
}

TEST_CASE("uniformization exits uniform and grows geometrically") {
  Rng rng(62);
  int runs = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int m = 2 + trial % 4;
    Z2Set a = random_z2set(m, 0.25 + 0.05 * (trial % 8), rng);
    if (a.empty()) continue;
    const Rational eps = make_rational(1, 2 + trial % 6);
    BsgResult start = bsg_at(a, Subgroup2::whole(m), 0);
    UniformizeResult u = uniformize(a, eps, start);
    const BsgResult& r = u.result;
    CHECK(r.sup_coeff <= eps * r.local_density);
    Rational prev = start.local_density;
    for (const auto& s : u.steps) {
      CHECK(s.density >= (1 + eps) * prev);
      prev = s.density;
    }
    CHECK(BigInt(static_cast<unsigned long>(u.steps.size())) <= u.step_bound);
    for (Code y : r.local_set.members()) CHECK(a.contains(r.subgroup.embed(y) ^ r.shift));
    ++runs;
  }
  CHECK(runs > 100);
}

TEST_CASE("a subgroup is already uniform") {
  for (const auto& h : enumerate_subgroups(4)) {
    Z2Set a(4, h.members());
    UniformizeResult u = uniformize(a, Rational(1, 4), bsg_at(a, Subgroup2::whole(4), 0));
    if (h.dim() == 4) CHECK(u.steps.empty());
    CHECK(u.result.local_density == 1);
  }
}
