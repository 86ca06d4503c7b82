#include <doctest.h>

#include "oracles.hpp"
#include "rothz4/constructions.hpp"
#include "rothz4/counting.hpp"
#include "rothz4/errors.hpp"
#include "rothz4/random.hpp"

using namespace rothz4;

namespace {

std::uint64_t binom(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) r = r * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
  return r;
}

// All maximal-size free sets in Z_4^1 and Z_4^2 found by the search, plus a
// few smaller ones, to feed the product property.
std::vector<Z4Set> free_sets() {
  std::vector<Z4Set> out;
  Rng rng(71);
  for (int n = 1; n <= 2; ++n) {
    out.push_back(max_free_search(n).set);
    while (out.size() < static_cast<std::size_t>(10 * n)) {
      Z4Set a = random_z4set(n, 0.35, rng);
      if (!a.empty() && !has_proper_progression(a)) out.push_back(a);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("the 16-point set") {
  Z4Set a = a0();
  CHECK(a.dim() == 3);
  CHECK(a.size() == 16);
  CHECK_FALSE(has_proper_progression(a));
  CHECK_FALSE(oracle::has_proper(oracle::z4_digits(a), 3));
  // 16 = (4^3)^{2/3}
  CHECK(a.size() * a.size() * a.size() == z4::order(3) * z4::order(3));
}

TEST_CASE("the 16-point set admits no one-point extension") {
  Z4Set a = a0();
  int candidates = 0;
  for (Code x = 0; x < z4::order(3); ++x) {
    if (a.contains(x)) continue;
    std::vector<Code> m(a.members().begin(), a.members().end());
    m.push_back(x);
    std::sort(m.begin(), m.end());
    CHECK(has_proper_progression(Z4Set(3, m)));
    ++candidates;
  }
  CHECK(candidates == 48);
}

TEST_CASE("products of free sets are free") {
  auto sets = free_sets();
  int pairs = 0;
  for (const auto& x : sets) {
    for (const auto& y : sets) {
      if (pairs >= 60) break;
      Z4Set p = product(x, y);
      CHECK(p.size() == x.size() * y.size());
      CHECK(p.dim() == x.dim() + y.dim());
      CHECK_FALSE(has_proper_progression(p));
      ++pairs;
    }
  }
  CHECK(pairs >= 20);
}

TEST_CASE("product coordinates: first factor is most significant") {
  Z4Set p = product(Z4Set(1, {1}), Z4Set(2, {ElemZ4::from_digits(std::vector<int>{2, 3}).code()}));
  REQUIRE(p.size() == 1);
  CHECK(ElemZ4(3, p.members()[0]).digits() == std::vector<int>{1, 2, 3});
}

TEST_CASE("Moser sets: sizes and freeness") {
  for (int n = 1; n <= 12; ++n) CHECK(moser_size(n) == binom(n, n / 3) << (n - n / 3));
  for (int n = 1; n <= 9; ++n) CHECK(moser(n).size() == moser_size(n));
  CHECK(moser(3).size() == 12);
  CHECK(moser(4).size() == 32);
  CHECK(moser(5).size() == 80);
  for (int n = 1; n <= 5; ++n) CHECK_FALSE(has_proper_progression(moser(n)));
  // The Moser set for n = 3 is not the 16-point set.
  CHECK_FALSE(moser(3) == a0());
  CHECK_THROWS_AS(moser(0), DomainError);
}

TEST_CASE("exhaustive search matches brute force") {
  ConstructionRecord one = max_free_search(1);
  CHECK(one.size == 2);
  CHECK(one.proven);
  CHECK(one.size == oracle::max_free_brute(1));
  ConstructionRecord two = max_free_search(2);
  CHECK(two.proven);
  CHECK(two.size == oracle::max_free_brute(2));
  CHECK(two.size == 6);  // frozen
  CHECK(two.verified_free);
  CHECK_THROWS_AS(max_free_search(4), DomainError);
}

TEST_CASE("search in Z_4^3 proves the 16-point set optimal") {
  ConstructionRecord three = max_free_search(3);
  CHECK(three.size == 16);
  CHECK(three.proven);
  CHECK(three.verified_free);
  // A starved budget reports best-found, never a proof.
  SearchOptions tiny;
  tiny.node_budget = 50;
  ConstructionRecord partial = max_free_search(3, tiny);
  CHECK_FALSE(partial.proven);
  CHECK(partial.size >= 16);
  CHECK(partial.verified_free);
}

TEST_CASE("log 3 / log 4 encloses 0.792") {
  Interval r = log3_over_log4(24);
  CHECK(r.lo <= r.hi);
  CHECK(r.lo >= make_rational(7915, 10000));
  CHECK(r.hi < make_rational(7925, 10000));
}
