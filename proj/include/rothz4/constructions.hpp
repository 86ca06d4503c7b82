#pragma once

// Progression-free sets in Z_4^n: the 16-point set in Z_4^3, products, the
// Moser-type sets, and an exhaustive search for small n.

#include <cstdint>
#include <string>

#include "rothz4/group.hpp"
#include "rothz4/rational.hpp"

namespace rothz4 {

enum class Origin { a0, product, moser, search };
const char* origin_name(Origin o);

struct ConstructionRecord {
  Z4Set set;
  Origin origin = Origin::a0;
  bool verified_free = false;
  std::size_t size = 0;
  bool proven = false;  // search only: true when the result is a proven maximum
  std::uint64_t nodes = 0;
};

Z4Set a0();
// Coordinates of `a` first, then those of `b`.
Z4Set product(const Z4Set& a, const Z4Set& b);
// {0,1,2}^n with exactly floor(n/3) ones, embedded digitwise; 1 <= n <= 12.
Z4Set moser(int n);
// C(n, floor(n/3)) 2^(n - floor(n/3)).
std::uint64_t moser_size(int n);

// Fills verified_free by exhaustive progression enumeration.
ConstructionRecord record(Z4Set set, Origin origin);

struct SearchOptions {
  std::uint64_t node_budget = 200'000'000;  // per root branch
};
// Maximum proper-progression-free set for n <= 3; refuses larger n. The result
// is the largest found, least in lexicographic member order among those.
ConstructionRecord max_free_search(int n, const SearchOptions& opt = {});

// Enclosure of log 3 / log 4 from directed-rounding logarithms.
struct Interval {
  Rational lo, hi;
};
Interval log3_over_log4(unsigned bits);

}  // namespace rothz4
