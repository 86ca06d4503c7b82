#pragma once

// Integer hot loops. Every kernel exists twice: `serial::` is the reference
// implementation kept for testing, `parallel::` is the OpenMP version used by
// the library. Both return identical results for any thread count.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rothz4/group.hpp"

namespace rothz4 {

struct GaussInt {
  std::int64_t re = 0;
  std::int64_t im = 0;
  friend bool operator==(const GaussInt&, const GaussInt&) = default;
};

// Proper-progression witness (x, d) as Z_4 codes.
using Witness = std::pair<Code, Code>;

namespace serial {
// Unnormalized in-place Walsh-Hadamard butterfly; size must be a power of two.
void wht(std::span<std::int64_t> values);
// F(r) = sum_x 1_A(x) i^{-r.x} over Z_4^n.
std::vector<GaussInt> dft4(const Z4Set& a);
// #{(x,d) : x, x+d, x+2d in A}
std::uint64_t progression_count(const Z4Set& a);
// #{(a,a',y,h) : a,a' in A_h, y in A_{a+a'+h}}; `include`, when given, restricts h.
std::uint64_t quadruple_count(const Family& f, std::span<const char> include = {});
// #{(a,b,c,d) in B^4 : a+b = c+d}
std::uint64_t energy_count(const Z2Set& b);
// Lexicographically first (x,d) with 2d != 0 and x, x+d, x+2d in A.
std::optional<Witness> first_proper_progression(const Z4Set& a);
}  // namespace serial

namespace parallel {
void wht(std::span<std::int64_t> values);
std::vector<GaussInt> dft4(const Z4Set& a);
std::uint64_t progression_count(const Z4Set& a);
std::uint64_t quadruple_count(const Family& f, std::span<const char> include = {});
std::uint64_t energy_count(const Z2Set& b);
std::optional<Witness> first_proper_progression(const Z4Set& a);
}  // namespace parallel

// Integer WHT of an indicator: 2^m * hat(1_B)(gamma) for every gamma.
std::vector<std::int64_t> indicator_wht(const Z2Set& b);

}  // namespace rothz4
