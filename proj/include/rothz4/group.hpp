#pragma once

// Element encodings for Z_2^m and Z_4^n, set containers, subgroups of Z_2^m,
// families of subsets of Z_2^m, and the fibre decomposition Z_4^n -> family.
//
// Encoding. An element is a packed integer code. For Z_2^m, coordinate k
// (k = 0 is the most significant, i.e. written first) lives at bit m-1-k. For
// Z_4^n, digit k lives at bits 2(n-1-k), 2(n-1-k)+1. Numeric order of codes is
// lexicographic order of coordinate tuples, which every tie-break relies on.

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rothz4/rational.hpp"

namespace rothz4 {

using Code = std::uint32_t;

inline constexpr int kMaxZ2Dim = 20;
inline constexpr int kMaxZ4Dim = 10;

// Module caps; overridable via ROTHZ4_SUBGROUP_CAP / ROTHZ4_NAIVE_CAP.
struct Caps {
  int subgroup_m = 5;
  int naive_n = 8;
};
const Caps& caps();

namespace z2 {
inline int dot(Code r, Code x) { return std::popcount(r & x) & 1; }
inline std::size_t order(int m) { return std::size_t{1} << m; }
}  // namespace z2

namespace z4 {
// Mask of the low bit of every digit.
inline Code low_mask(int n) { return n == 0 ? 0 : static_cast<Code>(0x55555555u >> (32 - 2 * n)); }
inline Code add(Code a, Code b) { return (a ^ b) ^ ((a & b & 0x55555555u) << 1); }
inline Code neg(Code a) { return a ^ ((a & 0x55555555u) << 1); }
inline Code sub(Code a, Code b) { return add(a, neg(b)); }
inline Code twice(Code a) { return (a & 0x55555555u) << 1; }
inline std::size_t order(int n) { return std::size_t{1} << (2 * n); }
inline int digit(Code a, int n, int k) { return static_cast<int>((a >> (2 * (n - 1 - k))) & 3u); }
// r.x mod 4
int dot(Code r, Code x);
// Digitwise parity (d mod 2) as a Z_2^n code.
Code parity_bits(Code a, int n);
// Digitwise half of the even part ((d - d mod 2)/2) as a Z_2^n code.
Code high_bits(Code a, int n);
// Inverse of (parity_bits, high_bits).
Code compose(Code parity, Code high, int n);
}  // namespace z4

class ElemZ2 {
 public:
  ElemZ2() = default;
  ElemZ2(int m, Code code);
  static ElemZ2 from_bits(std::span<const int> bits);

  int dim() const { return m_; }
  Code code() const { return code_; }
  std::vector<int> bits() const;
  std::string str() const;

  friend ElemZ2 operator+(const ElemZ2& a, const ElemZ2& b);
  friend bool operator==(const ElemZ2&, const ElemZ2&) = default;
  friend auto operator<=>(const ElemZ2&, const ElemZ2&) = default;

 private:
  int m_ = 0;
  Code code_ = 0;
};

class ElemZ4 {
 public:
  ElemZ4() = default;
  ElemZ4(int n, Code code);
  static ElemZ4 from_digits(std::span<const int> digits);

  int dim() const { return n_; }
  Code code() const { return code_; }
  std::vector<int> digits() const;
  std::string str() const;
  ElemZ4 doubled() const { return ElemZ4(n_, z4::twice(code_)); }
  bool in_image_of_two() const { return (code_ & z4::low_mask(n_)) == 0; }

  friend ElemZ4 operator+(const ElemZ4& a, const ElemZ4& b);
  friend ElemZ4 operator-(const ElemZ4& a, const ElemZ4& b);
  friend bool operator==(const ElemZ4&, const ElemZ4&) = default;
  friend auto operator<=>(const ElemZ4&, const ElemZ4&) = default;

 private:
  int n_ = 0;
  Code code_ = 0;
};

// Sorted member list plus membership bitmask over a universe of codes [0, N).
class CodeSet {
 public:
  CodeSet() = default;
  CodeSet(std::size_t universe, std::vector<Code> members);  // rejects duplicates
  static CodeSet from_predicate_words(std::size_t universe, std::vector<std::uint64_t> words);

  std::size_t universe() const { return universe_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(Code c) const {
    return c < universe_ && ((words_[c >> 6] >> (c & 63)) & 1u);
  }
  std::span<const Code> members() const { return members_; }
  std::span<const std::uint64_t> words() const { return words_; }

  friend bool operator==(const CodeSet& a, const CodeSet& b) {
    return a.universe_ == b.universe_ && a.members_ == b.members_;
  }

 private:
  std::size_t universe_ = 0;
  std::vector<Code> members_;
  std::vector<std::uint64_t> words_;
};

class Z2Set {
 public:
  Z2Set() : Z2Set(0) {}
  explicit Z2Set(int m, std::vector<Code> members = {});
  static Z2Set full(int m);

  int dim() const { return m_; }
  std::size_t size() const { return set_.size(); }
  bool empty() const { return set_.empty(); }
  bool contains(Code c) const { return set_.contains(c); }
  std::span<const Code> members() const { return set_.members(); }
  std::span<const std::uint64_t> words() const { return set_.words(); }
  Rational density() const;

  friend bool operator==(const Z2Set& a, const Z2Set& b) { return a.m_ == b.m_ && a.set_ == b.set_; }

 private:
  int m_ = 0;
  CodeSet set_;
};

class Z4Set {
 public:
  Z4Set() : Z4Set(0) {}
  explicit Z4Set(int n, std::vector<Code> members = {});
  static Z4Set full(int n);

  int dim() const { return n_; }
  std::size_t size() const { return set_.size(); }
  bool empty() const { return set_.empty(); }
  bool contains(Code c) const { return set_.contains(c); }
  std::span<const Code> members() const { return set_.members(); }
  std::span<const std::uint64_t> words() const { return set_.words(); }
  Rational density() const;

  friend bool operator==(const Z4Set& a, const Z4Set& b) { return a.n_ == b.n_ && a.set_ == b.set_; }

 private:
  int n_ = 0;
  CodeSet set_;
};

// A subspace of Z_2^m held as a reduced-row-echelon basis (pivots in
// decreasing bit order) together with a reduced basis of its annihilator.
// Coordinates: x in H maps to the Z_2^dim code whose k-th bit (from the top)
// is x's bit at the k-th pivot. This isomorphism preserves code order.
class Subgroup2 {
 public:
  Subgroup2() = default;
  static Subgroup2 span_of(int m, std::span<const Code> generators);
  static Subgroup2 annihilator_of(int m, std::span<const Code> characters);
  static Subgroup2 whole(int m);

  int ambient() const { return m_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  std::size_t size() const { return std::size_t{1} << dim(); }
  int index_log2() const { return m_ - dim(); }
  Rational density() const { return pow2(-index_log2()); }
  std::span<const Code> basis() const { return basis_; }
  std::span<const Code> annihilator() const { return annihilator_; }

  bool contains(Code x) const;
  Code coords(Code x) const;  // requires contains(x)
  Code embed(Code c) const;
  // Least element of x + H.
  Code coset_min(Code x) const;
  // Least element of the ambient group outside H (requires H proper).
  Code least_outside() const;
  std::vector<Code> members() const;
  // {x in H : gamma . coords(x) = 0} for a nonzero character gamma of H (in coordinates).
  Subgroup2 kernel_of(Code gamma_coords) const;

  friend bool operator==(const Subgroup2& a, const Subgroup2& b) {
    return a.m_ == b.m_ && a.basis_ == b.basis_;
  }
  // Canonical order: dimension, then basis vectors lexicographically.
  friend bool canonical_less(const Subgroup2& a, const Subgroup2& b);

 private:
  int m_ = 0;
  std::vector<Code> basis_;
  std::vector<int> pivots_;
  std::vector<Code> annihilator_;
};

// Reduced row echelon form of the span of `vectors` (pivots descending).
std::vector<Code> rref(std::span<const Code> vectors);

class Family {
 public:
  Family() = default;
  explicit Family(int m);  // all fibres empty
  Family(int m, std::vector<Z2Set> fibres);

  int dim() const { return m_; }
  std::size_t order() const { return z2::order(m_); }
  const Z2Set& fibre(Code h) const { return fibres_[h]; }
  const std::vector<Z2Set>& fibres() const { return fibres_; }
  std::size_t fibre_size(Code h) const { return fibres_[h].size(); }
  Rational density_fn(Code h) const;
  // Sum of fibre sizes; density = total / |H|^2.
  std::size_t total() const { return total_; }
  Rational density() const;

  friend bool operator==(const Family& a, const Family& b) {
    return a.m_ == b.m_ && a.fibres_ == b.fibres_;
  }

 private:
  int m_ = 0;
  std::vector<Z2Set> fibres_;
  std::size_t total_ = 0;
};

// t with 2t = y, by digitwise halving.
ElemZ4 section_t(const ElemZ4& y);
Family fibre_decompose(const Z4Set& a);
Z4Set reconstruct(const Family& family);
Subgroup2 subgroup_from_character(const ElemZ2& gamma);
std::vector<Subgroup2> enumerate_subgroups(int m);

// Set file format: first line "z4 n=<n>" or "z2 m=<m>", then one digit string
// per line, most significant coordinate first; '#' starts a comment line.
// In dimension 0 the single element is written ".".
using AnySet = std::variant<Z2Set, Z4Set>;
AnySet parse_set(const std::string& text);
std::string format_set(const Z4Set& set);
std::string format_set(const Z2Set& set);

// Family file format: first line "family m=<m>", then "<h>: <a> <a> ..." with
// binary digit strings; unlisted fibres are empty.
Family parse_family(const std::string& text);
std::string format_family(const Family& family);

std::string z2_string(Code c, int m);
std::string z4_string(Code c, int n);

}  // namespace rothz4
