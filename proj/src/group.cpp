#include "rothz4/group.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "rothz4/errors.hpp"

namespace rothz4 {

namespace {

int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return fallback;
  char* end = nullptr;
  long parsed = std::strtol(v, &end, 10);
  if (*end != '\0' || parsed < 0 || parsed > 64) {
    throw DomainError(std::string("invalid value for ") + name + ": '" + v + "'");
  }
  return static_cast<int>(parsed);
}

void check_z2_dim(int m) {
  if (m < 0 || m > kMaxZ2Dim) throw DomainError("Z_2^m dimension out of range: " + std::to_string(m));
}

void check_z4_dim(int n) {
  if (n < 0 || n > kMaxZ4Dim) throw DomainError("Z_4^n dimension out of range: " + std::to_string(n));
}

}  // namespace

const Caps& caps() {
  static const Caps c{env_int("ROTHZ4_SUBGROUP_CAP", 5), env_int("ROTHZ4_NAIVE_CAP", 8)};
  return c;
}

namespace z4 {

int dot(Code r, Code x) {
  int s = 0;
  while (r != 0 && x != 0) {
    s += static_cast<int>((r & 3u) * (x & 3u));
    r >>= 2;
    x >>= 2;
  }
  return s & 3;
}

Code parity_bits(Code a, int n) {
  Code out = 0;
  for (int k = 0; k < n; ++k) out |= ((a >> (2 * k)) & 1u) << k;
  return out;
}

Code high_bits(Code a, int n) {
  Code out = 0;
  for (int k = 0; k < n; ++k) out |= ((a >> (2 * k + 1)) & 1u) << k;
  return out;
}

Code compose(Code parity, Code high, int n) {
  Code out = 0;
  for (int k = 0; k < n; ++k) {
    out |= ((parity >> k) & 1u) << (2 * k);
    out |= ((high >> k) & 1u) << (2 * k + 1);
  }
  return out;
}

}  // namespace z4

std::string z2_string(Code c, int m) {
  std::string s(static_cast<std::size_t>(m), '0');
  for (int k = 0; k < m; ++k) s[k] = ((c >> (m - 1 - k)) & 1u) ? '1' : '0';
  return s;
}

std::string z4_string(Code c, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int k = 0; k < n; ++k) s[k] = static_cast<char>('0' + z4::digit(c, n, k));
  return s;
}

// ---- elements --------------------------------------------------------------

ElemZ2::ElemZ2(int m, Code code) : m_(m), code_(code) {
  check_z2_dim(m);
  if (code >= z2::order(m)) throw DomainError("Z_2 code out of range");
}

ElemZ2 ElemZ2::from_bits(std::span<const int> bits) {
  Code c = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw DomainError("Z_2 coordinate must be 0 or 1");
    c = (c << 1) | static_cast<Code>(b);
  }
  return ElemZ2(static_cast<int>(bits.size()), c);
}

std::vector<int> ElemZ2::bits() const {
  std::vector<int> out(static_cast<std::size_t>(m_));
  for (int k = 0; k < m_; ++k) out[k] = static_cast<int>((code_ >> (m_ - 1 - k)) & 1u);
  return out;
}

std::string ElemZ2::str() const { return z2_string(code_, m_); }

ElemZ2 operator+(const ElemZ2& a, const ElemZ2& b) {
  if (a.m_ != b.m_) throw DomainError("Z_2 dimension mismatch");
  return ElemZ2(a.m_, a.code_ ^ b.code_);
}

ElemZ4::ElemZ4(int n, Code code) : n_(n), code_(code) {
  check_z4_dim(n);
  if (code >= z4::order(n)) throw DomainError("Z_4 code out of range");
}

ElemZ4 ElemZ4::from_digits(std::span<const int> digits) {
  Code c = 0;
  for (int d : digits) {
    if (d < 0 || d > 3) throw DomainError("Z_4 coordinate must be in {0,1,2,3}");
    c = (c << 2) | static_cast<Code>(d);
  }
  return ElemZ4(static_cast<int>(digits.size()), c);
}

std::vector<int> ElemZ4::digits() const {
  std::vector<int> out(static_cast<std::size_t>(n_));
  for (int k = 0; k < n_; ++k) out[k] = z4::digit(code_, n_, k);
  return out;
}

std::string ElemZ4::str() const { return z4_string(code_, n_); }

ElemZ4 operator+(const ElemZ4& a, const ElemZ4& b) {
  if (a.n_ != b.n_) throw DomainError("Z_4 dimension mismatch");
  return ElemZ4(a.n_, z4::add(a.code_, b.code_));
}

ElemZ4 operator-(const ElemZ4& a, const ElemZ4& b) {
  if (a.n_ != b.n_) throw DomainError("Z_4 dimension mismatch");
  return ElemZ4(a.n_, z4::sub(a.code_, b.code_));
}

// ---- sets ------------------------------------------------------------------

CodeSet::CodeSet(std::size_t universe, std::vector<Code> members)
    : universe_(universe), members_(std::move(members)), words_((universe + 63) / 64, 0) {
  std::sort(members_.begin(), members_.end());
  for (std::size_t i = 0; i < members_.size(); ++i) {
    Code c = members_[i];
    if (c >= universe_) throw DomainError("set member out of range");
    if (i > 0 && members_[i - 1] == c) throw DomainError("duplicate set member");
    words_[c >> 6] |= std::uint64_t{1} << (c & 63);
  }
}

CodeSet CodeSet::from_predicate_words(std::size_t universe, std::vector<std::uint64_t> words) {
  CodeSet s;
  s.universe_ = universe;
  words.resize((universe + 63) / 64, 0);
  if (universe % 64 != 0 && !words.empty()) words.back() &= (std::uint64_t{1} << (universe % 64)) - 1;
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits != 0) {
      int b = std::countr_zero(bits);
      s.members_.push_back(static_cast<Code>(w * 64 + static_cast<std::size_t>(b)));
      bits &= bits - 1;
    }
  }
  s.words_ = std::move(words);
  return s;
}

Z2Set::Z2Set(int m, std::vector<Code> members) : m_(m) {
  check_z2_dim(m);
  set_ = CodeSet(z2::order(m), std::move(members));
}

Z2Set Z2Set::full(int m) {
  std::vector<Code> all(z2::order(m));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Code>(i);
  return Z2Set(m, std::move(all));
}

Rational Z2Set::density() const { return Rational(static_cast<unsigned long>(size())) * pow2(-m_); }

Z4Set::Z4Set(int n, std::vector<Code> members) : n_(n) {
  check_z4_dim(n);
  set_ = CodeSet(z4::order(n), std::move(members));
}

Z4Set Z4Set::full(int n) {
  std::vector<Code> all(z4::order(n));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Code>(i);
  return Z4Set(n, std::move(all));
}

Rational Z4Set::density() const { return Rational(static_cast<unsigned long>(size())) * pow2(-2 * n_); }

// ---- subgroups -------------------------------------------------------------

std::vector<Code> rref(std::span<const Code> vectors) {
  std::vector<Code> rows;
  for (Code v : vectors) {
    for (Code r : rows) {
      Code lead = std::bit_floor(r);
      if (v & lead) v ^= r;
    }
    if (v == 0) continue;
    Code lead = std::bit_floor(v);
    for (Code& r : rows) {
      if (r & lead) r ^= v;
    }
    rows.push_back(v);
  }
  std::sort(rows.begin(), rows.end(), [](Code a, Code b) { return a > b; });
  return rows;
}

namespace {

// Orthogonal complement in Z_2^m of the span of an RREF basis.
std::vector<Code> complement(int m, std::span<const Code> basis) {
  Code pivot_mask = 0;
  for (Code r : basis) pivot_mask |= std::bit_floor(r);
  std::vector<Code> out;
  for (int f = 0; f < m; ++f) {
    Code fbit = Code{1} << f;
    if (pivot_mask & fbit) continue;
    Code v = fbit;
    for (Code r : basis) {
      if (r & fbit) v |= std::bit_floor(r);
    }
    out.push_back(v);
  }
  return rref(out);
}

}  // namespace

Subgroup2 Subgroup2::span_of(int m, std::span<const Code> generators) {
  check_z2_dim(m);
  Subgroup2 h;
  h.m_ = m;
  for (Code g : generators) {
    if (g >= z2::order(m)) throw DomainError("subgroup generator out of range");
  }
  h.basis_ = rref(generators);
  for (Code r : h.basis_) h.pivots_.push_back(std::countr_zero(std::bit_floor(r)));
  h.annihilator_ = complement(m, h.basis_);
  return h;
}

Subgroup2 Subgroup2::annihilator_of(int m, std::span<const Code> characters) {
  check_z2_dim(m);
  std::vector<Code> chars = rref(characters);
  std::vector<Code> perp = complement(m, chars);
  return span_of(m, perp);
}

Subgroup2 Subgroup2::whole(int m) {
  std::vector<Code> gens;
  for (int k = 0; k < m; ++k) gens.push_back(Code{1} << k);
  return span_of(m, gens);
}

bool Subgroup2::contains(Code x) const {
  for (Code r : annihilator_) {
    if (z2::dot(r, x)) return false;
  }
  return x < z2::order(m_);
}

Code Subgroup2::coords(Code x) const {
  Code c = 0;
  for (int p : pivots_) c = (c << 1) | ((x >> p) & 1u);
  return c;
}

Code Subgroup2::embed(Code c) const {
  Code x = 0;
  int d = dim();
  for (int j = 0; j < d; ++j) {
    if ((c >> (d - 1 - j)) & 1u) x ^= basis_[j];
  }
  return x;
}

Code Subgroup2::coset_min(Code x) const {
  for (std::size_t j = 0; j < basis_.size(); ++j) {
    if ((x >> pivots_[j]) & 1u) x ^= basis_[j];
  }
  return x;
}

Code Subgroup2::least_outside() const {
  if (dim() == m_) throw DomainError("subgroup has no complement element");
  // The smallest non-pivot unit vector reduced by the basis is outside H; the
  // least outside element is the least nonzero coset minimum.
  Code best = 0;
  bool found = false;
  for (int f = 0; f < m_; ++f) {
    Code v = coset_min(Code{1} << f);
    if (v != 0 && (!found || v < best)) {
      best = v;
      found = true;
    }
  }
  return best;
}

std::vector<Code> Subgroup2::members() const {
  std::vector<Code> out(size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = embed(static_cast<Code>(c));
  return out;  // embed preserves order
}

Subgroup2 Subgroup2::kernel_of(Code gamma_coords) const {
  if (gamma_coords == 0) throw DomainError("kernel_of requires a nontrivial character");
  std::vector<Code> gens;
  int d = dim();
  // Basis of gamma^perp in Z_2^d, embedded.
  Subgroup2 inner = annihilator_of(d, std::span<const Code>(&gamma_coords, 1));
  for (Code b : inner.basis()) gens.push_back(embed(b));
  return span_of(m_, gens);
}

bool canonical_less(const Subgroup2& a, const Subgroup2& b) {
  if (a.dim() != b.dim()) return a.dim() < b.dim();
  return a.basis_ < b.basis_;
}

// ---- families ---------------------------------------------------------------

Family::Family(int m) : m_(m), fibres_(z2::order(m), Z2Set(m)) { check_z2_dim(m); }

Family::Family(int m, std::vector<Z2Set> fibres) : m_(m), fibres_(std::move(fibres)) {
  check_z2_dim(m);
  if (fibres_.size() != z2::order(m)) throw DomainError("family must have exactly 2^m fibres");
  for (const auto& f : fibres_) {
    if (f.dim() != m) throw DomainError("fibre dimension mismatch");
    total_ += f.size();
  }
}

Rational Family::density_fn(Code h) const { return fibres_[h].density(); }

Rational Family::density() const { return Rational(static_cast<unsigned long>(total_)) * pow2(-2 * m_); }

ElemZ4 section_t(const ElemZ4& y) {
  if (!y.in_image_of_two()) throw DomainError("section_t: element " + y.str() + " has an odd digit");
  return ElemZ4(y.dim(), y.code() >> 1);
}

Family fibre_decompose(const Z4Set& a) {
  int n = a.dim();
  std::vector<std::vector<Code>> members(z2::order(n));
  for (Code x : a.members()) {
    members[z4::parity_bits(x, n)].push_back(z4::high_bits(x, n));
  }
  std::vector<Z2Set> fibres;
  fibres.reserve(members.size());
  for (auto& m : members) fibres.emplace_back(n, std::move(m));
  return Family(n, std::move(fibres));
}

Z4Set reconstruct(const Family& family) {
  int m = family.dim();
  check_z4_dim(m);
  std::vector<Code> out;
  for (Code h = 0; h < family.order(); ++h) {
    for (Code e : family.fibre(h).members()) out.push_back(z4::compose(h, e, m));
  }
  return Z4Set(m, std::move(out));
}

Subgroup2 subgroup_from_character(const ElemZ2& gamma) {
  if (gamma.code() == 0) throw DomainError("subgroup_from_character: gamma must be nonzero");
  Code g = gamma.code();
  return Subgroup2::annihilator_of(gamma.dim(), std::span<const Code>(&g, 1));
}

std::vector<Subgroup2> enumerate_subgroups(int m) {
  if (m < 0 || m > caps().subgroup_m) {
    throw DomainError("enumerate_subgroups: m=" + std::to_string(m) + " exceeds cap " +
                      std::to_string(caps().subgroup_m));
  }
  std::vector<Subgroup2> out;
  // Every RREF basis: choose pivot bits, then free entries at lower non-pivot bits.
  for (Code pivots = 0; pivots < z2::order(m); ++pivots) {
    std::vector<int> piv;
    for (int b = m - 1; b >= 0; --b) {
      if ((pivots >> b) & 1u) piv.push_back(b);
    }
    std::vector<std::vector<int>> free_positions(piv.size());
    std::size_t nfree = 0;
    for (std::size_t j = 0; j < piv.size(); ++j) {
      for (int b = piv[j] - 1; b >= 0; --b) {
        if (!((pivots >> b) & 1u)) free_positions[j].push_back(b);
      }
      nfree += free_positions[j].size();
    }
    for (std::uint64_t fill = 0; fill < (std::uint64_t{1} << nfree); ++fill) {
      std::vector<Code> rows;
      std::size_t bit = 0;
      for (std::size_t j = 0; j < piv.size(); ++j) {
        Code r = Code{1} << piv[j];
        for (int b : free_positions[j]) {
          if ((fill >> bit++) & 1u) r |= Code{1} << b;
        }
        rows.push_back(r);
      }
      out.push_back(Subgroup2::span_of(m, rows));
    }
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

// ---- text formats -----------------------------------------------------------

namespace {

std::vector<std::string> content_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

int parse_header_dim(const std::string& header, const std::string& prefix) {
  if (header.rfind(prefix, 0) != 0) throw DomainError("bad header: '" + header + "'");
  std::string rest = header.substr(prefix.size());
  if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos) {
    throw DomainError("bad header dimension: '" + header + "'");
  }
  return std::stoi(rest);
}

// The trivial group's one element is written "." so that its line survives.
std::string file_token(const std::string& digits) { return digits.empty() ? "." : digits; }

Code parse_digits(const std::string& s, int dim, int base) {
  if (dim == 0 && s == ".") return 0;
  if (static_cast<int>(s.size()) != dim) {
    throw DomainError("element '" + s + "' has " + std::to_string(s.size()) + " digits, expected " +
                      std::to_string(dim));
  }
  Code c = 0;
  for (char ch : s) {
    int d = ch - '0';
    if (d < 0 || d >= base) throw DomainError("invalid digit in element '" + s + "'");
    c = c * static_cast<Code>(base) + static_cast<Code>(d);
  }
  return c;
}

std::vector<Code> parse_member_lines(const std::vector<std::string>& lines, int dim, int base) {
  std::vector<Code> members;
  std::vector<bool> seen(base == 2 ? z2::order(dim) : z4::order(dim), false);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    Code c = parse_digits(lines[i], dim, base);
    if (seen[c]) throw DomainError("duplicate element line '" + lines[i] + "'");
    seen[c] = true;
    members.push_back(c);
  }
  return members;
}

}  // namespace

AnySet parse_set(const std::string& text) {
  auto lines = content_lines(text);
  if (lines.empty()) throw DomainError("empty set file");
  if (lines[0].rfind("z4 ", 0) == 0) {
    int n = parse_header_dim(lines[0], "z4 n=");
    check_z4_dim(n);
    return Z4Set(n, parse_member_lines(lines, n, 4));
  }
  if (lines[0].rfind("z2 ", 0) == 0) {
    int m = parse_header_dim(lines[0], "z2 m=");
    check_z2_dim(m);
    return Z2Set(m, parse_member_lines(lines, m, 2));
  }
  throw DomainError("set file must start with 'z4 n=<n>' or 'z2 m=<m>'");
}

std::string format_set(const Z4Set& set) {
  std::string out = "z4 n=" + std::to_string(set.dim()) + "\n";
  for (Code c : set.members()) out += file_token(z4_string(c, set.dim())) + "\n";
  return out;
}

std::string format_set(const Z2Set& set) {
  std::string out = "z2 m=" + std::to_string(set.dim()) + "\n";
  for (Code c : set.members()) out += file_token(z2_string(c, set.dim())) + "\n";
  return out;
}

Family parse_family(const std::string& text) {
  auto lines = content_lines(text);
  if (lines.empty()) throw DomainError("empty family file");
  int m = parse_header_dim(lines[0], "family m=");
  check_z2_dim(m);
  std::vector<std::vector<Code>> members(z2::order(m));
  std::vector<bool> seen(z2::order(m), false);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    auto colon = line.find(':');
    if (colon == std::string::npos) throw DomainError("family line missing ':': '" + line + "'");
    Code h = parse_digits(line.substr(0, colon), m, 2);
    if (seen[h]) throw DomainError("duplicate fibre index '" + line.substr(0, colon) + "'");
    seen[h] = true;
    std::istringstream rest(line.substr(colon + 1));
    std::string tok;
    while (rest >> tok) members[h].push_back(parse_digits(tok, m, 2));
  }
  std::vector<Z2Set> fibres;
  for (auto& mm : members) fibres.emplace_back(m, std::move(mm));
  return Family(m, std::move(fibres));
}

std::string format_family(const Family& family) {
  int m = family.dim();
  std::string out = "family m=" + std::to_string(m) + "\n";
  for (Code h = 0; h < family.order(); ++h) {
    const auto& f = family.fibre(h);
    if (f.empty()) continue;
    out += file_token(z2_string(h, m)) + ":";
    for (Code e : f.members()) out += " " + file_token(z2_string(e, m));
    out += "\n";
  }
  return out;
}

}  // namespace rothz4
