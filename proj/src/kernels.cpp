#include "rothz4/kernels.hpp"

#include <omp.h>

#include <atomic>
#include <limits>

#include "rothz4/errors.hpp"

namespace rothz4 {

namespace {

void check_pow2(std::size_t n) {
  if (n == 0 || (n & (n - 1)) != 0) throw DomainError("transform length must be a power of two");
}

// (-i)^k for k mod 4, applied to a Gaussian integer.
inline GaussInt rotate_neg_i(GaussInt z, unsigned k) {
  switch (k & 3u) {
    case 0: return z;
    case 1: return {z.im, -z.re};   // z * (-i)
    case 2: return {-z.re, -z.im};
    default: return {-z.im, z.re};  // z * i
  }
}

inline void radix4(GaussInt* p0, GaussInt* p1, GaussInt* p2, GaussInt* p3) {
  GaussInt a[4] = {*p0, *p1, *p2, *p3};
  GaussInt out[4];
  for (unsigned g = 0; g < 4; ++g) {
    GaussInt s{0, 0};
    for (unsigned j = 0; j < 4; ++j) {
      GaussInt t = rotate_neg_i(a[j], g * j);
      s.re += t.re;
      s.im += t.im;
    }
    out[g] = s;
  }
  *p0 = out[0];
  *p1 = out[1];
  *p2 = out[2];
  *p3 = out[3];
}

std::vector<GaussInt> indicator_array(const Z4Set& a) {
  std::vector<GaussInt> v(z4::order(a.dim()));
  for (Code x : a.members()) v[x].re = 1;
  return v;
}

// Returns the first d (in code order) making (x, d) a proper progression in A.
std::optional<Code> first_d_for(const Z4Set& a, Code x) {
  const auto size = static_cast<Code>(z4::order(a.dim()));
  for (Code d = 0; d < size; ++d) {
    if (z4::twice(d) == 0) continue;
    Code y = z4::add(x, d);
    if (!a.contains(y)) continue;
    if (a.contains(z4::add(y, d))) return d;
  }
  return std::nullopt;
}

std::uint64_t count_from(const Z4Set& a, Code x) {
  const auto size = static_cast<Code>(z4::order(a.dim()));
  std::uint64_t c = 0;
  for (Code d = 0; d < size; ++d) {
    Code y = z4::add(x, d);
    if (a.contains(y) && a.contains(z4::add(y, d))) ++c;
  }
  return c;
}

std::uint64_t quadruples_at(const Family& f, Code h) {
  auto members = f.fibre(h).members();
  std::uint64_t c = 0;
  for (Code a : members) {
    for (Code b : members) c += f.fibre_size(a ^ b ^ h);
  }
  return c;
}

std::uint64_t energy_row(std::span<const Code> members, const Z2Set& b, std::size_t i) {
  // For fixed a, count (b, c, d) with a+b+c = d; i.e. sum over b, c of [a^b^c in B].
  std::uint64_t c = 0;
  Code a = members[i];
  for (Code x : members) {
    for (Code y : members) c += b.contains(a ^ x ^ y) ? 1 : 0;
  }
  return c;
}

}  // namespace

namespace serial {

void wht(std::span<std::int64_t> v) {
  check_pow2(v.size());
  for (std::size_t len = 1; len < v.size(); len <<= 1) {
    for (std::size_t i = 0; i < v.size(); i += 2 * len) {
      for (std::size_t j = i; j < i + len; ++j) {
        std::int64_t a = v[j], b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
}

std::vector<GaussInt> dft4(const Z4Set& a) {
  auto v = indicator_array(a);
  const std::size_t size = v.size();
  for (std::size_t stride = 1; stride < size; stride <<= 2) {
    for (std::size_t base = 0; base < size; base += 4 * stride) {
      for (std::size_t j = base; j < base + stride; ++j) {
        radix4(&v[j], &v[j + stride], &v[j + 2 * stride], &v[j + 3 * stride]);
      }
    }
  }
  return v;
}

std::uint64_t progression_count(const Z4Set& a) {
  std::uint64_t total = 0;
  for (Code x : a.members()) total += count_from(a, x);
  return total;
}

std::uint64_t quadruple_count(const Family& f, std::span<const char> include) {
  std::uint64_t total = 0;
  for (Code h = 0; h < f.order(); ++h) {
    if (!include.empty() && !include[h]) continue;
    total += quadruples_at(f, h);
  }
  return total;
}

std::uint64_t energy_count(const Z2Set& b) {
  std::uint64_t total = 0;
  auto members = b.members();
  for (std::size_t i = 0; i < members.size(); ++i) total += energy_row(members, b, i);
  return total;
}

std::optional<Witness> first_proper_progression(const Z4Set& a) {
  for (Code x : a.members()) {
    if (auto d = first_d_for(a, x)) return Witness{x, *d};
  }
  return std::nullopt;
}

}  // namespace serial

namespace parallel {

void wht(std::span<std::int64_t> v) {
  check_pow2(v.size());
  const auto half = static_cast<std::int64_t>(v.size() / 2);
  for (std::size_t len = 1; len < v.size(); len <<= 1) {
    // One butterfly per pair index p; the pair is (j, j+len).
#pragma omp parallel for schedule(static) if (half >= 4096)
    for (std::int64_t p = 0; p < half; ++p) {
      std::size_t up = static_cast<std::size_t>(p);
      std::size_t j = (up / len) * 2 * len + (up % len);
      std::int64_t a = v[j], b = v[j + len];
      v[j] = a + b;
      v[j + len] = a - b;
    }
  }
}

std::vector<GaussInt> dft4(const Z4Set& a) {
  auto v = indicator_array(a);
  const std::size_t size = v.size();
  const auto quarter = static_cast<std::int64_t>(size / 4);
  for (std::size_t stride = 1; stride < size; stride <<= 2) {
#pragma omp parallel for schedule(static) if (quarter >= 1024)
    for (std::int64_t p = 0; p < quarter; ++p) {
      std::size_t up = static_cast<std::size_t>(p);
      std::size_t j = (up / stride) * 4 * stride + (up % stride);
      radix4(&v[j], &v[j + stride], &v[j + 2 * stride], &v[j + 3 * stride]);
    }
  }
  return v;
}

std::uint64_t progression_count(const Z4Set& a) {
  auto members = a.members();
  const auto count = static_cast<std::int64_t>(members.size());
  std::uint64_t total = 0;
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : total)
  for (std::int64_t i = 0; i < count; ++i) total += count_from(a, members[static_cast<std::size_t>(i)]);
  return total;
}

std::uint64_t quadruple_count(const Family& f, std::span<const char> include) {
  const auto order = static_cast<std::int64_t>(f.order());
  std::uint64_t total = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : total)
  for (std::int64_t h = 0; h < order; ++h) {
    if (!include.empty() && !include[static_cast<std::size_t>(h)]) continue;
    total += quadruples_at(f, static_cast<Code>(h));
  }
  return total;
}

// Representation counts r(s) = #{(a,b) : a+b = s}, then sum r(s)^2.
std::uint64_t energy_count(const Z2Set& b) {
  auto members = b.members();
  const auto order = static_cast<std::int64_t>(z2::order(b.dim()));
  std::vector<std::uint64_t> reps(static_cast<std::size_t>(order), 0);
#pragma omp parallel for schedule(static) if (order >= 1024)
  for (std::int64_t s = 0; s < order; ++s) {
    std::uint64_t r = 0;
    for (Code a : members) r += b.contains(a ^ static_cast<Code>(s)) ? 1 : 0;
    reps[static_cast<std::size_t>(s)] = r;
  }
  std::uint64_t total = 0;
  for (std::uint64_t r : reps) total += r * r;
  return total;
}

std::optional<Witness> first_proper_progression(const Z4Set& a) {
  auto members = a.members();
  const auto count = static_cast<std::int64_t>(members.size());
  std::atomic<std::int64_t> best{std::numeric_limits<std::int64_t>::max()};
  std::vector<Code> ds(members.size(), 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < count; ++i) {
    if (i > best.load(std::memory_order_relaxed)) continue;
    if (auto d = first_d_for(a, members[static_cast<std::size_t>(i)])) {
      ds[static_cast<std::size_t>(i)] = *d;
      std::int64_t cur = best.load();
      while (i < cur && !best.compare_exchange_weak(cur, i)) {
      }
    }
  }
  std::int64_t b = best.load();
  if (b == std::numeric_limits<std::int64_t>::max()) return std::nullopt;
  return Witness{members[static_cast<std::size_t>(b)], ds[static_cast<std::size_t>(b)]};
}

}  // namespace parallel

std::vector<std::int64_t> indicator_wht(const Z2Set& b) {
  std::vector<std::int64_t> v(z2::order(b.dim()), 0);
  for (Code x : b.members()) v[x] = 1;
  parallel::wht(v);
  return v;
}

}  // namespace rothz4
