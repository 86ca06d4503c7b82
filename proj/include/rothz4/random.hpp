#pragma once

// Seeded generators for sets and families. Each member is kept with
// probability p, drawn from a 64-bit Mersenne twister.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rothz4/group.hpp"

namespace rothz4 {

using Rng = std::mt19937_64;

inline std::vector<Code> random_codes(std::size_t order, double p, Rng& rng) {
  std::bernoulli_distribution keep(p);
  std::vector<Code> out;
  for (Code x = 0; x < order; ++x) {
    if (keep(rng)) out.push_back(x);
  }
  return out;
}

inline Z4Set random_z4set(int n, double p, Rng& rng) { return Z4Set(n, random_codes(z4::order(n), p, rng)); }

inline Z2Set random_z2set(int m, double p, Rng& rng) { return Z2Set(m, random_codes(z2::order(m), p, rng)); }

// Per-fibre densities are themselves random, so K varies across draws.
inline Family random_family(int m, Rng& rng) {
  std::uniform_real_distribution<double> dens(0.0, 1.0);
  std::vector<Z2Set> fibres;
  for (Code h = 0; h < z2::order(m); ++h) fibres.push_back(random_z2set(m, dens(rng), rng));
  return Family(m, std::move(fibres));
}

// Flat family on a random support whose fibre over h is a subgroup of the
// given dimension meeting (support + h) only in 0. Such fibres spread their
// mass away from the other support points, which is what makes the
// mean-square drive take steps. Returns nothing when some h has no such
// subgroup.
inline std::optional<Family> random_spread_family(int m, int dim, double p, Rng& rng) {
  std::vector<Code> support = random_codes(z2::order(m), p, rng);
  if (support.empty()) return std::nullopt;
  std::vector<Subgroup2> pool;
  for (auto& s : enumerate_subgroups(m)) {
    if (s.dim() == dim) pool.push_back(std::move(s));
  }
  std::vector<Z2Set> fibres(z2::order(m), Z2Set(m));
  for (Code h : support) {
    std::vector<const Subgroup2*> good;
    for (const auto& v : pool) {
      bool avoids = true;
      for (Code s : support) avoids = avoids && (s == h || !v.contains(s ^ h));
      if (avoids) good.push_back(&v);
    }
    if (good.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, good.size() - 1);
    fibres[h] = Z2Set(m, good[pick(rng)]->members());
  }
  return Family(m, std::move(fibres));
}

}  // namespace rothz4
