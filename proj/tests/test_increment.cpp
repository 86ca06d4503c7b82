#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "rothz4/errors.hpp"
#include "rothz4/increment.hpp"
#include "rothz4/random.hpp"

using namespace rothz4;

namespace {

RealFn2 random_fn(int m, Rng& rng) {
  std::uniform_int_distribution<long> num(0, 12), den(1, 5);
  RealFn2 f(m);
  for (auto& v : f.values) v = make_rational(num(rng), den(rng));
  return f;
}

// Largest average of f over a coset of {gamma}^perp, straight from the definition.
Rational best_half_average(const RealFn2& f, Code gamma) {
  Rational s[2] = {0, 0};
  for (Code x = 0; x < f.values.size(); ++x) s[z2::dot(gamma, x)] += f.values[x];
  Rational half = pow2(-(f.m - 1));
  return std::max(Rational(s[0] * half), Rational(s[1] * half));
}

Rational oracle_mean_fibre_coefficient(const Family& f, Code gamma) {
  Rational sum = 0;
  for (Code h = 0; h < f.order(); ++h) {
    Rational c = 0;
    for (Code a : f.fibre(h).members()) c += z2::dot(gamma, a) ? -1 : 1;
    sum += abs_q(c) * pow2(-f.dim());
  }
  return sum * pow2(-f.dim());
}

Family flat_family(int m, std::size_t fibre_size, const std::vector<Code>& support, Rng& rng) {
  std::vector<Z2Set> fibres(z2::order(m), Z2Set(m));
  for (Code h : support) {
    std::vector<Code> all(z2::order(m));
    for (Code x = 0; x < all.size(); ++x) all[x] = x;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(fibre_size);
    std::sort(all.begin(), all.end());
    fibres[h] = Z2Set(m, all);
  }
  return Family(m, std::move(fibres));
}

BigInt recount(const Family& f) { return BigInt(static_cast<unsigned long>(oracle::quadruple_count(f))); }

}  // namespace

TEST_CASE("coset maximum equals mean plus |hat f(gamma)|") {
  Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 6;
    RealFn2 f = random_fn(m, rng);
    std::uniform_int_distribution<Code> pick(1, static_cast<Code>(z2::order(m) - 1));
    const Code gamma = pick(rng);
    LinfResult r = linf_increment(f, gamma);
    CHECK(r.value == f.mean() + abs_q(wht(f).coeffs[gamma]));
    CHECK(r.value == best_half_average(f, gamma));
    CHECK(r.subgroup.index_log2() == 1);
    for (Code x : r.subgroup.members()) CHECK(z2::dot(gamma, x) == 0);
    CHECK((r.coset == 0 || !r.subgroup.contains(r.coset)));
  }
}

TEST_CASE("increment certificates re-verify against an independent recount") {
  Rng rng(52);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 4;
    Family f = random_family(m, rng);
    if (f.density() == 0) continue;
    std::uniform_int_distribution<Code> pick(1, static_cast<Code>(f.order() - 1));
    const Code gamma = pick(rng);
    for (bool density : {false, true}) {
      IncrementStep s = density ? density_fn_increment(f, gamma) : fibre_increment(f, gamma);
      const auto& c = s.certificate;
      CHECK_FALSE(check_certificate(c, f, s.family));
      CHECK(s.family.density() >= f.density() + c.claimed_gain);
      if (density) {
        CHECK(c.claimed_gain == abs_q(wht(density_function(f)).coeffs[gamma]));
      } else {
        CHECK(c.claimed_gain == oracle_mean_fibre_coefficient(f, gamma));
      }
      // |H|^4 Lambda(F) >= |H'|^4 Lambda(F') * 2^4 / 2^4, i.e. raw counts do not grow.
      CHECK(recount(f) >= recount(s.family));
      CHECK(c.before.raw_count == recount(f));
      CHECK(c.after.raw_count == recount(s.family));
      CHECK(certificate_from_json(certificate_json(c)).claimed_gain == c.claimed_gain);
      ++checked;
    }
  }
  CHECK(checked >= 150);
}

TEST_CASE("tampered certificates are rejected") {
  Rng rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    Family f = random_family(2 + trial % 3, rng);
    if (f.density() == 0) continue;
    IncrementStep s = fibre_increment(f, 1);
    REQUIRE_FALSE(check_certificate(s.certificate, f, s.family));

    auto c = s.certificate;
    c.claimed_gain += 1;
    CHECK(check_certificate(c, f, s.family));

    c = s.certificate;
    c.after.raw_count += 1;
    CHECK(check_certificate(c, f, s.family));

    c = s.certificate;
    c.h1 ^= c.subgroup.least_outside();
    CHECK(check_certificate(c, f, s.family));

    // A member not in the source fibre breaks containment, even with a
    // summary recomputed to match.
    std::vector<Z2Set> fibres = s.family.fibres();
    const auto& cert = s.certificate;
    bool added = false;
    for (Code c = 0; c < fibres.size() && !added; ++c) {
      const Z2Set& source = f.fibre(cert.h1 ^ cert.subgroup.embed(c));
      for (Code x = 0; x < z2::order(fibres[c].dim()); ++x) {
        if (fibres[c].contains(x) || source.contains(cert.subgroup.embed(x) ^ cert.shift_table[c])) continue;
        std::vector<Code> mem(fibres[c].members().begin(), fibres[c].members().end());
        mem.push_back(x);
        std::sort(mem.begin(), mem.end());
        fibres[c] = Z2Set(fibres[c].dim(), mem);
        added = true;
        break;
      }
    }
    if (!added) continue;
    Family grown(s.family.dim(), fibres);
    c = cert;
    c.after = summarize(grown);
    CHECK(check_certificate(c, f, grown));
  }
}

TEST_CASE("large mean-square drive on flat families") {
  Rng rng(54);
  int runs = 0;
  for (int trial = 0; trial < 40 && runs < 20; ++trial) {
    const int m = 2 + trial % 4;
    std::uniform_int_distribution<std::size_t> size(1, z2::order(m));
    std::vector<Code> support = random_codes(z2::order(m), 0.5, rng);
    if (support.empty()) continue;
    Family f = flat_family(m, size(rng), support, rng);
    auto shape = flat_shape(f);
    REQUIRE(shape);
    LargeL2Drive d = large_l2_drive(f);
    const Rational bound = 2 / shape->delta * ln_upper(1 / shape->sigma, 16);
    CHECK(BigInt(static_cast<unsigned long>(d.steps)) <= ceil_q(bound) + 1);
    CHECK(d.chain_floor <= Rational(recount(f)) * pow2(-4 * m));
    for (std::size_t i = 0; i < d.certificates.size(); ++i) {
      CHECK_FALSE(check_certificate(d.certificates[i], d.families[i], d.families[i + 1]));
    }
    ++runs;
  }
  CHECK(runs == 20);
}

TEST_CASE("large mean-square drive steps on spread families") {
  Rng rng(56);
  int runs = 0, stepped = 0;
  for (int trial = 0; trial < 400 && runs < 40; ++trial) {
    const int m = 3 + trial % 3;
    auto f = random_spread_family(m, m - 1 - (trial / 3) % 2, 0.3, rng);
    if (!f) continue;
    auto shape = flat_shape(*f);
    REQUIRE(shape);
    LargeL2Drive d = large_l2_drive(*f);
    const Rational bound = 2 / shape->delta * ln_upper(1 / shape->sigma, 16);
    CHECK(BigInt(static_cast<unsigned long>(d.steps)) <= ceil_q(bound) + 1);
    CHECK(d.chain_floor > 0);
    CHECK(d.chain_floor <= Rational(recount(*f)) * pow2(-4 * m));
    REQUIRE(d.families.size() == d.steps + 1);
    for (std::size_t i = 0; i < d.certificates.size(); ++i) {
      CHECK_FALSE(check_certificate(d.certificates[i], d.families[i], d.families[i + 1]));
      CHECK(recount(d.families[i]) >= recount(d.families[i + 1]));
    }
    stepped += d.steps > 0;
    ++runs;
  }
  CHECK(runs == 40);
  CHECK(stepped > 0);
}

TEST_CASE("large mean-square drive refuses non-flat families") {
  Family f(1, {Z2Set(1, {0}), Z2Set(1, {0, 1})});
  CHECK_THROWS_AS(large_l2_drive(f), DomainError);
}

TEST_CASE("dyadic selection yields a flat subfamily with a valid certificate") {
  Rng rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    Family f = random_family(1 + trial % 4, rng);
    if (f.density() == 0) continue;
    DyadicSelection sel = dyadic_select(f);
    auto shape = flat_shape(sel.subfamily);
    REQUIRE(shape);
    CHECK(shape->delta == sel.trimmed_delta);
    CHECK(sel.trimmed_delta >= sel.delta);
    CHECK(sel.delta == pow2(-(sel.level + 1)));
    CHECK_FALSE(check_certificate(sel.certificate, f, sel.subfamily));
    for (Code h : sel.level_set.members()) {
      CHECK(f.density_fn(h) >= sel.delta);
      CHECK(f.density_fn(h) <= 2 * sel.delta);
    }
    CHECK(recount(f) >= recount(sel.subfamily));
  }
}

TEST_CASE("increments reject the trivial character") {
  Family f(2, {Z2Set(2, {0}), Z2Set(2), Z2Set(2), Z2Set(2)});
  CHECK_THROWS_AS(fibre_increment(f, 0), DomainError);
  CHECK_THROWS_AS(density_fn_increment(f, 0), DomainError);
  CHECK_THROWS_AS(fibre_increment(f, 4), DomainError);
}
