#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "rothz4/errors.hpp"
#include "rothz4/group.hpp"
#include "rothz4/json.hpp"
#include "rothz4/random.hpp"

using namespace rothz4;

TEST_CASE("digit encodings are lexicographic") {
  for (int n = 1; n <= 4; ++n) {
    auto vecs = oracle::all_vectors(n, 4);
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      CHECK(ElemZ4::from_digits(vecs[i]).code() == i);
      CHECK(ElemZ4(n, static_cast<Code>(i)).digits() == vecs[i]);
    }
  }
  for (int m = 1; m <= 6; ++m) {
    auto vecs = oracle::all_vectors(m, 2);
    for (std::size_t i = 0; i < vecs.size(); ++i) CHECK(ElemZ2::from_bits(vecs[i]).code() == i);
  }
}

TEST_CASE("Z_4 arithmetic matches digitwise arithmetic") {
  for (int n = 1; n <= 3; ++n) {
    auto vecs = oracle::all_vectors(n, 4);
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      for (std::size_t j = 0; j < vecs.size(); ++j) {
        ElemZ4 a(n, static_cast<Code>(i)), b(n, static_cast<Code>(j));
        CHECK((a + b).digits() == oracle::add(vecs[i], vecs[j], 4));
        CHECK((a - b).digits() == oracle::add(vecs[i], oracle::scale(vecs[j], -1, 4), 4));
      }
      CHECK(ElemZ4(n, static_cast<Code>(i)).doubled().digits() == oracle::scale(vecs[i], 2, 4));
    }
  }
}

TEST_CASE("doubling has image and kernel equal to the even-digit subgroup") {
  for (int n = 1; n <= 4; ++n) {
    std::vector<Code> image, kernel, even;
    for (Code x = 0; x < z4::order(n); ++x) {
      image.push_back(z4::twice(x));
      if (z4::twice(x) == 0) kernel.push_back(x);
      if (ElemZ4(n, x).in_image_of_two()) even.push_back(x);
    }
    std::sort(image.begin(), image.end());
    image.erase(std::unique(image.begin(), image.end()), image.end());
    CHECK(image == even);
    CHECK(kernel == even);
    CHECK(even.size() == (std::size_t{1} << n));
  }
}

TEST_CASE("parity and high bits recompose") {
  for (int n = 0; n <= 5; ++n) {
    for (Code x = 0; x < z4::order(n); ++x) {
      CHECK(z4::compose(z4::parity_bits(x, n), z4::high_bits(x, n), n) == x);
    }
  }
}

TEST_CASE("subgroup counts match Gaussian binomials") {
  for (int m = 0; m <= 5; ++m) {
    auto subs = enumerate_subgroups(m);
    std::vector<std::size_t> by_dim(m + 1, 0);
    for (const auto& s : subs) ++by_dim[s.dim()];
    for (int k = 0; k <= m; ++k) CHECK(by_dim[k] == oracle::gaussian_binomial(m, k));
    CHECK(std::is_sorted(subs.begin(), subs.end(), [](const Subgroup2& a, const Subgroup2& b) {
      return canonical_less(a, b);
    }));
  }
}

TEST_CASE("subgroup invariants on random spans") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 6;
    std::vector<Code> gens;
    std::uniform_int_distribution<Code> pick(0, static_cast<Code>(z2::order(m) - 1));
    for (int i = 0; i < trial % 4; ++i) gens.push_back(pick(rng));
    Subgroup2 h = Subgroup2::span_of(m, gens);
    CHECK(static_cast<int>(h.basis().size() + h.annihilator().size()) == m);
    for (Code b : h.basis()) {
      for (Code r : h.annihilator()) CHECK(z2::dot(b, r) == 0);
    }
    auto members = h.members();
    CHECK(members.size() == h.size());
    for (Code x = 0; x < z2::order(m); ++x) {
      bool inside = std::binary_search(members.begin(), members.end(), x);
      bool by_chars = std::all_of(h.annihilator().begin(), h.annihilator().end(),
                                  [&](Code r) { return z2::dot(r, x) == 0; });
      CHECK(h.contains(x) == inside);
      CHECK(inside == by_chars);
      if (inside) CHECK(h.embed(h.coords(x)) == x);
      Code rep = h.coset_min(x);
      CHECK(h.contains(rep ^ x));
      for (Code y : members) CHECK(rep <= (x ^ y));
    }
    // Coordinates preserve order.
    for (std::size_t i = 1; i < members.size(); ++i) CHECK(h.coords(members[i - 1]) < h.coords(members[i]));
    CHECK(Subgroup2::annihilator_of(m, h.annihilator()) == h);
    CHECK(subgroup_from_json(subgroup_json(h)) == h);
  }
}

TEST_CASE("fibre decomposition round-trips and preserves density") {
  Rng rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = trial % 5;
    Z4Set a = random_z4set(n, 0.4, rng);
    Family f = fibre_decompose(a);
    CHECK(f.dim() == n);
    CHECK(f.density() == a.density());
    CHECK(reconstruct(f) == a);
    for (Code h = 0; h < f.order(); ++h) CHECK(f.density_fn(h) * static_cast<long>(f.order()) == static_cast<long>(f.fibre_size(h)));
  }
}

TEST_CASE("section t satisfies 2t = y") {
  for (int n = 1; n <= 3; ++n) {
    for (Code y = 0; y < z4::order(n); ++y) {
      ElemZ4 e(n, y);
      if (!e.in_image_of_two()) continue;
      CHECK(section_t(e).doubled() == e);
    }
  }
}

TEST_CASE("file formats round-trip") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    Z4Set a = random_z4set(trial % 4, 0.5, rng);
    CHECK(std::get<Z4Set>(parse_set(format_set(a))) == a);
    CHECK(z4set_from_json(z4set_json(a)) == a);
    Z2Set b = random_z2set(trial % 6, 0.5, rng);
    CHECK(std::get<Z2Set>(parse_set(format_set(b))) == b);
    CHECK(z2set_from_json(z2set_json(b)) == b);
    Family f = random_family(trial % 4, rng);
    CHECK(parse_family(format_family(f)) == f);
    CHECK(family_from_json(family_json(f)) == f);
  }
}

TEST_CASE("malformed files are domain errors") {
  CHECK_THROWS_AS(parse_set(""), DomainError);
  CHECK_THROWS_AS(parse_set("z4 n=2\n0\n"), DomainError);
  CHECK_THROWS_AS(parse_set("z4 n=2\n04\n"), DomainError);
  CHECK_THROWS_AS(parse_set("z3 n=2\n00\n"), DomainError);
  CHECK_THROWS_AS(parse_family("family m=1\n0: 1\n0: 0\n"), DomainError);
  CHECK_THROWS_AS(parse_family("family m=1\n0 1\n"), DomainError);
}

TEST_CASE("rationals serialize in lowest terms") {
  for (long p = -6; p <= 6; ++p) {
    for (long q = 1; q <= 6; ++q) {
      Rational x = make_rational(p, q);
      CHECK(rational_from_json(rational_json(x)) == x);
    }
  }
  CHECK_THROWS_AS(rational_from_json(Json::parse("[2, 4]")), DomainError);
  Rational big = pow2(100) / 3;
  CHECK(rational_from_json(rational_json(big)) == big);
}
