#include <doctest.h>

#include "rothz4/constructions.hpp"
#include "rothz4/counting.hpp"
#include "rothz4/engine.hpp"
#include "rothz4/errors.hpp"
#include "rothz4/random.hpp"

using namespace rothz4;

namespace {

// Five fibres, each an index-2 subgroup chosen so that h + H_h meets the
// support only in h: the coset averages fall below alpha/2.
Family spread_family() {
  return family_from_json(Json::parse(R"({"m":4,"fibres":{
    "0000":["0000","0011","0101","0110","1001","1010","1100","1111"],
    "0001":["0000","0010","0100","0110","1000","1010","1100","1110"],
    "0010":["0000","0001","0100","0101","1000","1001","1100","1101"],
    "0100":["0000","0001","0010","0011","1000","1001","1010","1011"],
    "1000":["0000","0001","0010","0011","0100","0101","0110","0111"]}})"));
}

std::vector<Z4Set> corpus() {
  std::vector<Z4Set> out;
  Rng rng(2024);
  while (out.size() < 30) {
    const int n = 1 + static_cast<int>(out.size() % 3);
    Z4Set a = random_z4set(n, 0.2 + 0.1 * static_cast<double>(out.size() % 6), rng);
    if (!a.empty()) out.push_back(a);
  }
  out.push_back(a0());
  return out;
}

}  // namespace

TEST_CASE("solve_l returns the largest admissible grid point") {
  for (long den : {2, 3, 5, 16, 1000, 1 << 20}) {
    for (Rational cs : {Rational(1, 4), Rational(1), Rational(4)}) {
      const Rational alpha = make_rational(1, den);
      const unsigned bits = 8;
      Rational l = solve_l(cs, alpha, bits);
      CHECK(l >= 1);
      const Rational rhs = ln_lower(1 / alpha, bits) / 2;
      auto ok = [&](const Rational& x) {
        Rational ln = ln_upper(x, bits);
        return cs * x * x * x * ln * ln <= rhs;
      };
      CHECK(ok(l));
      CHECK_FALSE(ok(l + pow2(-static_cast<long>(bits))));
    }
  }
  // L grows as alpha shrinks.
  CHECK(solve_l(1, make_rational(1, 1 << 20), 8) > solve_l(1, make_rational(1, 4), 8));
}

TEST_CASE("config round-trips and rejects unknown keys") {
  EngineConfig cfg;
  cfg.c_s = Rational(1, 4);
  cfg.l_override = Rational(12);
  cfg.thresholds.asm1 = Rational(3, 7);
  EngineConfig back = EngineConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(EngineConfig::from_json(Json::parse(R"({"C_S":"1/4"})")).c_s == Rational(1, 4));
  CHECK_THROWS_AS(EngineConfig::from_json(Json::parse(R"({"C_s":1})")), DomainError);
  CHECK_THROWS_AS(EngineConfig::from_json(Json::parse(R"({"C_S":0})")), DomainError);
  CHECK_THROWS_AS(EngineConfig::from_json(Json::parse(R"({"L_override":"1/2"})")), DomainError);
}

TEST_CASE("drivers are sound on the regression corpus") {
  for (const Z4Set& a : corpus()) {
    const Rational lambda = lambda_naive(a).lambda;
    for (Rational cs : {Rational(1, 4), Rational(1), Rational(4)}) {
      EngineConfig cfg;
      cfg.c_s = cs;
      DriverResult w = weighted_driver(a, cfg);
      DriverResult r = rml_driver(a, cfg);
      CHECK(w.trace.events().back()["status"] == "floor");
      CHECK(r.trace.events().back()["status"] == "floor");
      CHECK(w.global_floor <= lambda);
      CHECK(r.global_floor <= lambda);
      CHECK(w.global_floor > 0);
      CHECK(r.global_floor > 0);
    }
  }
}

TEST_CASE("small mean-square branch under an L override") {
  int increments = 0, floors = 0;
  for (const Z4Set& a : corpus()) {
    for (long l : {16, 64, 1000}) {
      EngineConfig cfg;
      cfg.l_override = Rational(l);
      DriverResult w = weighted_driver(a, cfg);
      CHECK(w.global_floor <= lambda_naive(a).lambda);
      for (const auto& e : w.trace.events()) {
        if (e["event"] != "small_ms") continue;
        const std::string branch = e["branch"];
        (branch == "floor" ? floors : increments) += 1;
      }
      // Densities strictly increase along the chain.
      Rational prev = 0;
      for (const auto& e : w.trace.events()) {
        if (e["event"] != "step") continue;
        Rational alpha = rational_from_json(e["alpha"]);
        CHECK(alpha > prev);
        prev = alpha;
      }
    }
  }
  CHECK(floors > 0);
  CHECK(increments > 0);
}

TEST_CASE("traces replay and reject tampering") {
  for (const char* driver : {"rml", "weighted"}) {
    std::size_t idx = 0;
    for (const Z4Set& a : corpus()) {
      if (idx++ % 5 != 0) continue;
      EngineConfig cfg;
      if (idx % 2 == 0) cfg.l_override = Rational(64);
      DriverResult r = std::string(driver) == "rml" ? rml_driver(a, cfg) : weighted_driver(a, cfg);
      const std::string text = r.trace.jsonl();
      VerifyReport ok = verify_trace(text);
      CHECK_MESSAGE(ok.ok, ok.message);

      // Any edit anywhere is caught by the replay or by a certificate.
      std::string bad = text;
      auto pos = bad.find("\"alpha\":[");
      if (pos != std::string::npos) {
        bad[pos + 9] = bad[pos + 9] == '1' ? '2' : '1';
        CHECK_FALSE(verify_trace(bad).ok);
      }
    }
  }
  CHECK_FALSE(verify_trace("").ok);
  CHECK_FALSE(verify_trace("{\"schema\":\"other\"}\n").ok);
}

TEST_CASE("a certificate integer edit names the failing step") {
  EngineConfig cfg;
  cfg.l_override = Rational(64);
  // A dense set whose first step increments.
  for (const Z4Set& a : corpus()) {
    DriverResult r = weighted_driver(a, cfg);
    std::string text = r.trace.jsonl();
    auto pos = text.find("\"raw_count\":\"");
    if (pos == std::string::npos) continue;
    pos += 13;
    text[pos] = text[pos] == '9' ? '8' : static_cast<char>(text[pos] + 1);
    VerifyReport rep = verify_trace(text);
    CHECK_FALSE(rep.ok);
    CHECK(rep.message.find("step") != std::string::npos);
    return;
  }
  FAIL("no trace carried a certificate");
}

TEST_CASE("high-energy step: aligned fibres take the main-term branch") {
  // Every fibre is a full subgroup coset: energy equals f^3.
  std::vector<Z2Set> fibres(8, Z2Set(3));
  Subgroup2 h = Subgroup2::span_of(3, std::vector<Code>{1, 2});
  for (Code x : {0u, 3u, 5u}) fibres[x] = Z2Set(3, h.members());
  Family f(3, fibres);
  const Rational alpha = f.density();
  const Rational k = Rational(1, 2) / alpha;
  FloorOutcome o = high_energy_step(f, Z2Set(3, {0, 3, 5}), 1, k, 64, EngineConfig{});
  REQUIRE(o.floor);
  CHECK(*o.floor > 0);
  CHECK(*o.floor <= lambda_family(f).lambda);
  bool s0 = false;
  for (const auto& e : o.trace.events()) s0 = s0 || (e["event"] == "high_energy" && e["case"] == "S0");
  CHECK(s0);
}

TEST_CASE("high-energy step: spread fibres take the grouping branch") {
  Family f = spread_family();
  const Rational alpha = f.density();
  CHECK(alpha == Rational(5, 32));
  FloorOutcome o = high_energy_step(f, Z2Set(4, {0, 1, 2, 4, 8}), 1, Rational(1, 2) / alpha, 64, EngineConfig{});
  REQUIRE(o.floor);
  CHECK(*o.floor == Rational(1, 1024));
  CHECK(*o.floor <= lambda_family(f).lambda);
  int certificates = 0;
  for (const auto& e : o.trace.events()) {
    if (e["event"] != "increment") continue;
    ++certificates;
    CHECK_FALSE(check_certificate(certificate_from_json(e["certificate"]), family_from_json(e["before_family"]),
                                  family_from_json(e["after_family"])));
  }
  CHECK(certificates == 2);
}

TEST_CASE("high-energy step checks its hypotheses") {
  Family f = spread_family();
  const Rational alpha = f.density();
  // f(h) = 1/2 lies outside [K alpha / 2, K alpha] for K = 1.
  CHECK_THROWS_AS(high_energy_step(f, Z2Set(4, {0}), 1, 1, 64, EngineConfig{}), DomainError);
  // Energy 1/8 < c f^3 for c = 2.
  CHECK_THROWS_AS(high_energy_step(f, Z2Set(4, {0}), 2, Rational(1, 2) / alpha, 64, EngineConfig{}), DomainError);
  FloorOutcome empty = high_energy_step(f, Z2Set(4), 1, 1, 1, EngineConfig{});
  CHECK(*empty.floor == 0);
}

TEST_CASE("drivers reject the empty set and honour max_steps") {
  CHECK_THROWS_AS(rml_driver(Z4Set(2), EngineConfig{}), DomainError);
  CHECK_THROWS_AS(weighted_driver(Z4Set(2), EngineConfig{}), DomainError);
  // Under L = 16 the weighted driver increments twice on {03, 12} before
  // reaching its floor, so one step is not enough.
  Z4Set a(2, {ElemZ4::from_digits(std::vector<int>{0, 3}).code(), ElemZ4::from_digits(std::vector<int>{1, 2}).code()});
  EngineConfig cfg;
  cfg.l_override = Rational(16);
  DriverResult full = weighted_driver(a, cfg);
  CHECK(full.steps == 2);
  CHECK(full.trace.events().back()["status"] == "floor");
  cfg.max_steps = 1;
  DriverResult cut = weighted_driver(a, cfg);
  CHECK(cut.steps == 1);
  CHECK(cut.trace.events().back()["status"] == "max_steps");
  CHECK(cut.global_floor == 0);
  CHECK(verify_trace(cut.trace.jsonl()).ok);
}
