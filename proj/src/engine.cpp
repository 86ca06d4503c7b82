#include "rothz4/engine.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "rothz4/counting.hpp"
#include "rothz4/errors.hpp"
#include "rothz4/harmonic.hpp"
#include "rothz4/kernels.hpp"

namespace rothz4 {

namespace {

using i128 = __int128;

BigInt big(i128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  BigInt r = (BigInt(static_cast<unsigned long>(u >> 64)) << 64) + BigInt(static_cast<unsigned long>(u & ~0ull));
  return neg ? BigInt(-r) : r;
}

Rational q_of(std::size_t v) { return Rational(static_cast<unsigned long>(v)); }

Rational rational_any(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  return rational_from_json(j);
}

Json opt_json(const std::optional<Rational>& v) { return v ? rational_json(*v) : Json(nullptr); }

std::string family_dump(const Family& f) { return family_json(f).dump(); }

// Least t >= 0 with 2^t >= x, for x > 0.
int ceil_log2(const Rational& x) {
  int t = 0;
  while (pow2(t) < x) ++t;
  return t;
}

// Largest d >= 0 with 2^d <= x, or 0 when x < 1.
int floor_log2_clamped(const Rational& x) {
  int d = 0;
  while (pow2(d + 1) <= x) ++d;
  return d;
}

std::vector<char> mask_of(const Z2Set& s) {
  std::vector<char> mask(z2::order(s.dim()), 0);
  for (Code h : s.members()) mask[h] = 1;
  return mask;
}

Rational restricted_lambda(const Family& f, const Z2Set& s) {
  auto mask = mask_of(s);
  return Rational(big(static_cast<i128>(parallel::quadruple_count(f, mask)))) * pow2(-4 * f.dim());
}

// Proof-claimed inequality: a failure is a falsification unless the caller
// has overridden the constants it depends on, in which case it is a flag.
struct Claims {
  bool overridden = false;
  std::vector<std::string>* flags = nullptr;
  std::string dump;

  void require(bool ok, const std::string& what) const {
    if (ok) return;
    if (overridden) {
      flags->push_back(what);
      return;
    }
    throw FalsificationError(what, dump);
  }
};

bool any_override(const EngineConfig& cfg) {
  const auto& t = cfg.thresholds;
  return t.large_fibre || t.small_fibre || t.asm1 || t.asm23;
}

// Sub-step events carry the driver step they belong to.
void append_at_step(Trace& trace, const Trace& sub, std::size_t step) {
  for (Json e : sub.events()) {
    if (!e.contains("step")) e["step"] = step;
    trace.add(std::move(e));
  }
}

void append_drive(Trace& trace, const LargeL2Drive& d, long step) {
  for (std::size_t i = 0; i < d.certificates.size(); ++i) {
    Json e = increment_event("large_l2", d.certificates[i], d.families[i], d.families[i + 1]);
    e["step"] = step;
    trace.add(std::move(e));
  }
  trace.add(Json{{"event", "large_l2_floor"},
                 {"step", step},
                 {"steps", d.steps},
                 {"step_bound", d.step_bound.get_str()},
                 {"final_floor", rational_json(d.final_floor)},
                 {"chain_floor", rational_json(d.chain_floor)},
                 {"lambda", rational_json(d.lambda_input)}});
}

}  // namespace

void EngineConfig::validate() const {
  if (c_s <= 0) throw DomainError("config: C_S must be positive");
  if (max_steps < 1) throw DomainError("config: max_steps must be at least 1");
  if (bits < 1 || bits > 64) throw DomainError("config: bits must lie in [1, 64]");
  if (bsg_min_subgroup_density <= 0 || bsg_min_subgroup_density > 1) {
    throw DomainError("config: bsg_min_subgroup_density must lie in (0, 1]");
  }
  if (l_override && *l_override < 1) throw DomainError("config: L_override must be at least 1");
}

Json EngineConfig::to_json() const {
  return Json{{"C_S", rational_json(c_s)},
              {"bsg_min_subgroup_density", rational_json(bsg_min_subgroup_density)},
              {"bits", bits},
              {"max_steps", max_steps},
              {"L_override", opt_json(l_override)},
              {"thresholds",
               {{"large_fibre", opt_json(thresholds.large_fibre)},
                {"small_fibre", opt_json(thresholds.small_fibre)},
                {"asm1", opt_json(thresholds.asm1)},
                {"asm23", opt_json(thresholds.asm23)}}}};
}

EngineConfig EngineConfig::from_json(const Json& j) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  EngineConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "C_S") {
      cfg.c_s = rational_any(value);
    } else if (key == "bsg_min_subgroup_density") {
      cfg.bsg_min_subgroup_density = rational_any(value);
    } else if (key == "bits") {
      cfg.bits = value.get<unsigned>();
    } else if (key == "max_steps") {
      cfg.max_steps = value.get<int>();
    } else if (key == "L_override") {
      if (!value.is_null()) cfg.l_override = rational_any(value);
    } else if (key == "thresholds") {
      if (!value.is_object()) throw DomainError("config: thresholds must be an object");
      for (const auto& [tk, tv] : value.items()) {
        std::optional<Rational> v;
        if (!tv.is_null()) v = rational_any(tv);
        if (tk == "large_fibre") cfg.thresholds.large_fibre = v;
        else if (tk == "small_fibre") cfg.thresholds.small_fibre = v;
        else if (tk == "asm1") cfg.thresholds.asm1 = v;
        else if (tk == "asm23") cfg.thresholds.asm23 = v;
        else throw DomainError("config: unknown threshold '" + tk + "'");
      }
    } else {
      throw DomainError("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void Trace::add(Json event) { events_.push_back(std::move(event)); }

void Trace::append(const Trace& other) {
  for (const auto& e : other.events_) events_.push_back(e);
}

std::string Trace::jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += e.dump();
    out += '\n';
  }
  return out;
}

Json increment_event(const std::string& origin, const IncrementCertificate& c, const Family& before,
                     const Family& after) {
  return Json{{"event", "increment"},
              {"origin", origin},
              {"certificate", certificate_json(c)},
              {"before_family", family_json(before)},
              {"after_family", family_json(after)}};
}

Rational solve_l(const Rational& c_s, const Rational& alpha, unsigned bits) {
  if (alpha <= 0 || alpha > 1) throw DomainError("solve_l: alpha must lie in (0, 1]");
  const Rational rhs = ln_lower(1 / alpha, bits) / 2;
  const Rational unit = pow2(-static_cast<long>(bits));
  auto ok = [&](const BigInt& k) {
    Rational l = Rational(k) * unit;
    Rational ln = ln_upper(l, bits);
    return c_s * l * l * l * ln * ln <= rhs;
  };
  BigInt lo = BigInt(1) << bits;  // L = 1 always qualifies: ln 1 = 0
  BigInt hi = lo * 2;
  while (ok(hi)) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    BigInt mid = (lo + hi) / 2;
    if (ok(mid)) lo = mid;
    else hi = mid;
  }
  return Rational(lo) * unit;
}

FloorOutcome high_energy_step(const Family& f, const Z2Set& s, const Rational& c, const Rational& k,
                              const Rational& l, const EngineConfig& cfg) {
  FloorOutcome out;
  const int m = f.dim();
  if (s.dim() != m) throw DomainError("high_energy_step: S lives in the wrong group");
  const Rational alpha = f.density();
  if (alpha == 0) throw DomainError("high_energy_step: family has density 0");
  if (s.empty()) {
    out.floor = Rational(0);
    out.trace.add(Json{{"event", "high_energy"}, {"case", "vacuous"}, {"floor", rational_json(0)}});
    return out;
  }
  if (c <= 0 || k <= 0 || l < 1) throw DomainError("high_energy_step: need c > 0, K > 0, L >= 1");
  RealFn2 fn = density_function(f);
  Spectrum2 fhat = wht(fn);
  Rational sup_f = m >= 1 ? sup_nontrivial(fhat).magnitude : Rational(0);
  if (sup_f > l * alpha * alpha) throw DomainError("high_energy_step: sup |hat f| > L alpha^2");
  for (Code h : s.members()) {
    Rational v = f.density_fn(h);
    if (v > k * alpha || v < k * alpha / 2) {
      throw DomainError("high_energy_step: f(" + z2_string(h, m) + ") outside [K alpha/2, K alpha]");
    }
    if (energy(f.fibre(h)) < c * v * v * v) {
      throw DomainError("high_energy_step: energy hypothesis fails at " + z2_string(h, m));
    }
  }

  Claims claims{false, &out.flags, family_dump(f)};
  unsigned bits = cfg.bits;
  Rational eps = sqrt_lower(c / k, bits) / 4;
  while (eps == 0 && bits < 64) {
    bits += 8;
    eps = sqrt_lower(c / k, bits) / 4;
  }
  if (eps == 0) throw DomainError("high_energy_step: epsilon underflows 64 fractional bits");
  if (eps > 1) eps = 1;

  struct Served {
    Code h;
    UniformizeResult u;
  };
  std::vector<Served> served;
  Json excluded = Json::array();
  bool capped = false;
  for (Code h : s.members()) {
    std::optional<BsgResult> inner;
    if (!capped) {
      try {
        inner = bsg_oracle(f.fibre(h), c, cfg.bsg_min_subgroup_density);
      } catch (const DomainError&) {
        capped = true;
      }
    }
    if (!inner) {
      excluded.push_back(Json{{"h", z2_string(h, m)}, {"reason", capped ? "cap" : "none"}});
      continue;
    }
    UniformizeResult u = uniformize(f.fibre(h), eps, *inner, bits);
    claims.require(u.result.local_density >= c / 2, "high_energy_step: uniformized density below c/2");
    served.push_back({h, std::move(u)});
  }

  // (f * P_{H_h})(h) is the mean of f over h + H_h.
  auto coset_mean = [&](Code h, const Subgroup2& sub) -> Rational {
    Rational sum = 0;
    for (Code y : sub.members()) sum += fn.values[h ^ y];
    return sum * pow2(-sub.dim());
  };
  std::vector<const Served*> s0, s1;
  for (const auto& sv : served) {
    (coset_mean(sv.h, sv.u.result.subgroup) >= alpha / 2 ? s0 : s1).push_back(&sv);
  }

  Json ev{{"event", "high_energy"},
          {"c", rational_json(c)},
          {"K", rational_json(k)},
          {"L", rational_json(l)},
          {"epsilon", rational_json(eps)},
          {"epsilon_bits", bits},
          {"sigma", rational_json(s.density())},
          {"excluded", excluded},
          {"s0", s0.size()},
          {"s1", s1.size()}};
  Json fibre_info = Json::array();
  for (const auto& sv : served) {
    fibre_info.push_back(Json{{"h", z2_string(sv.h, m)},
                          {"bsg", bsg_json(sv.u.result)},
                          {"uniformize_steps", sv.u.steps.size()}});
  }
  ev["fibres"] = fibre_info;

  if (served.empty()) {
    ev["case"] = "no_fibre_served";
    out.trace.add(std::move(ev));
    return out;
  }

  if (s0.size() >= s1.size()) {
    ev["case"] = "S0";
    Rational floor = 0;
    std::vector<Code> s0_members;
    Json terms = Json::array();
    for (const Served* sv : s0) {
      const BsgResult& r = sv->u.result;
      const Subgroup2& sub = r.subgroup;
      RealFn2 g(sub.dim());
      for (Code y = 0; y < g.values.size(); ++y) g.values[y] = fn.values[sv->h ^ sub.embed(y)];
      Spectrum2 ghat = wht(g);
      Spectrum2 ahat = wht_indicator(r.local_set);
      const Rational pa = r.local_density;
      const Rational trivial = pa * pa * ghat.coeffs[0];
      Rational err = 0, exact = 0;
      for (std::size_t gm = 0; gm < ghat.coeffs.size(); ++gm) {
        Rational a2 = ahat.coeffs[gm] * ahat.coeffs[gm];
        exact += a2 * ghat.coeffs[gm];
        if (gm != 0) err += a2 * abs_q(ghat.coeffs[gm]);
      }
      const Rational ph = sub.density();
      bool half_ok = err <= trivial / 2;
      Rational term = half_ok ? Rational(ph * ph * trivial / 2) : Rational(ph * ph * exact);
      if (!half_ok) out.flags.push_back("high_energy_step: error term exceeds half the main term at h = " +
                                        z2_string(sv->h, m) + "; exact inner product used");
      floor += term;
      s0_members.push_back(sv->h);
      terms.push_back(Json{{"h", z2_string(sv->h, m)}, {"half_bound", half_ok}, {"term", rational_json(term)}});
    }
    floor *= pow2(-m);
    std::sort(s0_members.begin(), s0_members.end());
    Rational partial = restricted_lambda(f, Z2Set(m, s0_members));
    if (floor > partial) {
      throw FalsificationError("high_energy_step: S0 floor exceeds the restricted count", family_dump(f));
    }
    ev["terms"] = terms;
    ev["restricted_lambda"] = rational_json(partial);
    ev["floor"] = rational_json(floor);
    out.floor = floor;
    out.trace.add(std::move(ev));
    return out;
  }

  ev["case"] = "S1";
  const Rational x = 1 / (4 * l * alpha);
  const int d = floor_log2_clamped(x);
  struct Grouped {
    const Served* sv;
    Subgroup2 hp;
  };
  std::vector<Grouped> grouped;
  Json lsizes = Json::array();
  for (const Served* sv : s1) {
    const Subgroup2& hh = sv->u.result.subgroup;
    const Rational thr = hh.density() * alpha / 4;
    std::vector<Code> cand;
    std::size_t lprime = 0;
    for (Code g = 1; g < f.order(); ++g) {
      if (abs_q(fhat.coeffs[g]) < thr) continue;
      ++lprime;
      bool perp = true;
      for (Code b : hh.basis()) perp = perp && z2::dot(g, b) == 0;
      if (perp) cand.push_back(g);
    }
    claims.require(Rational(static_cast<unsigned long>(cand.size())) >= x,
                   "high_energy_step: |L' cap H_h^perp| < alpha^{-1}/4L");
    std::vector<Code> chosen;
    for (Code g : cand) {
      if (static_cast<int>(chosen.size()) == d) break;
      std::vector<Code> trial = chosen;
      trial.push_back(g);
      if (rref(trial).size() == trial.size()) chosen = std::move(trial);
    }
    if (static_cast<int>(chosen.size()) < d) {
      throw FalsificationError("high_energy_step: fewer than d independent large characters", family_dump(f));
    }
    Subgroup2 hp = Subgroup2::annihilator_of(m, chosen);
    lsizes.push_back(Json{{"h", z2_string(sv->h, m)}, {"L_prime", lprime}, {"L_prime_perp", cand.size()}});
    grouped.push_back({sv, std::move(hp)});
  }
  // Most popular H'_h; ties go to the canonically least subgroup.
  std::vector<Subgroup2> distinct;
  for (const auto& g : grouped) {
    if (std::find(distinct.begin(), distinct.end(), g.hp) == distinct.end()) distinct.push_back(g.hp);
  }
  std::sort(distinct.begin(), distinct.end(),
            [](const Subgroup2& x, const Subgroup2& y) { return canonical_less(x, y); });
  std::size_t best_count = 0;
  Subgroup2 hp;
  for (const auto& cand : distinct) {
    std::size_t cnt = std::count_if(grouped.begin(), grouped.end(), [&](const Grouped& g) { return g.hp == cand; });
    if (cnt > best_count) {
      best_count = cnt;
      hp = cand;
    }
  }
  std::vector<const Grouped*> s2;
  for (const auto& g : grouped) {
    if (g.hp == hp) s2.push_back(&g);
  }
  std::size_t delta_count = SIZE_MAX;
  for (const Grouped* g : s2) delta_count = std::min(delta_count, g->sv->u.result.local_set.size());
  std::map<Code, std::size_t> per_coset;
  for (const Grouped* g : s2) ++per_coset[hp.coset_min(g->sv->h)];
  Code h1 = 0;
  std::size_t h1_count = 0;
  for (const auto& [rep, cnt] : per_coset) {
    if (cnt > h1_count) {
      h1 = rep;
      h1_count = cnt;
    }
  }
  std::vector<Z2Set> fibres(hp.size(), Z2Set(hp.dim()));
  std::vector<Code> shifts(hp.size(), 0);
  for (const Grouped* g : s2) {
    const Code h = g->sv->h;
    if (hp.coset_min(h) != h1) continue;
    const BsgResult& r = g->sv->u.result;
    std::vector<Code> members;
    for (Code a : r.local_set.members()) members.push_back(hp.coords(r.subgroup.embed(a)));
    std::sort(members.begin(), members.end());
    members.resize(delta_count);
    const Code cc = hp.coords(h ^ h1);
    fibres[cc] = Z2Set(hp.dim(), std::move(members));
    shifts[cc] = r.shift;
  }
  Family grouped_family(hp.dim(), std::move(fibres));
  auto cert = make_certificate(IncrementKind::grouping, f, grouped_family, hp, h1, shifts,
                               grouped_family.density() - alpha);
  if (auto err = check_certificate(cert, f, grouped_family)) {
    throw FalsificationError("high_energy_step: grouping certificate fails: " + *err, family_dump(f));
  }
  ev["d"] = d;
  ev["L_prime_sizes"] = lsizes;
  ev["s2"] = s2.size();
  ev["s2_in_coset"] = h1_count;
  ev["delta"] = rational_json(q_of(delta_count) * pow2(-hp.dim()));
  out.trace.add(ev);
  out.trace.add(increment_event("grouping", cert, f, grouped_family));

  LargeL2Drive drive = large_l2_drive(grouped_family, cfg.bits);
  append_drive(out.trace, drive, -1);
  Rational floor = drive.chain_floor * pow2(-4 * hp.index_log2());
  Rational lambda = Rational(family_raw_count(f)) * pow2(-4 * m);
  if (floor > lambda) throw FalsificationError("high_energy_step: S1 floor exceeds Lambda", family_dump(f));
  out.trace.add(Json{{"event", "high_energy_floor"}, {"floor", rational_json(floor)}});
  out.floor = floor;
  return out;
}

SmallMsOutcome small_ms_step(const Family& f, const Rational& l, const EngineConfig& cfg) {
  SmallMsOutcome out;
  const int m = f.dim();
  Diagnostics dg = diagnostics(f);
  const Rational& alpha = dg.alpha;
  const Rational& k = dg.k;
  if (l < std::max(k, Rational(2))) throw DomainError("small_ms_step: need L >= max(K, 2)");
  Claims claims{any_override(cfg), &out.result.flags, family_dump(f)};
  const auto& thr = cfg.thresholds;
  const Rational large = thr.large_fibre.value_or(4 * k * alpha);
  const Rational small = thr.small_fibre.value_or(alpha / 4);
  const Rational t1 = thr.asm1.value_or(l * alpha * alpha * alpha);
  const Rational t23 = thr.asm23.value_or(l * alpha * alpha / (4 * k));

  RealFn2 fn = density_function(f);
  std::vector<Code> sl, ss, smid;
  for (Code h = 0; h < f.order(); ++h) {
    const Rational& v = fn.values[h];
    if (v >= large) sl.push_back(h);
    else if (v <= small) ss.push_back(h);
    else smid.push_back(h);
  }
  Rational mass = 0;
  for (Code h : smid) mass += fn.values[h];
  mass *= pow2(-m);
  claims.require(mass >= alpha / 2, "small_ms_step: E 1_S f < alpha/2");

  const int top = ceil_log2(k) + 3;
  std::vector<std::vector<Code>> levels(top + 1);
  for (Code h : smid) {
    for (int i = 0; i <= top; ++i) {
      Rational lo = pow2(i - 2) * alpha, hi = pow2(i - 1) * alpha;
      if (lo <= fn.values[h] && fn.values[h] <= hi) levels[i].push_back(h);
    }
  }
  int level = 0;
  Rational best = -1;
  for (int i = 0; i <= top; ++i) {
    Rational v = pow2(i - 1) * q_of(levels[i].size());
    if (v > best) {
      best = v;
      level = i;
    }
  }
  const Z2Set si(m, levels[level]);
  const Rational ki = pow2(level - 1);
  claims.require(ki * alpha * si.density() >= alpha / (2 * (top + 1)), "small_ms_step: level averaging fails");

  // Per-character moments over S_i, from integer fibre transforms.
  const std::size_t order = f.order();
  std::vector<i128> s1(order, 0), s2(order, 0), s4(order, 0);
  for (Code h : si.members()) {
    auto fh = indicator_wht(f.fibre(h));
    for (Code g = 0; g < order; ++g) {
      i128 v = fh[g];
      i128 sq = v * v;
      s1[g] += v < 0 ? -v : v;
      s2[g] += sq;
      s4[g] += sq * sq;
    }
  }
  auto m1 = [&](Code g) -> Rational { return Rational(big(s1[g])) * pow2(-2 * m); };
  auto m2 = [&](Code g) -> Rational { return Rational(big(s2[g])) * pow2(-3 * m); };
  auto m4 = [&](Code g) -> Rational { return Rational(big(s4[g])) * pow2(-5 * m); };
  Spectrum2 fhat = wht(fn);

  Code w1 = 0, w2 = 0, wf = 0;
  Rational sup1 = 0, sup2 = 0, supf = 0;
  for (Code g = 1; g < order; ++g) {
    if (Rational v = m2(g); v > sup2) sup2 = v, w2 = g;
    if (Rational v = m1(g); v > sup1) sup1 = v, w1 = g;
    if (Rational v = abs_q(fhat.coeffs[g]); v > supf) supf = v, wf = g;
  }

  Json ev{{"event", "small_ms"},
          {"alpha", rational_json(alpha)},
          {"K", rational_json(k)},
          {"L", rational_json(l)},
          {"S_L", sl.size()},
          {"S_S", ss.size()},
          {"S", smid.size()},
          {"levels", top + 1},
          {"level", level},
          {"S_i", si.size()},
          {"K_i", rational_json(ki)},
          {"asm1_sup", rational_json(sup2)},
          {"asm2_sup", rational_json(sup1)},
          {"asm3_sup", rational_json(supf)}};

  auto route = [&](const char* branch, Code gamma, bool density) {
    IncrementStep step = density ? density_fn_increment(f, gamma) : fibre_increment(f, gamma);
    claims.require(step.certificate.claimed_gain >= t23, std::string("small_ms_step: ") + branch +
                                                             " gain below L alpha^2 / 4K");
    ev["branch"] = branch;
    ev["gamma"] = z2_string(gamma, m);
    out.result.trace.add(ev);
    out.result.trace.add(increment_event(branch, step.certificate, f, step.family));
    out.increment = std::move(step);
    return out;
  };
  if (m >= 1 && sup2 > t1) return route("asm1", w2, false);
  if (m >= 1 && sup1 > t23) return route("asm2", w1, false);
  if (m >= 1 && supf > t23) return route("asm3", wf, true);

  const Rational partial = restricted_lambda(f, si);
  Rational e1 = 0, e2 = 0;
  for (Code h : si.members()) {
    e1 += fn.values[h];
    e2 += fn.values[h] * fn.values[h];
  }
  e1 *= pow2(-m);
  e2 *= pow2(-m);
  ev["partial_lambda"] = rational_json(partial);
  ev["partial_target"] = rational_json(alpha * e2 / 2);
  if (partial >= alpha * e2 / 2) {
    ev["branch"] = "floor";
    ev["floor"] = rational_json(partial);
    out.result.floor = partial;
    out.result.trace.add(std::move(ev));
    return out;
  }

  // Large-spectrum analysis.
  const Rational big_l_thr = e2 * e2 / (16 * k * e1);
  Rational rop = 0, outside = 0, inside = 0;
  std::vector<Code> spec_l;
  for (Code g = 0; g < order; ++g) {
    Rational w = m2(g) * abs_q(fhat.coeffs[g]);
    if (g != 0) rop += w;
    if (m2(g) >= big_l_thr) {
      spec_l.push_back(g);
      if (g != 0) inside += w;
    } else {
      outside += w;
    }
  }
  claims.require(rop >= alpha * e2 / 2, "small_ms_step: (rop) fails");
  claims.require(outside <= alpha * e2 / 4, "small_ms_step: (cla) fails");
  claims.require(inside >= alpha * e2 / 4, "small_ms_step: mass on the large spectrum below alpha E1f^2/4");
  int j0 = 0;
  while (pow2(-(j0 + 1)) * t1 > big_l_thr) ++j0;
  std::vector<std::vector<Code>> bands(j0 + 1);
  for (Code g = 1; g < order; ++g) {
    for (int j = 0; j <= j0; ++j) {
      if (pow2(-j) * t1 >= m2(g) && m2(g) >= pow2(-(j + 1)) * t1) bands[j].push_back(g);
    }
  }
  int jsel = 0;
  Rational jbest = -1;
  Json band_sizes = Json::array();
  for (int j = 0; j <= j0; ++j) {
    Rational w = 0;
    for (Code g : bands[j]) w += m2(g) * abs_q(fhat.coeffs[g]);
    band_sizes.push_back(bands[j].size());
    if (w > jbest) {
      jbest = w;
      jsel = j;
    }
  }
  for (Code g : bands[jsel]) {
    Rational a = m2(g), b = m1(g), c4 = m4(g);
    claims.require(a * a * a <= b * b * c4, "small_ms_step: moment convexity fails");
    claims.require(a * a * a <= t23 * t23 * c4, "small_ms_step: fourth-moment bound fails");
  }
  std::vector<Rational> energies(order);
  Rational avg = 0;
  for (Code h : si.members()) {
    energies[h] = energy(f.fibre(h));
    avg += energies[h];
  }
  avg *= pow2(-m);
  std::vector<Code> sip;
  for (Code h : si.members()) {
    if (energies[h] >= avg / 2) sip.push_back(h);
  }
  Rational c = -1;
  for (Code h : sip) {
    Rational v = fn.values[h];
    Rational ratio = energies[h] / (v * v * v);
    if (c < 0 || ratio < c) c = ratio;
  }
  const Z2Set sprime(m, sip);
  ev["branch"] = "high_energy";
  ev["L_size"] = spec_l.size();
  ev["j0"] = j0;
  ev["j"] = jsel;
  ev["band_sizes"] = band_sizes;
  ev["S_i_prime"] = sprime.size();
  ev["S_i_prime_density"] = rational_json(sprime.density());
  ev["c"] = rational_json(c);
  ev["mean_energy"] = rational_json(avg);
  out.result.trace.add(ev);

  FloorOutcome high = high_energy_step(f, sprime, c, ki, l, cfg);
  out.result.trace.append(high.trace);
  for (auto& flag : high.flags) out.result.flags.push_back(flag);
  if (high.floor) {
    out.result.floor = high.floor;
  } else {
    out.result.flags.push_back("small_ms_step: no fibre served by the subgroup oracle; partial count used");
    out.result.floor = partial;
    out.result.trace.add(Json{{"event", "fallback_floor"}, {"floor", rational_json(partial)}});
  }
  return out;
}

namespace {

Json header_event(const char* driver, const Z4Set& a, const EngineConfig& cfg) {
  return Json{{"schema", kTraceSchema}, {"event", "header"}, {"driver", driver},
              {"input", z4set_json(a)}, {"config", cfg.to_json()}};
}

void finish(DriverResult& r, const Rational& local_floor, const char* status) {
  r.global_floor = local_floor * pow2(-4 * r.codim);
  if (r.global_floor > r.lambda_input) {
    throw FalsificationError("driver: certified floor " + to_string(r.global_floor) + " exceeds exact Lambda " +
                             to_string(r.lambda_input));
  }
  r.trace.add(Json{{"event", "final"},
                   {"status", status},
                   {"steps", r.steps},
                   {"codim", r.codim},
                   {"local_floor", rational_json(local_floor)},
                   {"global_floor", rational_json(r.global_floor)},
                   {"lambda", rational_json(r.lambda_input)},
                   {"sound", r.global_floor <= r.lambda_input}});
}

void add_flags(Trace& trace, const std::vector<std::string>& flags, std::size_t step) {
  if (flags.empty()) return;
  trace.add(Json{{"event", "flags"}, {"step", step}, {"flags", flags}});
}

}  // namespace

DriverResult rml_driver(const Z4Set& a, const EngineConfig& cfg) {
  cfg.validate();
  if (a.empty()) throw DomainError("rml_driver: set has density 0");
  DriverResult r;
  r.trace.add(header_event("rml", a, cfg));
  r.lambda_input = lambda_fourier(a).lambda;
  Z4Set cur = a;
  for (r.steps = 0; r.steps < static_cast<std::size_t>(cfg.max_steps); ++r.steps) {
    const int n = cur.dim();
    const Rational alpha = cur.density();
    const Rational lambda = lambda_fourier(cur).lambda;
    Spectrum4 s = dft4(cur);
    Code wit = 0;
    Rational sup_sq = 0;
    for (Code g = 1; g < s.coeffs.size(); ++g) {
      Rational v = s.coeffs[g].re * s.coeffs[g].re + s.coeffs[g].im * s.coeffs[g].im;
      if (v > sup_sq) sup_sq = v, wit = g;
    }
    const Rational lev = lev_sum(cur);
    Json ev{{"event", "step"},          {"step", r.steps},
            {"n", n},                   {"alpha", rational_json(alpha)},
            {"lambda", rational_json(lambda)}, {"sup_character", z4_string(wit, n)},
            {"sup_squared", rational_json(sup_sq)}, {"lev_sum", rational_json(lev)}};
    if (lev < alpha * alpha) {
      throw FalsificationError("rml_driver: Lev positivity fails", z4set_json(cur).dump());
    }
    const Rational floor = alpha * alpha * alpha / 2;
    if (lambda >= floor) {
      ev["branch"] = "floor";
      r.trace.add(std::move(ev));
      finish(r, floor, "floor");
      return r;
    }
    // Lambda >= alpha^3 - alpha sup, so Lambda < alpha^3/2 forces sup > alpha^2/2.
    const Rational need = alpha * alpha / 2;
    if (sup_sq < need * need) {
      throw FalsificationError("rml_driver: Lambda < alpha^3/2 but sup |hat 1_A| < alpha^2/2", z4set_json(cur).dump());
    }
    Family fam = fibre_decompose(cur);
    const Code rho = z4::parity_bits(wit, n);
    IncrementStep step = rho != 0 ? fibre_increment(fam, rho) : density_fn_increment(fam, z4::high_bits(wit, n));
    ev["branch"] = rho != 0 ? "fibre_increment" : "density_fn_increment";
    ev["gamma"] = z2_string(rho != 0 ? rho : z4::high_bits(wit, n), n);
    const Rational& gain = step.certificate.claimed_gain;
    if (gain * gain < sup_sq) {
      throw FalsificationError("rml_driver: increment gain below |hat 1_A(r)|", z4set_json(cur).dump());
    }
    if (step.family.density() < alpha + need) {
      throw FalsificationError("rml_driver: density increment below alpha^2/2", z4set_json(cur).dump());
    }
    r.trace.add(std::move(ev));
    Json inc = increment_event(ev.value("branch", ""), step.certificate, fam, step.family);
    inc["step"] = r.steps;
    r.trace.add(std::move(inc));
    r.codim += step.certificate.subgroup.index_log2();
    cur = reconstruct(step.family);
  }
  finish(r, 0, "max_steps");
  return r;
}

DriverResult weighted_driver(const Z4Set& a, const EngineConfig& cfg) {
  cfg.validate();
  if (a.empty()) throw DomainError("weighted_driver: set has density 0");
  DriverResult r;
  r.trace.add(header_event("weighted", a, cfg));
  Family cur = fibre_decompose(a);
  r.lambda_input = lambda_family(cur).lambda;
  for (r.steps = 0; r.steps < static_cast<std::size_t>(cfg.max_steps); ++r.steps) {
    Diagnostics dg = diagnostics(cur);
    const Rational l = cfg.l_override ? *cfg.l_override : solve_l(cfg.c_s, dg.alpha, cfg.bits);
    const Rational ln_k = ln_lower(dg.k, cfg.bits);
    const Rational case_thr = 2 + dg.k * dg.k / ((1 + ln_k) * (1 + ln_k));
    const bool case2 = l > case_thr && l >= std::max(dg.k, Rational(2));
    Json ev{{"event", "step"},
            {"step", r.steps},
            {"m", cur.dim()},
            {"alpha", rational_json(dg.alpha)},
            {"K", rational_json(dg.k)},
            {"L", rational_json(l)},
            {"L_source", cfg.l_override ? "override" : "solved"},
            {"case_threshold", rational_json(case_thr)},
            {"case", case2 ? 2 : 1}};
    r.trace.add(std::move(ev));

    if (!case2) {
      DyadicSelection sel = dyadic_select(cur);
      Json levels = Json::array();
      for (const auto& p : sel.level_densities) levels.push_back(rational_json(p));
      r.trace.add(Json{{"event", "dyadic"},
                       {"step", r.steps},
                       {"level", sel.level},
                       {"delta", rational_json(sel.delta)},
                       {"trimmed_delta", rational_json(sel.trimmed_delta)},
                       {"sigma", rational_json(sel.level_set.density())},
                       {"q", sel.q},
                       {"K_below_two", sel.k_below_two},
                       {"eqn_j", sel.eqn_j_holds},
                       {"level_densities", levels}});
      Json inc = increment_event("dyadic", sel.certificate, cur, sel.subfamily);
      inc["step"] = r.steps;
      r.trace.add(std::move(inc));
      LargeL2Drive drive = large_l2_drive(sel.subfamily, cfg.bits);
      append_drive(r.trace, drive, static_cast<long>(r.steps));
      finish(r, drive.chain_floor, "floor");
      return r;
    }

    SmallMsOutcome o = small_ms_step(cur, l, cfg);
    append_at_step(r.trace, o.result.trace, r.steps);
    add_flags(r.trace, o.result.flags, r.steps);
    if (o.increment) {
      const Rational alpha_next = o.increment->family.density();
      if (alpha_next <= dg.alpha) {
        throw FalsificationError("weighted_driver: density did not increase", family_dump(cur));
      }
      r.codim += o.increment->certificate.subgroup.index_log2();
      cur = std::move(o.increment->family);
      continue;
    }
    finish(r, *o.result.floor, "floor");
    return r;
  }
  finish(r, 0, "max_steps");
  return r;
}

VerifyReport verify_trace(const std::string& jsonl) {
  VerifyReport rep;
  auto fail = [&](const std::string& msg) {
    rep.ok = false;
    rep.message = msg;
    return rep;
  };
  std::vector<std::string> lines;
  std::istringstream in(jsonl);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) return fail("empty trace");
  std::vector<Json> events;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      events.push_back(Json::parse(lines[i]));
    } catch (const std::exception&) {
      return fail("line " + std::to_string(i + 1) + ": malformed JSON");
    }
  }
  const Json& head = events[0];
  if (!head.is_object() || head.value("schema", "") != kTraceSchema || head.value("event", "") != "header") {
    return fail("line 1: missing or mismatched trace header (expected schema " + std::string(kTraceSchema) + ")");
  }
  for (std::size_t i = 1; i < events.size(); ++i) {
    const Json& e = events[i];
    if (!e.is_object() || e.value("event", "") != "increment") continue;
    std::string where = "line " + std::to_string(i + 1) +
                        (e.contains("step") ? ", step " + e["step"].dump() : std::string()) + " (" +
                        e.value("origin", "?") + ")";
    try {
      IncrementCertificate c = certificate_from_json(e.at("certificate"));
      Family before = family_from_json(e.at("before_family"));
      Family after = family_from_json(e.at("after_family"));
      if (auto err = check_certificate(c, before, after)) return fail(where + ": " + *err);
      ++rep.certificates;
    } catch (const DomainError& ex) {
      return fail(where + ": " + ex.what());
    } catch (const Json::exception& ex) {
      return fail(where + ": " + ex.what());
    }
  }
  DriverResult replay;
  try {
    Z4Set input = z4set_from_json(head.at("input"));
    EngineConfig cfg = EngineConfig::from_json(head.at("config"));
    const std::string driver = head.value("driver", "");
    if (driver == "rml") replay = rml_driver(input, cfg);
    else if (driver == "weighted") replay = weighted_driver(input, cfg);
    else return fail("line 1: unknown driver '" + driver + "'");
  } catch (const DomainError& ex) {
    return fail(std::string("replay: ") + ex.what());
  } catch (const Json::exception& ex) {
    return fail(std::string("replay: ") + ex.what());
  }
  const auto& ev = replay.trace.events();
  for (std::size_t i = 0; i < std::max(ev.size(), lines.size()); ++i) {
    if (i >= ev.size() || i >= lines.size() || ev[i].dump() != lines[i]) {
      std::string what = i < events.size() ? events[i].value("event", "?") : std::string("end of trace");
      if (i < events.size() && events[i].contains("step")) what += ", step " + events[i]["step"].dump();
      return fail("line " + std::to_string(i + 1) + " (" + what + ") differs from the replayed run");
    }
  }
  rep.message = "ok: " + std::to_string(rep.certificates) + " certificates re-verified, replay identical";
  return rep;
}

}  // namespace rothz4
