#include "rothz4/increment.hpp"

#include <algorithm>
#include <sstream>

#include "rothz4/errors.hpp"

namespace rothz4 {

namespace {

// Sizes of A_h inside H' and inside the other coset, for an index-2 H' = {gamma}^perp.
std::pair<std::size_t, std::size_t> split_counts(const Z2Set& a, Code gamma) {
  std::size_t in = 0;
  for (Code x : a.members()) in += z2::dot(gamma, x) ? 0 : 1;
  return {in, a.size() - in};
}

Rational as_rational(std::size_t v) { return Rational(static_cast<unsigned long>(v)); }

std::string dump_family(const Family& f) { return family_json(f).dump(); }

IncrementKind kind_from_name(const std::string& s) {
  for (auto k : {IncrementKind::fibre_simultaneous, IncrementKind::density_fn, IncrementKind::large_l2_step,
                 IncrementKind::subfamily, IncrementKind::grouping}) {
    if (s == kind_name(k)) return k;
  }
  throw DomainError("unknown certificate kind '" + s + "'");
}

Json summary_json(const FamilySummary& s) {
  return Json{{"m", s.m},
              {"density", rational_json(s.density)},
              {"raw_count", s.raw_count.get_str()},
              {"total", s.total}};
}

FamilySummary summary_from_json(const Json& j) {
  FamilySummary s;
  s.m = j.at("m").get<int>();
  s.density = rational_from_json(j.at("density"));
  if (s.raw_count.set_str(j.at("raw_count").get<std::string>(), 10) != 0) {
    throw DomainError("malformed raw_count");
  }
  s.total = j.at("total").get<std::size_t>();
  return s;
}

Json optional_rational(const std::optional<Rational>& v) { return v ? rational_json(*v) : Json(nullptr); }

std::optional<Rational> optional_rational_from(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return rational_from_json(j[key]);
}

Code parse_bits(const Json& j, int m) {
  const auto s = j.get<std::string>();
  if (static_cast<int>(s.size()) != m) throw DomainError("element '" + s + "' has wrong length");
  Code c = 0;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw DomainError("invalid bit in '" + s + "'");
    c = (c << 1) | static_cast<Code>(ch - '0');
  }
  return c;
}

// Smallest i >= 0 with 2^i * alpha >= 1.
int ceil_log2_inverse(const Rational& alpha) {
  int i = 0;
  while (pow2(i) * alpha < 1) ++i;
  return i;
}

}  // namespace

LinfResult linf_increment(const RealFn2& f, Code gamma) {
  if (gamma == 0) throw DomainError("linf_increment: gamma must be nonzero");
  if (gamma >= z2::order(f.m)) throw DomainError("linf_increment: character out of range");
  LinfResult r;
  r.subgroup = subgroup_from_character(ElemZ2(f.m, gamma));
  Rational in = 0, out = 0;
  for (Code x = 0; x < f.values.size(); ++x) (z2::dot(gamma, x) ? out : in) += f.values[x];
  // Averages over the coset; |H'| = 2^{m-1}.
  Rational scale = pow2(-(f.m - 1));
  in *= scale;
  out *= scale;
  if (in >= out) {
    r.coset = 0;
    r.value = in;
  } else {
    r.coset = r.subgroup.least_outside();
    r.value = out;
  }
  Spectrum2 s = wht(f);
  Rational expected = s.coeffs[0] + abs_q(s.coeffs[gamma]);
  if (r.value != expected) {
    throw FalsificationError("linf_increment: max coset average " + to_string(r.value) +
                             " differs from E f + |hat f(gamma)| = " + to_string(expected));
  }
  return r;
}

const char* kind_name(IncrementKind k) {
  switch (k) {
    case IncrementKind::fibre_simultaneous: return "fibre_simultaneous";
    case IncrementKind::density_fn: return "density_fn";
    case IncrementKind::large_l2_step: return "large_l2_step";
    case IncrementKind::subfamily: return "subfamily";
    case IncrementKind::grouping: return "grouping";
  }
  return "?";
}

FamilySummary summarize(const Family& f) {
  return {f.dim(), f.density(), family_raw_count(f), f.total()};
}

Json certificate_json(const IncrementCertificate& c) {
  const int m = c.before.m;
  Json shifts = Json::array();
  for (Code x : c.shift_table) shifts.push_back(z2_string(x, m));
  return Json{{"schema", kCertificateSchema},
              {"kind", kind_name(c.kind)},
              {"gamma", c.gamma ? Json(z2_string(*c.gamma, m)) : Json(nullptr)},
              {"subgroup", subgroup_json(c.subgroup)},
              {"h1", z2_string(c.h1, m)},
              {"shift_table", shifts},
              {"before", summary_json(c.before)},
              {"after", summary_json(c.after)},
              {"claimed_gain", rational_json(c.claimed_gain)},
              {"sigma_before", optional_rational(c.sigma_before)},
              {"sigma_after", optional_rational(c.sigma_after)},
              {"delta_before", optional_rational(c.delta_before)},
              {"delta_after", optional_rational(c.delta_after)}};
}

IncrementCertificate certificate_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", "") != kCertificateSchema) {
    throw DomainError("certificate schema mismatch");
  }
  IncrementCertificate c;
  c.kind = kind_from_name(j.at("kind").get<std::string>());
  c.before = summary_from_json(j.at("before"));
  c.after = summary_from_json(j.at("after"));
  const int m = c.before.m;
  if (!j.at("gamma").is_null()) c.gamma = parse_bits(j["gamma"], m);
  c.subgroup = subgroup_from_json(j.at("subgroup"));
  c.h1 = parse_bits(j.at("h1"), m);
  for (const auto& x : j.at("shift_table")) c.shift_table.push_back(parse_bits(x, m));
  c.claimed_gain = rational_from_json(j.at("claimed_gain"));
  c.sigma_before = optional_rational_from(j, "sigma_before");
  c.sigma_after = optional_rational_from(j, "sigma_after");
  c.delta_before = optional_rational_from(j, "delta_before");
  c.delta_after = optional_rational_from(j, "delta_after");
  return c;
}

std::optional<std::string> check_certificate(const IncrementCertificate& c, const Family& before,
                                             const Family& after) {
  const Subgroup2& sub = c.subgroup;
  if (sub.ambient() != before.dim()) return "subgroup ambient dimension differs from the family's";
  if (after.dim() != sub.dim()) return "new family does not live on the subgroup";
  if (summarize(before) != c.before) return "before-summary does not match a recount of the old family";
  if (summarize(after) != c.after) return "after-summary does not match a recount of the new family";
  if (c.shift_table.size() != sub.size()) return "shift table has the wrong length";
  for (Code x : c.shift_table) {
    if (x >= before.order()) return "shift out of range";
  }
  if (c.h1 >= before.order()) return "h1 out of range";
  for (Code cc = 0; cc < after.order(); ++cc) {
    const Code h = c.h1 ^ sub.embed(cc);
    for (Code a : after.fibre(cc).members()) {
      if (!before.fibre(h).contains(sub.embed(a) ^ c.shift_table[cc])) {
        return "fibre " + z2_string(cc, after.dim()) + " of the new family is not a shifted subset of A_" +
               z2_string(h, before.dim());
      }
    }
  }
  // |H|^4 Lambda(A) >= |H'|^4 Lambda(A'), i.e. Lambda(A) >= 2^{-4 codim} Lambda(A').
  if (c.before.raw_count < c.after.raw_count) return "count relation |H|^4 L(A) >= |H'|^4 L(A') fails";
  if (c.after.density < c.before.density + c.claimed_gain) return "density gain below the claimed gain";

  switch (c.kind) {
    case IncrementKind::fibre_simultaneous:
    case IncrementKind::density_fn: {
      if (!c.gamma || *c.gamma == 0) return "index-2 certificate without a character";
      if (!(sub == subgroup_from_character(ElemZ2(before.dim(), *c.gamma)))) return "subgroup is not {gamma}^perp";
      Rational gain = c.kind == IncrementKind::fibre_simultaneous
                          ? mean_fibre_coefficient(before, *c.gamma)
                          : abs_q(wht(density_function(before)).coeffs[*c.gamma]);
      if (gain != c.claimed_gain) return "claimed gain differs from the recomputed Fourier coefficient";
      break;
    }
    case IncrementKind::large_l2_step: {
      if (!c.sigma_before || !c.sigma_after || !c.delta_before || !c.delta_after) return "missing sigma/delta";
      auto sb = flat_shape(before);
      auto sa = flat_shape(after);
      if (!sb || !sa) return "family is not of the form delta 1_S";
      if (sb->sigma != *c.sigma_before || sb->delta != *c.delta_before) return "sigma/delta before mismatch";
      if (sa->sigma != *c.sigma_after || (sa->sigma != 0 && sa->delta != *c.delta_after)) {
        return "sigma/delta after mismatch";
      }
      if (*c.delta_after < *c.delta_before) return "trimmed density fell below delta";
      if (*c.sigma_after < *c.sigma_before * (1 + *c.delta_before / 2)) return "sigma' < sigma (1 + delta/2)";
      if (sub.index_log2() != 1) return "large-L2 step must use an index-2 subgroup";
      break;
    }
    case IncrementKind::subfamily:
      if (sub.index_log2() != 0 || c.h1 != 0) return "subfamily certificate must keep the group";
      break;
    case IncrementKind::grouping:
      break;
  }
  return std::nullopt;
}

Rational mean_fibre_coefficient(const Family& f, Code gamma) {
  // hat 1_{A_h}(gamma) = (|A_h cap H'| - |A_h minus H'|) / 2^m.
  BigInt s = 0;
  for (Code h = 0; h < f.order(); ++h) {
    auto [in, out] = split_counts(f.fibre(h), gamma);
    s += in >= out ? in - out : out - in;
  }
  return Rational(s) * pow2(-2 * f.dim());
}

Family restrict_family(const Family& f, const Subgroup2& sub, Code h1, const std::vector<Code>& shifts,
                       const std::vector<std::size_t>* keep) {
  const int d = sub.dim();
  std::vector<Z2Set> fibres;
  fibres.reserve(z2::order(d));
  for (Code c = 0; c < z2::order(d); ++c) {
    const Code h = h1 ^ sub.embed(c);
    std::vector<Code> members;
    for (Code a : f.fibre(h).members()) {
      Code t = a ^ shifts[c];
      if (sub.contains(t)) members.push_back(sub.coords(t));
    }
    std::sort(members.begin(), members.end());
    if (keep) {
      if ((*keep)[c] > members.size()) throw std::logic_error("restrict_family: cannot keep more than available");
      members.resize((*keep)[c]);
    }
    fibres.emplace_back(d, std::move(members));
  }
  return Family(d, std::move(fibres));
}

IncrementCertificate make_certificate(IncrementKind kind, const Family& before, const Family& after,
                                      const Subgroup2& sub, Code h1, std::vector<Code> shifts,
                                      Rational claimed_gain) {
  IncrementCertificate c;
  c.kind = kind;
  c.subgroup = sub;
  c.h1 = h1;
  c.shift_table = std::move(shifts);
  c.before = summarize(before);
  c.after = summarize(after);
  c.claimed_gain = std::move(claimed_gain);
  return c;
}

namespace {

void enforce(const IncrementCertificate& c, const Family& before, const Family& after, const char* who) {
  if (auto err = check_certificate(c, before, after)) {
    throw FalsificationError(std::string(who) + ": " + *err,
                             "{\"before\":" + dump_family(before) + ",\"after\":" + dump_family(after) +
                                 ",\"certificate\":" + certificate_json(c).dump() + "}");
  }
}

std::vector<Code> shifts_on_coset(const Subgroup2& sub, Code h1, const std::vector<Code>& x) {
  std::vector<Code> out(sub.size());
  for (Code c = 0; c < out.size(); ++c) out[c] = x[h1 ^ sub.embed(c)];
  return out;
}

}  // namespace

IncrementStep fibre_increment(const Family& f, Code gamma) {
  if (gamma == 0 || gamma >= f.order()) throw DomainError("fibre_increment: gamma must be a nonzero character");
  const Subgroup2 sub = subgroup_from_character(ElemZ2(f.dim(), gamma));
  const Code h0 = sub.least_outside();
  std::vector<Code> x(f.order());
  std::vector<std::size_t> best(f.order());
  for (Code h = 0; h < f.order(); ++h) {
    auto [in, out] = split_counts(f.fibre(h), gamma);
    x[h] = in >= out ? 0 : h0;
    best[h] = std::max(in, out);
  }
  std::size_t sum0 = 0, sum1 = 0;
  for (Code h = 0; h < f.order(); ++h) (sub.contains(h) ? sum0 : sum1) += best[h];
  const Code h1 = sum0 >= sum1 ? 0 : h0;
  auto shifts = shifts_on_coset(sub, h1, x);
  Family next = restrict_family(f, sub, h1, shifts);
  auto cert = make_certificate(IncrementKind::fibre_simultaneous, f, next, sub, h1, shifts,
                               mean_fibre_coefficient(f, gamma));
  cert.gamma = gamma;
  enforce(cert, f, next, "fibre_increment");
  return {std::move(next), std::move(cert)};
}

IncrementStep density_fn_increment(const Family& f, Code gamma) {
  if (gamma == 0 || gamma >= f.order()) {
    throw DomainError("density_fn_increment: gamma must be a nonzero character");
  }
  const Subgroup2 sub = subgroup_from_character(ElemZ2(f.dim(), gamma));
  const Code h0 = sub.least_outside();
  std::size_t mass0 = 0, mass1 = 0;
  for (Code h = 0; h < f.order(); ++h) (sub.contains(h) ? mass0 : mass1) += f.fibre_size(h);
  const Code h1 = mass0 >= mass1 ? 0 : h0;
  std::vector<Code> shifts(sub.size());
  for (Code c = 0; c < shifts.size(); ++c) {
    auto [in, out] = split_counts(f.fibre(h1 ^ sub.embed(c)), gamma);
    shifts[c] = in >= out ? 0 : h0;
  }
  Family next = restrict_family(f, sub, h1, shifts);
  Rational gain = abs_q(wht(density_function(f)).coeffs[gamma]);
  auto cert = make_certificate(IncrementKind::density_fn, f, next, sub, h1, shifts, gain);
  cert.gamma = gamma;
  enforce(cert, f, next, "density_fn_increment");
  return {std::move(next), std::move(cert)};
}

std::optional<FlatShape> flat_shape(const Family& f) {
  std::size_t size = 0;
  std::vector<Code> support;
  for (Code h = 0; h < f.order(); ++h) {
    std::size_t s = f.fibre_size(h);
    if (s == 0) continue;
    if (size != 0 && s != size) return std::nullopt;
    size = s;
    support.push_back(h);
  }
  FlatShape shape;
  shape.delta = as_rational(size) * pow2(-f.dim());
  shape.support = Z2Set(f.dim(), std::move(support));
  shape.sigma = shape.support.density();
  return shape;
}

LargeL2Step large_l2_step(const Family& f) {
  auto shape = flat_shape(f);
  if (!shape) throw DomainError("large_l2_step: density function is not of the form delta 1_S");
  LargeL2Step r;
  const BigInt raw = family_raw_count(f);
  r.lambda = Rational(raw) * pow2(-4 * f.dim());
  const Rational& delta = shape->delta;
  const Rational& sigma = shape->sigma;
  r.lambda_floor = delta * delta * delta * sigma * sigma / 2;
  if (r.lambda >= r.lambda_floor) {
    r.floor_branch = true;
    return r;
  }
  auto dump = [&] { return dump_family(f); };
  if (f.dim() == 0) throw FalsificationError("large_l2_step: no floor on the trivial group", dump());
  SupResult sup = sup_nontrivial(wht_indicator(shape->support));
  r.gamma = sup.character;
  r.coefficient = sup.magnitude;
  if (sup.magnitude < delta * sigma / 2) {
    throw FalsificationError("large_l2_step: Lambda < delta^3 sigma^2/2 but sup |hat 1_S| = " +
                                 to_string(sup.magnitude) + " < delta sigma/2",
                             dump());
  }
  const Subgroup2 sub = subgroup_from_character(ElemZ2(f.dim(), sup.character));
  const Code h0 = sub.least_outside();
  std::size_t s0 = 0, s1 = 0;
  for (Code h : shape->support.members()) (sub.contains(h) ? s0 : s1) += 1;
  const Code h1 = s0 >= s1 ? 0 : h0;

  // Trim every surviving fibre to ceil(delta |H'|) elements of its densest coset.
  BigInt need_big = ceil_q(delta * Rational(static_cast<unsigned long>(sub.size())));
  const auto need = static_cast<std::size_t>(need_big.get_ui());
  std::vector<Code> shifts(sub.size(), 0);
  std::vector<std::size_t> keep(sub.size(), 0);
  for (Code c = 0; c < sub.size(); ++c) {
    const Code h = h1 ^ sub.embed(c);
    if (f.fibre(h).empty()) continue;
    auto [in, out] = split_counts(f.fibre(h), sup.character);
    shifts[c] = in >= out ? 0 : h0;
    if (std::max(in, out) < need) {
      throw FalsificationError("large_l2_step: best coset of a fibre holds fewer than delta |H'| points", dump());
    }
    keep[c] = need;
  }
  Family next = restrict_family(f, sub, h1, shifts, &keep);
  auto after_shape = flat_shape(next);
  auto cert = make_certificate(IncrementKind::large_l2_step, f, next, sub, h1, shifts, 0);
  cert.gamma = sup.character;
  cert.sigma_before = sigma;
  cert.delta_before = delta;
  cert.sigma_after = after_shape->sigma;
  cert.delta_after = after_shape->sigma == 0 ? delta : after_shape->delta;
  // Density gain delta' sigma' - delta sigma >= delta sigma delta / 2.
  cert.claimed_gain = delta * sigma * delta / 2;
  enforce(cert, f, next, "large_l2_step");
  r.step = IncrementStep{std::move(next), std::move(cert)};
  return r;
}

LargeL2Drive large_l2_drive(const Family& f, unsigned bits) {
  auto shape = flat_shape(f);
  if (!shape) throw DomainError("large_l2_drive: density function is not of the form delta 1_S");
  LargeL2Drive d;
  d.families.push_back(f);
  d.lambda_input = Rational(family_raw_count(f)) * pow2(-4 * f.dim());
  if (shape->sigma == 0) {
    d.step_bound = 1;
  } else {
    Rational b = 2 / shape->delta * ln_upper(1 / shape->sigma, bits);
    d.step_bound = ceil_q(b) + 1;
  }
  Family cur = f;
  while (true) {
    LargeL2Step s = large_l2_step(cur);
    if (s.floor_branch) {
      d.final_floor = s.lambda_floor;
      break;
    }
    d.certificates.push_back(s.step->certificate);
    cur = std::move(s.step->family);
    d.families.push_back(cur);
    ++d.steps;
    if (BigInt(static_cast<unsigned long>(d.steps)) > d.step_bound) {
      throw FalsificationError("large_l2_drive: step bound " + d.step_bound.get_str() + " exceeded",
                               dump_family(f));
    }
  }
  d.final_family = cur;
  d.chain_floor = d.final_floor * pow2(-4 * static_cast<long>(d.steps));
  for (std::size_t i = 0; i + 1 < d.families.size(); ++i) {
    if (d.certificates[i].before.raw_count < d.certificates[i].after.raw_count) {
      throw FalsificationError("large_l2_drive: broken count chain at step " + std::to_string(i), dump_family(f));
    }
  }
  if (d.chain_floor > d.lambda_input) {
    throw FalsificationError("large_l2_drive: chained floor " + to_string(d.chain_floor) + " exceeds Lambda " +
                                 to_string(d.lambda_input),
                             dump_family(f));
  }
  return d;
}

DyadicSelection dyadic_select(const Family& f) {
  const Rational alpha = f.density();
  if (alpha == 0) throw DomainError("dyadic_select: family has density 0");
  DyadicSelection r;
  const Rational ms = density_function(f).mean_square();
  r.k = ms / (alpha * alpha);
  r.k_below_two = r.k < 2;
  r.q = 1 + bitlength(ceil_q(r.k));
  const int top = ceil_log2_inverse(alpha);

  std::vector<std::vector<Code>> levels(top + 1);
  for (Code h = 0; h < f.order(); ++h) {
    Rational v = f.density_fn(h);
    for (int i = 0; i <= top; ++i) {
      if (pow2(-(i + 1)) <= v && v <= pow2(-i)) levels[i].push_back(h);
    }
  }
  // Maximize 2^{-(2+1/q) i} P(S_i); compare the q-th powers P^q 2^{-(2q+1) i}.
  const long q = static_cast<long>(r.q);
  Rational best_value = -1;
  for (int i = 0; i <= top; ++i) {
    Rational p = Rational(static_cast<unsigned long>(levels[i].size())) * pow2(-f.dim());
    r.level_densities.push_back(p);
    Rational v = pow_int(p, r.q) * pow2(-(2 * q + 1) * i);
    if (v > best_value) {
      best_value = v;
      r.level = i;
    }
  }
  const int i = r.level;
  const Rational p = r.level_densities[i];
  r.level_set = Z2Set(f.dim(), levels[i]);
  r.delta = pow2(-(i + 1));

  // (2 q alpha^{-1/q}) 2^{-(2+1/q) i} P >= 3 ||f||^2 / 4, raised to the q-th power:
  // alpha^{-1} 2^{-i} >= (3 ||f||^2 2^{2i} / (8 q P))^q.
  r.eqn_j_holds = (1 / alpha) * pow2(-i) >= pow_int(3 * ms * pow2(2 * i) / (8 * Rational(q) * p), r.q);

  BigInt need_big = ceil_q(r.delta * pow2(f.dim()));
  const auto need = static_cast<std::size_t>(need_big.get_ui());
  std::vector<std::size_t> keep(f.order(), 0);
  for (Code h : r.level_set.members()) keep[h] = need;
  Family sub = restrict_family(f, Subgroup2::whole(f.dim()), 0, std::vector<Code>(f.order(), 0), &keep);
  r.trimmed_delta = Rational(static_cast<unsigned long>(need)) * pow2(-f.dim());
  r.subfamily = sub;
  // The subfamily is smaller, so the claimed "gain" is the (negative) density change.
  r.certificate = make_certificate(IncrementKind::subfamily, f, sub, Subgroup2::whole(f.dim()), 0,
                                   std::vector<Code>(f.order(), 0), sub.density() - alpha);
  enforce(r.certificate, f, sub, "dyadic_select");
  return r;
}

}  // namespace rothz4
