#include "rothz4/regularize.hpp"

#include <algorithm>

#include "rothz4/errors.hpp"
#include "rothz4/harmonic.hpp"
#include "rothz4/increment.hpp"

namespace rothz4 {

namespace {

Z2Set local_set(const Z2Set& a, const Subgroup2& sub, Code shift) {
  std::vector<Code> members;
  for (Code x : a.members()) {
    Code t = x ^ shift;
    if (sub.contains(t)) members.push_back(sub.coords(t));
  }
  std::sort(members.begin(), members.end());
  return Z2Set(sub.dim(), std::move(members));
}

void fill_uniformity(BsgResult& r) {
  r.local_density = r.local_set.density();
  r.sup_coeff = 0;
  if (r.local_set.dim() >= 1) r.sup_coeff = sup_nontrivial(wht_indicator(r.local_set)).magnitude;
  r.uniformity = r.local_density == 0 ? Rational(0) : r.sup_coeff / r.local_density;
}

struct Candidate {
  std::size_t index = 0;  // position in canonical subgroup order
  Code shift = 0;
  std::size_t count = 0;  // |A cap (x + H')|
  bool valid = false;
};

}  // namespace

Json bsg_json(const BsgResult& r) {
  const int m = r.subgroup.ambient();
  return Json{{"subgroup", subgroup_json(r.subgroup)},
              {"shift", z2_string(r.shift, m)},
              {"local_density", rational_json(r.local_density)},
              {"sup_coeff", rational_json(r.sup_coeff)},
              {"uniformity", rational_json(r.uniformity)}};
}

BsgResult bsg_at(const Z2Set& a, const Subgroup2& sub, Code shift) {
  BsgResult r;
  r.subgroup = sub;
  r.shift = shift;
  r.local_set = local_set(a, sub, shift);
  fill_uniformity(r);
  return r;
}

std::optional<BsgResult> bsg_oracle(const Z2Set& a, const Rational& c, const Rational& min_density) {
  const int m = a.dim();
  if (m > caps().subgroup_m) {
    throw DomainError("bsg_oracle refused: m = " + std::to_string(m) + " exceeds subgroup cap " +
                      std::to_string(caps().subgroup_m));
  }
  const auto subs = enumerate_subgroups(m);
  const Rational half_c = c / 2;
  std::vector<Candidate> best(subs.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t si = 0; si < static_cast<std::int64_t>(subs.size()); ++si) {
    const Subgroup2& sub = subs[static_cast<std::size_t>(si)];
    if (sub.density() < min_density) continue;
    std::vector<std::size_t> counts(z2::order(m), 0);
    for (Code x : a.members()) ++counts[sub.coset_min(x)];
    Candidate cand;
    for (Code x = 0; x < counts.size(); ++x) {
      if (sub.coset_min(x) != x) continue;
      Rational local = Rational(static_cast<unsigned long>(counts[x])) * pow2(-sub.dim());
      if (local < half_c) continue;
      if (!cand.valid || counts[x] > cand.count) cand = {static_cast<std::size_t>(si), x, counts[x], true};
    }
    best[static_cast<std::size_t>(si)] = cand;
  }

  std::optional<Candidate> winner;
  Rational winner_density;
  for (const Candidate& cand : best) {
    if (!cand.valid) continue;
    Rational d = Rational(static_cast<unsigned long>(cand.count)) * pow2(-subs[cand.index].dim());
    bool better = !winner || d > winner_density ||
                  (d == winner_density && subs[cand.index].dim() > subs[winner->index].dim());
    // Equal density and size: the earlier canonical subgroup is kept.
    if (better) {
      winner = cand;
      winner_density = d;
    }
  }
  if (!winner) return std::nullopt;
  return bsg_at(a, subs[winner->index], winner->shift);
}

UniformizeResult uniformize(const Z2Set& a, const Rational& epsilon, const BsgResult& inner, unsigned bits) {
  if (epsilon <= 0 || epsilon > 1) throw DomainError("uniformize: epsilon must lie in (0, 1]");
  if (inner.subgroup.ambient() != a.dim()) throw DomainError("uniformize: subgroup dimension mismatch");
  UniformizeResult out;
  Subgroup2 sub = inner.subgroup;
  Code x = inner.shift;
  Z2Set cur = local_set(a, sub, x);
  const Rational alpha0 = cur.density();
  out.step_bound = alpha0 == 0 ? BigInt(1) : ceil_q(ln_upper(1 / alpha0, bits) / epsilon) + 1;

  while (true) {
    Rational alpha = cur.density();
    if (cur.dim() == 0) break;
    SupResult sup = sup_nontrivial(wht_indicator(cur));
    if (sup.magnitude <= epsilon * alpha) break;

    RealFn2 ind = RealFn2::indicator(cur);
    LinfResult inc = linf_increment(ind, sup.character);  // in H_i-coordinates
    Subgroup2 next = sub.kernel_of(sup.character);
    const Code step_shift = sub.embed(inc.coset);
    std::vector<Code> members;
    for (Code c : cur.members()) {
      Code t = sub.embed(c) ^ step_shift;
      if (next.contains(t)) members.push_back(next.coords(t));
    }
    std::sort(members.begin(), members.end());
    Z2Set nxt(next.dim(), std::move(members));
    if (nxt.density() != inc.value) throw std::logic_error("uniformize: descended density mismatch");
    if (nxt.density() < alpha * (1 + epsilon)) {
      throw FalsificationError("uniformize: density grew by less than (1 + epsilon)",
                               z2set_json(a).dump());
    }
    out.steps.push_back({sup.character, step_shift, nxt.density()});
    sub = next;
    x ^= step_shift;
    cur = std::move(nxt);
    if (BigInt(static_cast<unsigned long>(out.steps.size())) > out.step_bound) {
      throw FalsificationError("uniformize: step bound " + out.step_bound.get_str() + " exceeded",
                               z2set_json(a).dump());
    }
  }
  out.result = bsg_at(a, sub, x);
  if (out.result.local_set != cur) throw std::logic_error("uniformize: accumulated shift does not reproduce A'");
  if (out.result.sup_coeff > epsilon * out.result.local_density) {
    throw std::logic_error("uniformize: exit condition violated");
  }
  return out;
}

}  // namespace rothz4
