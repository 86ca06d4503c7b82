#include "rothz4/constructions.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <optional>

#include "rothz4/counting.hpp"
#include "rothz4/errors.hpp"

namespace rothz4 {

const char* origin_name(Origin o) {
  switch (o) {
    case Origin::a0: return "a0";
    case Origin::product: return "product";
    case Origin::moser: return "moser";
    case Origin::search: return "search";
  }
  return "?";
}

Z4Set a0() {
  static const int table[16][3] = {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 2}, {0, 2, 1}, {0, 2, 2},
                                   {1, 0, 0}, {1, 0, 2}, {1, 2, 0}, {1, 2, 2}, {2, 0, 1}, {2, 0, 2},
                                   {2, 1, 0}, {2, 1, 2}, {2, 2, 0}, {2, 2, 1}};
  std::vector<Code> members;
  for (const auto& t : table) members.push_back(ElemZ4::from_digits(t).code());
  return Z4Set(3, std::move(members));
}

Z4Set product(const Z4Set& a, const Z4Set& b) {
  const int n = a.dim() + b.dim();
  if (n > 16) throw DomainError("product: dimension " + std::to_string(n) + " exceeds 16");
  std::vector<Code> members;
  members.reserve(a.size() * b.size());
  for (Code x : a.members()) {
    for (Code y : b.members()) members.push_back((x << (2 * b.dim())) | y);
  }
  return Z4Set(n, std::move(members));
}

std::uint64_t moser_size(int n) {
  if (n < 1 || n > 20) throw DomainError("moser: n must lie in [1, 20]");
  const int k = n / 3;
  std::uint64_t binom = 1;
  for (int i = 0; i < k; ++i) binom = binom * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
  return binom << (n - k);
}

Z4Set moser(int n) {
  if (n < 1 || n > 12) throw DomainError("moser: n must lie in [1, 12]");
  const int k = n / 3;
  std::vector<Code> members;
  std::vector<int> digits(n, 0);
  // Odometer over {0,1,2}^n in lexicographic order.
  while (true) {
    if (std::count(digits.begin(), digits.end(), 1) == k) members.push_back(ElemZ4::from_digits(digits).code());
    int pos = n - 1;
    while (pos >= 0 && digits[pos] == 2) digits[pos--] = 0;
    if (pos < 0) break;
    ++digits[pos];
  }
  return Z4Set(n, std::move(members));
}

ConstructionRecord record(Z4Set set, Origin origin) {
  ConstructionRecord r;
  r.verified_free = !has_proper_progression(set).has_value();
  r.size = set.size();
  r.set = std::move(set);
  r.origin = origin;
  return r;
}

namespace {

using Mask = std::uint64_t;

struct SearchTables {
  int n = 0;
  int order = 0;
  // forbid[z][s]: points that cannot join a set containing both z and s.
  std::vector<Mask> forbid;
  // slice[k][v]: points whose k-th digit is v.
  std::vector<std::array<Mask, 4>> slice;
  int slice_cap = 0;  // maximum free size one dimension down
};

SearchTables make_tables(int n, int slice_cap) {
  SearchTables t;
  t.n = n;
  t.order = static_cast<int>(z4::order(n));
  t.slice_cap = slice_cap;
  t.forbid.assign(static_cast<std::size_t>(t.order) * t.order, 0);
  for (Code z = 0; z < static_cast<Code>(t.order); ++z) {
    for (Code s = 0; s < static_cast<Code>(t.order); ++s) {
      Mask m = 0;
      if (z4::twice(z4::sub(z, s)) != 0) {
        m |= Mask{1} << z4::sub(z4::twice(z), s);  // z in the middle
        m |= Mask{1} << z4::sub(z4::twice(s), z);  // s in the middle
      }
      for (Code y = 0; y < static_cast<Code>(t.order); ++y) {
        if (z4::twice(y) == z4::add(z, s) && z4::twice(z4::sub(y, s)) != 0) m |= Mask{1} << y;
      }
      t.forbid[z * t.order + s] = m;
    }
  }
  t.slice.resize(n);
  for (int k = 0; k < n; ++k) {
    t.slice[k].fill(0);
    for (Code x = 0; x < static_cast<Code>(t.order); ++x) t.slice[k][z4::digit(x, n, k)] |= Mask{1} << x;
  }
  return t;
}

struct Branch {
  const SearchTables* t = nullptr;
  std::uint64_t budget = 0;
  std::uint64_t nodes = 0;
  bool exhausted = false;
  std::size_t best_size = 0;
  std::vector<Code> best;
  std::vector<Code> cur;

  int bound(Mask chosen, Mask cand) const {
    int b = static_cast<int>(cur.size()) + std::popcount(cand);
    for (int k = 0; k < t->n; ++k) {
      int bk = static_cast<int>(cur.size());
      for (int v = 0; v < 4; ++v) {
        int room = t->slice_cap - std::popcount(chosen & t->slice[k][v]);
        bk += std::max(0, std::min(room, std::popcount(cand & t->slice[k][v])));
      }
      b = std::min(b, bk);
    }
    return b;
  }

  void dfs(Mask chosen, Mask cand) {
    if (exhausted) return;
    if (++nodes > budget) {
      exhausted = true;
      return;
    }
    if (cur.size() > best_size) {
      best_size = cur.size();
      best = cur;
    }
    if (bound(chosen, cand) <= static_cast<int>(best_size)) return;
    while (cand != 0) {
      const Code z = static_cast<Code>(std::countr_zero(cand));
      cand &= cand - 1;
      Mask next = cand;
      for (Code s : cur) next &= ~t->forbid[z * t->order + s];
      cur.push_back(z);
      dfs(chosen | (Mask{1} << z), next);
      cur.pop_back();
      if (exhausted) return;
      if (bound(chosen, cand) <= static_cast<int>(best_size)) return;
    }
  }
};

bool lex_better(const std::vector<Code>& a, const std::vector<Code>& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return a < b;
}

}  // namespace

ConstructionRecord max_free_search(int n, const SearchOptions& opt) {
  if (n < 1 || n > 3) throw DomainError("search: n = " + std::to_string(n) + " outside the supported range [1, 3]");
  int slice_cap = 1;
  std::uint64_t nodes = 0;
  if (n > 1) {
    ConstructionRecord below = max_free_search(n - 1, opt);
    if (!below.proven) throw DomainError("search: slice bound for n - 1 not proven within the node budget");
    slice_cap = static_cast<int>(below.size);
    nodes += below.nodes;
  }
  const SearchTables t = make_tables(n, slice_cap);
  // Translation invariance: some member may be taken to be 0. Root branches
  // fix the second-least member e; the rest lie above e.
  const std::size_t lower = n == 3 ? a0().size() : 1;
  std::vector<Branch> branches(t.order);
#pragma omp parallel for schedule(dynamic, 1)
  for (int e = 0; e < t.order; ++e) {
    Branch& br = branches[e];
    br.t = &t;
    br.budget = opt.node_budget;
    br.best_size = lower - 1;
    if (e == 0) {
      br.cur = {0};
      br.best_size = std::max<std::size_t>(br.best_size, 1);
      br.best = {0};
      continue;
    }
    Mask cand = e + 1 >= t.order ? 0 : (~Mask{0} << (e + 1));
    if (t.order < 64) cand &= (Mask{1} << t.order) - 1;
    cand &= ~t.forbid[static_cast<Code>(e) * t.order + 0];
    br.cur = {0, static_cast<Code>(e)};
    br.dfs((Mask{1} << e) | 1, cand);
  }
  std::vector<Code> best;
  bool proven = true;
  for (const Branch& br : branches) {
    nodes += br.nodes;
    proven = proven && !br.exhausted;
    if (!br.best.empty() && br.best_size >= lower && (best.empty() || lex_better(br.best, best))) best = br.best;
  }
  if (best.size() < lower && n == 3) {
    // Every branch was pruned at the known floor: the known set is optimal.
    const Z4Set known = a0();
    best.assign(known.members().begin(), known.members().end());
  }
  ConstructionRecord r = record(Z4Set(n, best), Origin::search);
  r.proven = proven;
  r.nodes = nodes;
  if (!r.verified_free) throw FalsificationError("search: result contains a proper progression", "");
  return r;
}

Interval log3_over_log4(unsigned bits) {
  return {ln_lower(3, bits) / ln_upper(4, bits), ln_upper(3, bits) / ln_lower(4, bits)};
}

}  // namespace rothz4
