#include <limits>

#include "rothz4/errors.hpp"
#include "rothz4/json.hpp"

namespace rothz4 {

namespace {

Json bigint_json(const BigInt& v) {
  if (v.fits_slong_p()) return Json(v.get_si());
  return Json(v.get_str());
}

BigInt bigint_from_json(const Json& j) {
  if (j.is_number_integer()) return BigInt(j.get<long>());
  if (j.is_string()) {
    BigInt v;
    if (v.set_str(j.get<std::string>(), 10) != 0) throw DomainError("malformed integer in JSON");
    return v;
  }
  throw DomainError("expected integer in JSON");
}

Code parse_code(const std::string& s, int dim, int base) {
  if (static_cast<int>(s.size()) != dim) throw DomainError("element '" + s + "' has wrong length");
  Code c = 0;
  for (char ch : s) {
    int d = ch - '0';
    if (d < 0 || d >= base) throw DomainError("invalid digit in '" + s + "'");
    c = c * static_cast<Code>(base) + static_cast<Code>(d);
  }
  return c;
}

int dim_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_number_integer()) {
    throw DomainError(std::string("missing integer field '") + key + "'");
  }
  return j[key].get<int>();
}

}  // namespace

Json rational_json(const Rational& x) {
  return Json::array({bigint_json(x.get_num()), bigint_json(x.get_den())});
}

Rational rational_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw DomainError("rational must be [num, den]");
  BigInt num = bigint_from_json(j[0]);
  BigInt den = bigint_from_json(j[1]);
  if (den <= 0) throw DomainError("rational denominator must be positive");
  Rational r(num, den);
  r.canonicalize();
  if (r.get_num() != num || r.get_den() != den) throw DomainError("rational not in lowest terms");
  return r;
}

Json subgroup_json(const Subgroup2& h) {
  Json basis = Json::array();
  for (Code b : h.basis()) basis.push_back(z2_string(b, h.ambient()));
  Json ann = Json::array();
  for (Code a : h.annihilator()) ann.push_back(z2_string(a, h.ambient()));
  return Json{{"m", h.ambient()}, {"basis", basis}, {"annihilator", ann}};
}

Subgroup2 subgroup_from_json(const Json& j) {
  int m = dim_field(j, "m");
  std::vector<Code> gens;
  for (const auto& b : j.at("basis")) gens.push_back(parse_code(b.get<std::string>(), m, 2));
  Subgroup2 h = Subgroup2::span_of(m, gens);
  if (subgroup_json(h) != j) throw DomainError("subgroup record is not in canonical form");
  return h;
}

Json family_json(const Family& f) {
  Json fibres = Json::object();
  for (Code h = 0; h < f.order(); ++h) {
    if (f.fibre(h).empty()) continue;
    Json members = Json::array();
    for (Code a : f.fibre(h).members()) members.push_back(z2_string(a, f.dim()));
    fibres[z2_string(h, f.dim())] = members;
  }
  return Json{{"m", f.dim()}, {"fibres", fibres}};
}

Family family_from_json(const Json& j) {
  int m = dim_field(j, "m");
  if (m < 0 || m > kMaxZ2Dim) throw DomainError("family dimension out of range");
  std::vector<std::vector<Code>> members(z2::order(m));
  for (const auto& [key, value] : j.at("fibres").items()) {
    Code h = parse_code(key, m, 2);
    for (const auto& a : value) members[h].push_back(parse_code(a.get<std::string>(), m, 2));
  }
  std::vector<Z2Set> fibres;
  for (auto& mm : members) fibres.emplace_back(m, std::move(mm));
  return Family(m, std::move(fibres));
}

Json z4set_json(const Z4Set& a) {
  Json members = Json::array();
  for (Code x : a.members()) members.push_back(z4_string(x, a.dim()));
  return Json{{"n", a.dim()}, {"members", members}};
}

Z4Set z4set_from_json(const Json& j) {
  int n = dim_field(j, "n");
  if (n < 0 || n > kMaxZ4Dim) throw DomainError("set dimension out of range");
  std::vector<Code> members;
  for (const auto& x : j.at("members")) members.push_back(parse_code(x.get<std::string>(), n, 4));
  return Z4Set(n, std::move(members));
}

Json z2set_json(const Z2Set& a) {
  Json members = Json::array();
  for (Code x : a.members()) members.push_back(z2_string(x, a.dim()));
  return Json{{"m", a.dim()}, {"members", members}};
}

Z2Set z2set_from_json(const Json& j) {
  int m = dim_field(j, "m");
  if (m < 0 || m > kMaxZ2Dim) throw DomainError("set dimension out of range");
  std::vector<Code> members;
  for (const auto& x : j.at("members")) members.push_back(parse_code(x.get<std::string>(), m, 2));
  return Z2Set(m, std::move(members));
}

}  // namespace rothz4
