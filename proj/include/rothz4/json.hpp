#pragma once

#include <json.hpp>

#include "rothz4/group.hpp"
#include "rothz4/rational.hpp"

namespace rothz4 {

// Insertion-ordered so that emitted traces are byte-stable.
using Json = nlohmann::ordered_json;

inline constexpr const char* kTraceSchema = "rothz4.trace/1";
inline constexpr const char* kCertificateSchema = "rothz4.certificate/1";

// [num, den] with machine integers when they fit, decimal strings otherwise.
Json rational_json(const Rational& x);
Rational rational_from_json(const Json& j);

Json subgroup_json(const Subgroup2& h);
Subgroup2 subgroup_from_json(const Json& j);

// {"m": m, "fibres": {"<h>": ["<a>", ...], ...}} listing nonempty fibres only.
Json family_json(const Family& f);
Family family_from_json(const Json& j);

Json z4set_json(const Z4Set& a);
Z4Set z4set_from_json(const Json& j);
Json z2set_json(const Z2Set& a);
Z2Set z2set_from_json(const Json& j);

}  // namespace rothz4
