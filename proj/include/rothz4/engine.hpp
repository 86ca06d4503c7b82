#pragma once

// Instrumented drivers. Every branch decision is an exact rational comparison
// and is written to a JSON-lines trace that `verify_trace` can replay.

#include <optional>
#include <string>
#include <vector>

#include "rothz4/group.hpp"
#include "rothz4/increment.hpp"
#include "rothz4/json.hpp"
#include "rothz4/rational.hpp"
#include "rothz4/regularize.hpp"

namespace rothz4 {

// Overrides for the explicit branch constants; unset means "as computed".
struct BranchThresholds {
  std::optional<Rational> large_fibre;  // default 4 K alpha
  std::optional<Rational> small_fibre;  // default alpha / 4
  std::optional<Rational> asm1;         // default L alpha^3
  std::optional<Rational> asm23;        // default L alpha^2 / 4K
};

struct EngineConfig {
  Rational c_s = 1;
  Rational bsg_min_subgroup_density = Rational(1, 8);
  unsigned bits = 8;
  int max_steps = 64;
  std::optional<Rational> l_override;
  BranchThresholds thresholds;

  void validate() const;
  Json to_json() const;
  static EngineConfig from_json(const Json& j);
};

class Trace {
 public:
  void add(Json event);
  const std::vector<Json>& events() const { return events_; }
  std::string jsonl() const;
  // Appends all events of another trace.
  void append(const Trace& other);

 private:
  std::vector<Json> events_;
};

// One increment as a trace event: certificate plus both families.
Json increment_event(const std::string& origin, const IncrementCertificate& c, const Family& before,
                     const Family& after);

struct FloorOutcome {
  std::optional<Rational> floor;  // certified Lambda(F) >= floor
  Trace trace;
  std::vector<std::string> flags;  // proof-claimed inequalities that failed numerically
};

struct SmallMsOutcome {
  std::optional<IncrementStep> increment;
  FloorOutcome result;  // when no increment
};

FloorOutcome high_energy_step(const Family& f, const Z2Set& s, const Rational& c, const Rational& k,
                              const Rational& l, const EngineConfig& cfg);
SmallMsOutcome small_ms_step(const Family& f, const Rational& l, const EngineConfig& cfg);

// Largest L >= 1 on the 2^-bits grid with upper(C_S L^3 ln^2 L) <= lower(ln(1/alpha)/2).
Rational solve_l(const Rational& c_s, const Rational& alpha, unsigned bits);

struct DriverResult {
  Trace trace;
  bool completed = false;   // false if max_steps ran out
  Rational global_floor;    // certified Lambda(A) >= global_floor (0 if incomplete)
  Rational lambda_input;    // exact, for the soundness check
  long codim = 0;           // total index exponent along the chain
  std::size_t steps = 0;
};

DriverResult rml_driver(const Z4Set& a, const EngineConfig& cfg);
DriverResult weighted_driver(const Z4Set& a, const EngineConfig& cfg);

struct VerifyReport {
  bool ok = true;
  std::string message;
  std::size_t certificates = 0;
};
// Re-checks every certificate, the final floor, and replays the run from the
// header, comparing the regenerated trace line by line.
VerifyReport verify_trace(const std::string& jsonl);

}  // namespace rothz4
