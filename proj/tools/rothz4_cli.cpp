#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "rothz4/bench.hpp"
#include "rothz4/constructions.hpp"
#include "rothz4/counting.hpp"
#include "rothz4/engine.hpp"
#include "rothz4/errors.hpp"
#include "rothz4/increment.hpp"
#include "rothz4/random.hpp"
#include "rothz4/regularize.hpp"

using namespace rothz4;

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path + "'");
  out << text;
}

// "random:<n>" draws a seeded set; anything else is a set file.
Z4Set load_z4(const std::string& arg, std::uint64_t seed, double density) {
  if (arg.rfind("random:", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(arg.substr(7));
    } catch (const std::exception&) {
      throw DomainError("malformed random set spec '" + arg + "'");
    }
    if (n < 0 || n > 6) throw DomainError("random set dimension must lie in [0, 6]");
    Rng rng(seed);
    return random_z4set(n, density, rng);
  }
  AnySet s = parse_set(read_input(arg));
  if (auto* z4 = std::get_if<Z4Set>(&s)) return *z4;
  throw DomainError("'" + arg + "' is a Z_2^m set; a Z_4^n set is required");
}

Z2Set load_z2(const std::string& path) {
  AnySet s = parse_set(read_input(path));
  if (auto* z2 = std::get_if<Z2Set>(&s)) return *z2;
  throw DomainError("'" + path + "' is a Z_4^n set; a Z_2^m set is required");
}

Code parse_bits(const std::string& s, int m) {
  if (static_cast<int>(s.size()) != m) {
    throw DomainError("character '" + s + "' must have " + std::to_string(m) + " binary digits");
  }
  Code c = 0;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw DomainError("character '" + s + "' is not a binary string");
    c = (c << 1) | static_cast<Code>(ch - '0');
  }
  return c;
}

Rational parse_q(const std::string& s) {
  try {
    return parse_rational(s);
  } catch (const std::exception&) {
    throw DomainError("malformed rational '" + s + "'");
  }
}

std::string free_line(const ConstructionRecord& r) {
  return std::string("free: ") + (r.verified_free ? "true" : "false") + ", size " + std::to_string(r.size) + "\n";
}

int cmd_count(const std::string& file, const std::string& method, std::uint64_t seed, double density) {
  Z4Set a = load_z4(file, seed, density);
  std::vector<LambdaReport> reports;
  if (method == "naive" || method == "all") reports.push_back(lambda_naive(a));
  if (method == "fourier" || method == "all") reports.push_back(lambda_fourier(a));
  if (method == "fibre" || method == "all") {
    LambdaReport r = lambda_family(fibre_decompose(a));
    // Family count is normalized by |H|^4 = 16^n already.
    r.method = CountMethod::fibre;
    reports.push_back(r);
  }
  std::cout << "n = " << a.dim() << ", |A| = " << a.size() << ", alpha = " << to_string(a.density()) << "\n";
  for (const auto& r : reports) {
    std::cout << method_name(r.method) << ": lambda = " << to_string(r.lambda) << ", raw = " << r.raw_count.get_str()
              << "\n";
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].raw_count != reports[0].raw_count) throw std::logic_error("count methods disagree");
  }
  std::cout << "trivial progressions in A: " << trivial_pairs_in(a).get_str() << "\n";
  return 0;
}

int cmd_spectrum(const std::string& file) {
  AnySet s = parse_set(read_input(file));
  if (auto* z4 = std::get_if<Z4Set>(&s)) std::cout << spectrum_json(dft4(*z4)) << "\n";
  else std::cout << spectrum_json(wht_indicator(std::get<Z2Set>(s))) << "\n";
  return 0;
}

int cmd_increment(const std::string& file, const std::string& kind, const std::string& gamma, const std::string& out) {
  Family f = parse_family(read_input(file));
  Code g = parse_bits(gamma, f.dim());
  if (g == 0) throw DomainError("the character must be nonzero");
  IncrementStep step = kind == "fibre" ? fibre_increment(f, g) : density_fn_increment(f, g);
  if (auto err = check_certificate(step.certificate, f, step.family)) {
    throw FalsificationError("increment certificate fails: " + *err, family_json(f).dump());
  }
  if (!out.empty()) write_output(out, format_family(step.family));
  Json j{{"certificate", certificate_json(step.certificate)}, {"family", family_json(step.family)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_regularize(const std::string& file, const std::string& c, const std::string& eps, const std::string& min_d) {
  Z2Set a = load_z2(file);
  const Rational cq = parse_q(c), eq = parse_q(eps), dq = parse_q(min_d);
  if (cq <= 0 || cq > 1) throw DomainError("--c must lie in (0, 1]");
  auto inner = bsg_oracle(a, cq, dq);
  if (!inner) {
    std::cout << Json{{"found", false}}.dump(2) << "\n";
    return 0;
  }
  UniformizeResult u = uniformize(a, eq, *inner);
  Json steps = Json::array();
  for (const auto& s : u.steps) {
    steps.push_back(Json{{"gamma", s.gamma}, {"shift", z2_string(s.shift, a.dim())}, {"density", rational_json(s.density)}});
  }
  Json j{{"found", true},
         {"energy", rational_json(energy(a))},
         {"oracle", bsg_json(*inner)},
         {"uniformized", bsg_json(u.result)},
         {"local_set", z2set_json(u.result.local_set)},
         {"steps", steps},
         {"step_bound", u.step_bound.get_str()}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_run(const std::string& file, const std::string& driver, const std::string& config, const std::string& out,
            std::uint64_t seed, double density) {
  Z4Set a = load_z4(file, seed, density);
  EngineConfig cfg;
  if (!config.empty()) {
    Json j;
    try {
      j = Json::parse(read_input(config));
    } catch (const Json::parse_error& e) {
      throw DomainError(std::string("malformed config: ") + e.what());
    }
    cfg = EngineConfig::from_json(j);
  }
  DriverResult r = driver == "rml" ? rml_driver(a, cfg) : weighted_driver(a, cfg);
  write_output(out, r.trace.jsonl());
  std::ostream& summary = out.empty() || out == "-" ? std::cerr : std::cout;
  const Json& last = r.trace.events().back();
  summary << "status: " << last.value("status", "?") << ", steps " << r.steps << ", codim " << r.codim << "\n"
          << "certified floor: " << to_string(r.global_floor) << "\n"
          << "exact lambda:    " << to_string(r.lambda_input) << "\n";
  return last.value("status", "") == "floor" ? 0 : 1;
}

int cmd_construct(const std::string& what, bool verify_free, const std::string& out) {
  ConstructionRecord r;
  if (what == "a0") {
    r = record(a0(), Origin::a0);
  } else if (what.rfind("moser:", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(what.substr(6));
    } catch (const std::exception&) {
      throw DomainError("malformed construction '" + what + "'");
    }
    r = record(moser(n), Origin::moser);
  } else if (what.rfind("product:", 0) == 0) {
    const std::string rest = what.substr(8);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw DomainError("product needs two set files: product:<f1>,<f2>");
    r = record(product(load_z4(rest.substr(0, comma), 0, 0), load_z4(rest.substr(comma + 1), 0, 0)), Origin::product);
  } else {
    throw DomainError("unknown construction '" + what + "' (expected a0, moser:<n> or product:<f1>,<f2>)");
  }
  if (verify_free) {
    if (!out.empty()) write_output(out, format_set(r.set));
    std::cout << free_line(r);
    return r.verified_free ? 0 : 1;
  }
  write_output(out, format_set(r.set));
  return 0;
}

int cmd_search(int n, std::uint64_t budget, const std::string& out) {
  SearchOptions opt;
  opt.node_budget = budget;
  ConstructionRecord r = max_free_search(n, opt);
  std::string text = "# size " + std::to_string(r.size) + ", " + (r.proven ? "proven maximum" : "best found") +
                     ", " + std::to_string(r.nodes) + " nodes\n" + format_set(r.set);
  write_output(out, text);
  return 0;
}

int cmd_verify(const std::string& file) {
  const std::string text = read_input(file);
  const auto start = text.find_first_not_of(" \t\r\n");
  if (start != std::string::npos && text[start] == '{') {
    VerifyReport rep = verify_trace(text);
    std::cout << (rep.ok ? "" : "verify failed: ") << rep.message << "\n";
    return rep.ok ? 0 : 1;
  }
  AnySet s = parse_set(text);
  auto* z4 = std::get_if<Z4Set>(&s);
  if (z4 == nullptr) throw DomainError("verify expects a trace or a Z_4^n set file");
  ConstructionRecord r = record(*z4, Origin::search);
  std::cout << free_line(r);
  if (!r.verified_free) {
    auto w = has_proper_progression(*z4);
    std::cout << "progression: x = " << z4_string(w->first, z4->dim()) << ", d = " << z4_string(w->second, z4->dim())
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact progression counts, certified density increments and progression-free sets in Z_4^n"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  double density = 0.5;

  std::string count_file, count_method = "all";
  auto* count = app.add_subcommand("count", "Lambda(A) and raw progression counts");
  count->add_option("set", count_file, "set file, '-' or random:<n>")->required();
  count->add_option("--method", count_method)->check(CLI::IsMember({"naive", "fourier", "fibre", "all"}));
  count->add_option("--seed", seed);
  count->add_option("--density", density)->check(CLI::Range(0.0, 1.0));

  std::string spec_file;
  auto* spectrum = app.add_subcommand("spectrum", "exact Fourier spectrum as JSON");
  spectrum->add_option("set", spec_file)->required();

  std::string inc_file, inc_kind, inc_gamma, inc_out;
  auto* increment = app.add_subcommand("increment", "one certified density-increment step on a family");
  increment->add_option("family", inc_file)->required();
  increment->add_option("--kind", inc_kind, "fibre: every fibre; density: the density function")
      ->required()
      ->check(CLI::IsMember({"fibre", "density"}));
  increment->add_option("--gamma", inc_gamma, "nonzero character as a binary string")->required();
  increment->add_option("--out", inc_out, "write the new family here");

  std::string reg_file, reg_c, reg_eps = "1/4", reg_min = "1/8";
  auto* regularize = app.add_subcommand("regularize", "dense subgroup coset, then the uniformization loop");
  regularize->add_option("set", reg_file, "Z_2^m set file")->required();
  regularize->add_option("--c", reg_c, "energy constant c")->required();
  regularize->add_option("--epsilon", reg_eps);
  regularize->add_option("--min-density", reg_min, "least subgroup density searched");

  std::string run_file, run_driver = "weighted", run_config, run_out;
  auto* run = app.add_subcommand("run", "drive a set to a certified progression-count floor");
  run->add_option("set", run_file, "set file, '-' or random:<n>")->required();
  run->add_option("--driver", run_driver)->check(CLI::IsMember({"rml", "weighted"}));
  run->add_option("--config", run_config, "JSON engine configuration");
  run->add_option("--out", run_out, "trace file (default stdout)");
  run->add_option("--seed", seed);
  run->add_option("--density", density)->check(CLI::Range(0.0, 1.0));

  std::string cons_what, cons_out;
  bool cons_verify = false;
  auto* construct = app.add_subcommand("construct", "a0, moser:<n> or product:<f1>,<f2>");
  construct->add_option("what", cons_what)->required();
  construct->add_flag("--verify-free", cons_verify);
  construct->add_option("--out", cons_out);

  int search_n = 0;
  std::uint64_t search_budget = SearchOptions{}.node_budget;
  std::string search_out;
  auto* search = app.add_subcommand("search", "largest progression-free set in Z_4^n, n <= 3");
  search->add_option("n", search_n)->required();
  search->add_option("--budget", search_budget, "node budget per root branch");
  search->add_option("--out", search_out);

  std::string verify_file;
  auto* verify = app.add_subcommand("verify", "re-check a trace, or check a set file for progressions");
  verify->add_option("file", verify_file)->required();

  int bench_m = 16, bench_n = 7;
  auto* bench = app.add_subcommand("bench", "serial vs parallel kernel timings");
  bench->add_option("--seed", seed);
  bench->add_option("--max-m", bench_m)->check(CLI::Range(8, 22));
  bench->add_option("--max-n", bench_n)->check(CLI::Range(2, 8));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*count) return cmd_count(count_file, count_method, seed, density);
    if (*spectrum) return cmd_spectrum(spec_file);
    if (*increment) return cmd_increment(inc_file, inc_kind, inc_gamma, inc_out);
    if (*regularize) return cmd_regularize(reg_file, reg_c, reg_eps, reg_min);
    if (*run) return cmd_run(run_file, run_driver, run_config, run_out, seed, density);
    if (*construct) return cmd_construct(cons_what, cons_verify, cons_out);
    if (*search) return cmd_search(search_n, search_budget, search_out);
    if (*verify) return cmd_verify(verify_file);
    if (*bench) {
      auto rows = run_bench(seed, bench_m, bench_n);
      std::cout << bench_table(rows);
      return 0;
    }
  } catch (const FalsificationError& e) {
    std::cerr << "FALSIFIED: " << e.what() << "\n";
    if (!e.dump().empty()) std::cerr << "input: " << e.dump() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
