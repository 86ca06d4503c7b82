#include <CLI11.hpp>

#include <iostream>

#include "rothz4/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP kernel timings"};
  std::uint64_t seed = 1;
  int max_m = 16, max_n = 7;
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--max-m", max_m, "largest Z_2^m size")->check(CLI::Range(8, 22));
  app.add_option("--max-n", max_n, "largest Z_4^n size")->check(CLI::Range(2, 8));
  CLI11_PARSE(app, argc, argv);

  auto rows = rothz4::run_bench(seed, max_m, max_n);
  std::cout << rothz4::bench_table(rows);
  for (const auto& r : rows) {
    if (!r.agree) return 1;
  }
  return 0;
}
