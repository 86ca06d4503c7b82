#include "rothz4/bench.hpp"

#include <chrono>
#include <cstdio>

#include "rothz4/kernels.hpp"
#include "rothz4/random.hpp"

namespace rothz4 {

namespace {

template <class F>
double time_ms(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

std::vector<BenchRow> run_bench(std::uint64_t seed, int max_m, int max_n) {
  Rng rng(seed);
  std::vector<BenchRow> rows;
  for (int m = 8; m <= max_m; m += 2) {
    Z2Set b = random_z2set(m, 0.5, rng);
    std::vector<std::int64_t> v1(z2::order(m)), v2;
    for (Code x : b.members()) v1[x] = 1;
    v2 = v1;
    BenchRow r{"wht", m};
    r.serial_ms = time_ms([&] { serial::wht(v1); });
    r.parallel_ms = time_ms([&] { parallel::wht(v2); });
    r.agree = v1 == v2;
    rows.push_back(r);
  }
  for (int m = 6; m <= std::min(max_m, 10); m += 2) {
    Z2Set b = random_z2set(m, 0.5, rng);
    BenchRow r{"energy", m};
    std::uint64_t s = 0, p = 0;
    r.serial_ms = time_ms([&] { s = serial::energy_count(b); });
    r.parallel_ms = time_ms([&] { p = parallel::energy_count(b); });
    r.agree = s == p;
    rows.push_back(r);
  }
  for (int m = 2; m <= std::min(max_m, 6); ++m) {
    Family f = random_family(m, rng);
    BenchRow r{"quadruple", m};
    std::uint64_t s = 0, p = 0;
    r.serial_ms = time_ms([&] { s = serial::quadruple_count(f); });
    r.parallel_ms = time_ms([&] { p = parallel::quadruple_count(f); });
    r.agree = s == p;
    rows.push_back(r);
  }
  for (int n = 2; n <= max_n; ++n) {
    Z4Set a = random_z4set(n, 0.5, rng);
    BenchRow r{"progressions", n};
    std::uint64_t s = 0, p = 0;
    r.serial_ms = time_ms([&] { s = serial::progression_count(a); });
    r.parallel_ms = time_ms([&] { p = parallel::progression_count(a); });
    r.agree = s == p;
    rows.push_back(r);
    BenchRow d{"dft4", n};
    std::vector<GaussInt> ds, dp;
    d.serial_ms = time_ms([&] { ds = serial::dft4(a); });
    d.parallel_ms = time_ms([&] { dp = parallel::dft4(a); });
    d.agree = ds == dp;
    rows.push_back(d);
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::string out = "kernel        size   serial_ms  parallel_ms  speedup  agree\n";
  char line[128];
  for (const auto& r : rows) {
    double speedup = r.parallel_ms > 0 ? r.serial_ms / r.parallel_ms : 0;
    std::snprintf(line, sizeof line, "%-12s %5d %11.3f %12.3f %8.2f  %s\n", r.kernel.c_str(), r.size, r.serial_ms,
                  r.parallel_ms, speedup, r.agree ? "yes" : "NO");
    out += line;
  }
  return out;
}

}  // namespace rothz4
