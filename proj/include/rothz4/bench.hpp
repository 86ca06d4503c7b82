#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rothz4 {

struct BenchRow {
  std::string kernel;
  int size = 0;  // m for Z_2^m kernels, n for Z_4^n kernels
  double serial_ms = 0;
  double parallel_ms = 0;
  bool agree = false;
};

// Times serial vs OpenMP kernels on seeded random inputs.
std::vector<BenchRow> run_bench(std::uint64_t seed, int max_m = 14, int max_n = 6);
std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace rothz4
