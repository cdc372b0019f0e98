#pragma once

#include <cstddef>
#include <ostream>
#include <string>

struct BenchArgs {
  std::string suite;
  std::string seed;
  std::size_t vertices = 5000;
  std::size_t candidates = 256;
};

/// Writes one TSV table for the chosen suite; returns the process exit code.
int run_bench(const BenchArgs& args, std::ostream& out);
