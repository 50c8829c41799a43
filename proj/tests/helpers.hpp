#pragma once

#include <unistd.h>

#include <cstdlib>
#include <map>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "riskdiv/model.hpp"

namespace riskdiv::fixtures {

inline ProblemConfig exp_config(const IncomeDistribution& d, double beta, double gamma, int x_max, int depth = 0) {
  ProblemConfig c;
  c.utility = Utility::Exponential;
  c.dist = d;
  c.beta = beta;
  c.gamma = gamma;
  c.x_max = x_max;
  c.depth = depth;
  return c;
}

inline ProblemConfig power_config(const IncomeDistribution& d, double beta, double gamma, int x_max, int depth,
                                  int grid = 512) {
  ProblemConfig c;
  c.utility = Utility::Power;
  c.dist = d;
  c.beta = beta;
  c.gamma = gamma;
  c.x_max = x_max;
  c.depth = depth;
  c.s_grid_points = grid;
  return c;
}

inline IncomeDistribution always_minus_one() { return validate_distribution({{-1, 1.0}}); }

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("riskdiv_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Random distribution on a small support with at least one negative outcome.
inline IncomeDistribution random_distribution(std::mt19937_64& rng, int max_support) {
  std::uniform_int_distribution<int> width(2, max_support);
  std::uniform_int_distribution<int> low(-2, -1);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  int w = width(rng);
  int lo = low(rng);
  std::map<int, double> raw;
  double total = 0.0;
  for (int i = 0; i < w; ++i) {
    double m = mass(rng);
    raw[lo + i] = m;
    total += m;
  }
  for (auto& [k, q] : raw) q /= total;
  return validate_distribution(raw);
}

}  // namespace riskdiv::fixtures
