#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "riskdiv/error.hpp"

namespace riskdiv {

// Finite-support integer income distribution. Probabilities are stored densely
// over [support_min, support_max]; outcomes inside the range may carry zero mass.
class IncomeDistribution {
 public:
  IncomeDistribution() = default;

  int support_min() const { return support_min_; }
  int support_max() const { return support_max_; }
  int width() const { return support_max_ - support_min_ + 1; }
  double prob(int k) const;
  const std::vector<double>& probs() const { return probs_; }

  // P(Z < 0).
  double ruin_mass() const;
  // E max(Z, 0).
  double expected_positive() const;
  // Outcomes with strictly positive mass, ascending.
  std::vector<int> outcomes() const;
  std::map<int, double> to_map() const;

  bool operator==(const IncomeDistribution& other) const = default;

  friend IncomeDistribution validate_distribution(const std::map<int, double>& raw);

 private:
  int support_min_ = 0;
  int support_max_ = 0;
  std::vector<double> probs_;
};

IncomeDistribution validate_distribution(const std::map<int, double>& raw);

// P(Z = 1) = p, P(Z = -claim) = 1 - p.
IncomeDistribution two_point_distribution(double p, int claim);

enum class Utility { Exponential, Power, Logarithmic, RiskNeutral };

const char* utility_name(Utility u);
Utility parse_utility(const std::string& name);

struct ProblemConfig {
  double beta = 0.9;
  double gamma = -1.0;
  Utility utility = Utility::Exponential;
  IncomeDistribution dist;
  int x_max = 0;
  // 0 selects the smallest depth whose tail bracket is narrower than tail_eps.
  int depth = 0;
  double tail_eps = 1e-8;
  int s_grid_points = 512;
  std::uint64_t seed = 0;
  // Initial accumulated dividends for power and log utility.
  double y0 = 0.0;

  // Range checks that do not need a solve. Barrier-versus-cap checks happen in
  // the solvers because the bound is a by-product of the tail computation.
  void validate() const;
};

struct SurplusState {
  int x = 0;
  bool ruined() const { return x < 0; }
  int max_action() const { return x < 0 ? 0 : x; }
};

int step(int x, int a, int z);

double utility(Utility u, double gamma, double w);
double certainty_equivalent(Utility u, double gamma, double expected_utility);
// -U''(y) / U'(y).
double arrow_pratt(Utility u, double gamma, double y);

}  // namespace riskdiv
