#include "riskdiv/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace riskdiv {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NoRuinRisk: return "NoRuinRisk";
    case ErrorCode::IllegalAction: return "IllegalAction";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::UnknownSubcommand: return "UnknownSubcommand";
    case ErrorCode::CapTooSmall: return "CapTooSmall";
    case ErrorCode::DepthTooSmall: return "DepthTooSmall";
    case ErrorCode::InadmissiblePolicy: return "InadmissiblePolicy";
    case ErrorCode::PolicyUndefined: return "PolicyUndefined";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UndefinedAction: return "UndefinedAction";
    case ErrorCode::NotABand: return "NotABand";
    case ErrorCode::BarrierViolation: return "BarrierViolation";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

bool is_invariant_error(ErrorCode code) {
  return code == ErrorCode::NotABand || code == ErrorCode::BarrierViolation ||
         code == ErrorCode::InvariantViolation || code == ErrorCode::MaxIterations;
}

double IncomeDistribution::prob(int k) const {
  if (k < support_min_ || k > support_max_) return 0.0;
  return probs_[static_cast<size_t>(k - support_min_)];
}

double IncomeDistribution::ruin_mass() const {
  double m = 0.0;
  for (int k = support_min_; k <= support_max_ && k < 0; ++k) m += prob(k);
  return m;
}

double IncomeDistribution::expected_positive() const {
  double m = 0.0;
  for (int k = std::max(1, support_min_); k <= support_max_; ++k) m += prob(k) * k;
  return m;
}

std::vector<int> IncomeDistribution::outcomes() const {
  std::vector<int> out;
  for (int k = support_min_; k <= support_max_; ++k)
    if (prob(k) > 0.0) out.push_back(k);
  return out;
}

std::map<int, double> IncomeDistribution::to_map() const {
  std::map<int, double> m;
  for (int k = support_min_; k <= support_max_; ++k)
    if (prob(k) > 0.0) m[k] = prob(k);
  return m;
}

IncomeDistribution validate_distribution(const std::map<int, double>& raw) {
  if (raw.empty()) throw Error(ErrorCode::ValidationError, "empty income distribution");
  double total = 0.0;
  for (const auto& [k, q] : raw) {
    if (!std::isfinite(q)) throw Error(ErrorCode::ValidationError, "non-finite probability");
    if (q < 0.0) {
      std::ostringstream os;
      os << "q[" << k << "] = " << q << " is negative";
      throw Error(ErrorCode::NegativeMass, os.str());
    }
    total += q;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total;
    throw Error(ErrorCode::NotNormalized, os.str());
  }

  // Trim zero-mass ends so the dense range is tight.
  int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
  for (const auto& [k, q] : raw) {
    if (q > 0.0) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  }
  IncomeDistribution d;
  d.support_min_ = lo;
  d.support_max_ = hi;
  d.probs_.assign(static_cast<size_t>(hi - lo + 1), 0.0);
  // Sums within summation round-off of 1 are left alone so validation is idempotent.
  const double slack = 4.0 * static_cast<double>(raw.size()) * std::numeric_limits<double>::epsilon();
  const double scale = std::fabs(total - 1.0) <= slack ? 1.0 : total;
  for (const auto& [k, q] : raw)
    if (q > 0.0) d.probs_[static_cast<size_t>(k - lo)] = q / scale;
  if (d.ruin_mass() <= 0.0)
    throw Error(ErrorCode::NoRuinRisk, "income is never negative, ruin is impossible");
  return d;
}

IncomeDistribution two_point_distribution(double p, int claim) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::ValidationError, "preset p must lie in (0,1)");
  if (claim < 1) throw Error(ErrorCode::ValidationError, "preset claim must be >= 1");
  return validate_distribution({{1, p}, {-claim, 1.0 - p}});
}

const char* utility_name(Utility u) {
  switch (u) {
    case Utility::Exponential: return "exponential";
    case Utility::Power: return "power";
    case Utility::Logarithmic: return "log";
    case Utility::RiskNeutral: return "neutral";
  }
  return "?";
}

Utility parse_utility(const std::string& name) {
  if (name == "exponential" || name == "exp") return Utility::Exponential;
  if (name == "power") return Utility::Power;
  if (name == "log" || name == "logarithmic") return Utility::Logarithmic;
  if (name == "neutral" || name == "risk_neutral") return Utility::RiskNeutral;
  throw Error(ErrorCode::ValidationError, "unknown utility '" + name + "'");
}

void ProblemConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ValidationError, m); };
  if (!(beta > 0.0 && beta < 1.0)) fail("beta must lie in (0,1)");
  if (dist.probs().empty()) fail("distribution is missing");
  if (x_max < 0) fail("x_max must be nonnegative");
  if (depth < 0) fail("depth must be nonnegative (0 = automatic)");
  if (!(tail_eps > 0.0)) fail("tail_eps must be positive");
  if (s_grid_points < 2) fail("s_grid_points must be at least 2");
  switch (utility) {
    case Utility::Exponential:
      if (!(gamma < 0.0) || !std::isfinite(gamma)) fail("exponential utility needs gamma < 0");
      break;
    case Utility::Power:
      if (!(gamma > 0.0 && gamma < 1.0)) fail("power utility needs gamma in (0,1)");
      if (y0 < 0.0) fail("y0 must be nonnegative");
      break;
    case Utility::Logarithmic:
      if (!(y0 > 0.0)) throw Error(ErrorCode::DomainError, "log utility needs y0 > 0");
      break;
    case Utility::RiskNeutral:
      break;
  }
}

int step(int x, int a, int z) {
  if (x < 0) {
    if (a != 0) throw Error(ErrorCode::IllegalAction, "only a = 0 is allowed after ruin");
    return x;
  }
  if (a < 0 || a > x) {
    std::ostringstream os;
    os << "action " << a << " outside {0.." << x << "}";
    throw Error(ErrorCode::IllegalAction, os.str());
  }
  return x - a + z;
}

double utility(Utility u, double gamma, double w) {
  switch (u) {
    case Utility::Exponential: return std::exp(gamma * w) / gamma;
    case Utility::Power:
      if (w < 0.0) throw Error(ErrorCode::DomainError, "power utility of negative wealth");
      return std::pow(w, gamma);
    case Utility::Logarithmic:
      if (!(w > 0.0)) throw Error(ErrorCode::DomainError, "log utility of nonpositive wealth");
      return std::log(w);
    case Utility::RiskNeutral: return w;
  }
  return w;
}

double certainty_equivalent(Utility u, double gamma, double v) {
  switch (u) {
    case Utility::Exponential:
      // U takes values in [1/gamma, 0) on w >= 0.
      if (!(gamma * v > 0.0)) throw Error(ErrorCode::DomainError, "outside the range of exponential utility");
      return std::log(gamma * v) / gamma;
    case Utility::Power:
      if (v < 0.0) throw Error(ErrorCode::DomainError, "outside the range of power utility");
      return std::pow(v, 1.0 / gamma);
    case Utility::Logarithmic: return std::exp(v);
    case Utility::RiskNeutral: return v;
  }
  return v;
}

double arrow_pratt(Utility u, double gamma, double y) {
  switch (u) {
    case Utility::Exponential: return -gamma;
    case Utility::Power: return (1.0 - gamma) / y;
    case Utility::Logarithmic: return 1.0 / y;
    case Utility::RiskNeutral: return 0.0;
  }
  return 0.0;
}

}  // namespace riskdiv
