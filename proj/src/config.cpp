#include "riskdiv/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace riskdiv {

namespace {

[[noreturn]] void parse_fail(const std::string& m) { throw Error(ErrorCode::ConfigParse, m); }

template <typename T>
T scalar(const YAML::Node& n, const char* key) {
  if (!n.IsScalar()) parse_fail(std::string("'") + key + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    parse_fail(std::string("'") + key + "' has the wrong type: " + n.Scalar());
  }
}

IncomeDistribution read_distribution(const YAML::Node& n) {
  if (!n.IsMap() || n.size() == 0) parse_fail("'distribution' must be a non-empty map of integer -> probability");
  std::map<int, double> raw;
  for (const auto& kv : n) {
    int k;
    try {
      k = kv.first.as<int>();
    } catch (const YAML::Exception&) {
      parse_fail("distribution key is not an integer: " + kv.first.Scalar());
    }
    if (raw.count(k)) parse_fail("duplicate distribution key " + std::to_string(k));
    raw[k] = scalar<double>(kv.second, "distribution");
  }
  return validate_distribution(raw);
}

IncomeDistribution read_preset(const YAML::Node& n) {
  if (!n.IsMap()) parse_fail("'distribution_preset' must be a map with p and claim");
  for (const auto& kv : n) {
    std::string key = kv.first.Scalar();
    if (key != "p" && key != "claim") parse_fail("unknown distribution_preset key '" + key + "'");
  }
  if (!n["p"] || !n["claim"]) parse_fail("'distribution_preset' needs p and claim");
  return two_point_distribution(scalar<double>(n["p"], "p"), scalar<int>(n["claim"], "claim"));
}

}  // namespace

RunConfig parse_config_string(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    parse_fail(e.what());
  }
  if (!root.IsMap()) parse_fail("config must be a mapping");
  static const std::set<std::string> known{"beta",          "gamma", "utility", "distribution", "distribution_preset",
                                           "x_max",         "depth", "tail_eps", "s_grid_points", "seed",
                                           "output_dir",    "y0"};
  for (const auto& kv : root) {
    std::string key = kv.first.Scalar();
    if (!known.count(key)) parse_fail("unknown config key '" + key + "'");
  }
  RunConfig rc;
  ProblemConfig& p = rc.problem;
  if (root["utility"]) p.utility = parse_utility(scalar<std::string>(root["utility"], "utility"));
  if (p.utility == Utility::Power) p.gamma = 0.5;
  if (root["beta"]) p.beta = scalar<double>(root["beta"], "beta");
  if (root["gamma"]) p.gamma = scalar<double>(root["gamma"], "gamma");
  if (root["distribution"] && root["distribution_preset"])
    parse_fail("give either 'distribution' or 'distribution_preset', not both");
  if (root["distribution"]) p.dist = read_distribution(root["distribution"]);
  else if (root["distribution_preset"]) p.dist = read_preset(root["distribution_preset"]);
  else parse_fail("config needs 'distribution' or 'distribution_preset'");
  if (!root["x_max"]) parse_fail("config needs 'x_max'");
  p.x_max = scalar<int>(root["x_max"], "x_max");
  if (root["depth"]) p.depth = scalar<int>(root["depth"], "depth");
  if (root["tail_eps"]) p.tail_eps = scalar<double>(root["tail_eps"], "tail_eps");
  if (root["s_grid_points"]) p.s_grid_points = scalar<int>(root["s_grid_points"], "s_grid_points");
  if (root["seed"]) p.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["y0"]) p.y0 = scalar<double>(root["y0"], "y0");
  if (root["output_dir"]) rc.output_dir = scalar<std::string>(root["output_dir"], "output_dir");
  p.validate();
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

}  // namespace riskdiv
