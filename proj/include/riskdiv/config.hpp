#pragma once

#include <string>

#include "riskdiv/model.hpp"

namespace riskdiv {

struct RunConfig {
  ProblemConfig problem;
  std::string output_dir = "out";
};

// Flat YAML mapping with keys beta, gamma, utility, distribution (integer ->
// probability) or distribution_preset {p, claim}, x_max, depth, tail_eps,
// s_grid_points, seed, output_dir and y0. Unknown keys are rejected.
RunConfig parse_config_string(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace riskdiv
