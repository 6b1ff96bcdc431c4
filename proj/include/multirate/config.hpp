#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "multirate/errors.hpp"

namespace multirate {

/// Study definition as parsed from a JSON config.  Parsing is strict: unknown
/// keys are rejected so typos cannot silently change a study.
struct StudyConfig {
  std::string kind;                     // ode | heat | stokes (required)
  std::string schedule = "uniform";     // uniform | refine_sub1_only | refine_sub2_only
  int levels = 3;
  int space_m = 0;                      // cells per unit length; 0 = per-kind default
  int order_r = 0;                      // 0 = per-kind default (heat 1, stokes 2)
  double nu1 = 1.0;
  double nu2 = 0.0;                     // 0 = per-kind default (heat 2, stokes 56)
  double gamma = 0.0;                   // 0 = the assembler default
  int initial_steps = 4;
  double horizon = 1.0;
  int reference_steps = 1024;
  bool manufactured = true;             // heat: use the manufactured problem
  std::string benchmark = "two_pipe";   // stokes geometry
  std::string output_dir = ".";
  double tol = 1e-12;                   // ode fixed-point tolerance
  int max_iter = 2000;
  double damping = 1.0;
  std::optional<nlohmann::json> time_mesh;  // explicit mesh for mesh-info

  bool operator==(const StudyConfig&) const = default;
};

StudyConfig parse_config(const std::string& text);
std::string serialize_config(const StudyConfig& cfg);

}  // namespace multirate
