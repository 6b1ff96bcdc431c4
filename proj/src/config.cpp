#include "multirate/config.hpp"

#include <set>

namespace multirate {

StudyConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const std::set<std::string> known = {
      "kind",           "schedule",  "levels",       "space_m",      "order_r",
      "nu1",            "nu2",       "gamma",        "initial_steps", "horizon",
      "reference_steps", "manufactured", "benchmark", "output_dir",   "tol",
      "max_iter",       "damping",   "time_mesh"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown key: " + key);

  if (!j.contains("kind")) throw ConfigError("missing required key: kind");

  StudyConfig cfg;
  try {
    cfg.kind = j.at("kind").get<std::string>();
    if (j.contains("schedule")) cfg.schedule = j["schedule"].get<std::string>();
    if (j.contains("levels")) cfg.levels = j["levels"].get<int>();
    if (j.contains("space_m")) cfg.space_m = j["space_m"].get<int>();
    if (j.contains("order_r")) cfg.order_r = j["order_r"].get<int>();
    if (j.contains("nu1")) cfg.nu1 = j["nu1"].get<double>();
    if (j.contains("nu2")) cfg.nu2 = j["nu2"].get<double>();
    if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
    if (j.contains("initial_steps")) cfg.initial_steps = j["initial_steps"].get<int>();
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<double>();
    if (j.contains("reference_steps")) cfg.reference_steps = j["reference_steps"].get<int>();
    if (j.contains("manufactured")) cfg.manufactured = j["manufactured"].get<bool>();
    if (j.contains("benchmark")) cfg.benchmark = j["benchmark"].get<std::string>();
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
    if (j.contains("max_iter")) cfg.max_iter = j["max_iter"].get<int>();
    if (j.contains("damping")) cfg.damping = j["damping"].get<double>();
    if (j.contains("time_mesh")) cfg.time_mesh = j["time_mesh"];
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value type: ") + e.what());
  }

  if (cfg.kind != "ode" && cfg.kind != "heat" && cfg.kind != "stokes")
    throw ConfigError("unknown kind: " + cfg.kind);
  if (cfg.levels < 1) throw ConfigError("levels must be at least 1");
  if (cfg.initial_steps < 1) throw ConfigError("initial_steps must be at least 1");
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (cfg.schedule != "uniform" && cfg.schedule != "refine_sub1_only" &&
      cfg.schedule != "refine_sub2_only")
    throw ConfigError("unknown schedule: " + cfg.schedule);
  if (cfg.benchmark != "two_pipe") throw ConfigError("unknown benchmark: " + cfg.benchmark);

  // Per-kind defaults.
  if (cfg.space_m == 0) cfg.space_m = (cfg.kind == "stokes") ? 4 : 64;
  if (cfg.order_r == 0) cfg.order_r = (cfg.kind == "stokes") ? 2 : 1;
  if (cfg.nu2 == 0.0) cfg.nu2 = (cfg.kind == "stokes") ? 56.0 : 2.0;
  if (cfg.kind == "stokes" && cfg.order_r < 2)
    throw ConfigError("stokes needs order_r >= 2 (Taylor-Hood)");
  return cfg;
}

std::string serialize_config(const StudyConfig& cfg) {
  nlohmann::json j;
  j["kind"] = cfg.kind;
  j["schedule"] = cfg.schedule;
  j["levels"] = cfg.levels;
  j["space_m"] = cfg.space_m;
  j["order_r"] = cfg.order_r;
  j["nu1"] = cfg.nu1;
  j["nu2"] = cfg.nu2;
  j["gamma"] = cfg.gamma;
  j["initial_steps"] = cfg.initial_steps;
  j["horizon"] = cfg.horizon;
  j["reference_steps"] = cfg.reference_steps;
  j["manufactured"] = cfg.manufactured;
  j["benchmark"] = cfg.benchmark;
  j["output_dir"] = cfg.output_dir;
  j["tol"] = cfg.tol;
  j["max_iter"] = cfg.max_iter;
  j["damping"] = cfg.damping;
  if (cfg.time_mesh) j["time_mesh"] = *cfg.time_mesh;
  return j.dump(2);
}

}  // namespace multirate
