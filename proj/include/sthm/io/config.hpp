#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "sthm/numerics/errors.hpp"
#include "sthm/numerics/grid.hpp"

namespace sthm::io {

struct RunConfig {
  int dimension = 2;
  double order_m = 3.0;
  double delta = 1.0;
  int grid_n = 256;
  double grid_L = 8.0;
  double r0 = 1.0;
  double amplitude = 1.0;
  double sobolev_s = 1.0;
  double surface_radius = 2.0;
  double domain_radius = 1.5;
  std::vector<double> K{8.0, 16.0, 32.0};
  std::size_t N = 4096;
  std::string mode = "near";
  int xi_grid = 64;
  double rho_cut = 0.0;
  bool taper = true;
  std::vector<double> k_fractions{0.25, 0.5, 1.0};
  double far_density = 1.0;
  double margin = 1e-3;
  std::uint64_t seed = 20240601;
  std::string output = "out";

  bool near() const { return mode == "near" || mode == "both"; }
  bool far() const { return mode == "far" || mode == "both"; }
};

namespace detail {

template <typename T>
T field(const nlohmann::json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + key, "has the wrong type");
  }
}

inline void reject_unknown(const nlohmann::json& j, const std::string& path, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "config" : path, "must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError(path + k, "is not a recognised field");
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  if (c.dimension != 2 && c.dimension != 3) throw ConfigError("dimension", "must be 2 or 3");
  if (!(c.order_m > c.dimension - 1))
    throw ConfigError("order_m", "assumption A requires order m > d-1 (got m=" + std::to_string(c.order_m) + ")");
  if (!(c.delta > 0.0)) throw ConfigError("delta", "must be positive");
  if (c.grid_n < 8 || !is_power_of_two(c.grid_n))
    throw ConfigError("grid.n", "must be a power of two, at least 8");
  if (!(c.grid_L > 0.0)) throw ConfigError("grid.L", "must be positive");
  if (!(c.r0 > 0.0) || !(c.r0 < c.grid_L / 4.0)) throw ConfigError("strength.r0", "must lie in (0, L/4)");
  if (!(c.amplitude >= 0.0)) throw ConfigError("strength.amplitude", "must be nonnegative");
  if (!(c.sobolev_s > 0.0)) throw ConfigError("strength.sobolev_s", "must be positive");
  if (!(c.surface_radius > c.r0 + 2.0 * c.grid_L / c.grid_n))
    throw ConfigError("surface_radius", "must exceed r0 + 2L/n");
  if (!(c.surface_radius < c.grid_L / 2.0)) throw ConfigError("surface_radius", "must stay inside the box");
  if (!(c.domain_radius >= c.r0) || !(2.0 * c.domain_radius <= c.grid_L))
    throw ConfigError("domain_radius", "must cover the support and fit in the box");
  if (c.K.empty()) throw ConfigError("K", "must list at least one frequency cap");
  for (std::size_t i = 0; i < c.K.size(); ++i) {
    if (!(c.K[i] > 0.0)) throw ConfigError("K", "entries must be positive");
    if (i && !(c.K[i] > c.K[i - 1])) throw ConfigError("K", "must be strictly increasing");
  }
  if (c.N < 2) throw ConfigError("N", "ensemble needs at least 2 realizations");
  if (c.mode != "near" && c.mode != "far" && c.mode != "both") throw ConfigError("mode", "must be near, far or both");
  if (c.xi_grid < 8 || !is_power_of_two(c.xi_grid))
    throw ConfigError("xi_grid", "must be a power of two, at least 8");
  if (c.rho_cut < 0.0) throw ConfigError("rho_cut", "must be positive or \"auto\"");
  if (c.k_fractions.empty()) throw ConfigError("design.k_fractions", "must not be empty");
  bool has_one = false;
  for (double f : c.k_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("design.k_fractions", "entries must lie in (0, 1]");
    has_one = has_one || f == 1.0;
  }
  if (!has_one) throw ConfigError("design.k_fractions", "must include 1");
  if (!(c.far_density > 0.0)) throw ConfigError("design.far_density", "must be positive");
  if (!(c.margin > 0.0 && c.margin < 0.5)) throw ConfigError("design.margin", "must lie in (0, 0.5)");
  if (c.output.empty()) throw ConfigError("output", "must name a directory");
}

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::field;
  detail::reject_unknown(j, "", {"dimension", "order_m", "delta", "grid", "strength", "surface_radius", "domain_radius",
                                 "K", "N", "mode", "xi_grid", "rho_cut", "taper", "design", "seed", "output"});
  RunConfig c;
  c.dimension = field(j, "", "dimension", c.dimension);
  c.order_m = field(j, "", "order_m", c.order_m);
  c.delta = field(j, "", "delta", c.delta);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::reject_unknown(g, "grid.", {"n", "L"});
    c.grid_n = field(g, "grid.", "n", c.grid_n);
    c.grid_L = field(g, "grid.", "L", c.grid_L);
  }
  if (j.contains("strength")) {
    const auto& s = j.at("strength");
    detail::reject_unknown(s, "strength.", {"r0", "amplitude", "sobolev_s"});
    c.r0 = field(s, "strength.", "r0", c.r0);
    c.amplitude = field(s, "strength.", "amplitude", c.amplitude);
    c.sobolev_s = field(s, "strength.", "sobolev_s", c.sobolev_s);
  }
  c.surface_radius = field(j, "", "surface_radius", c.surface_radius);
  c.domain_radius = field(j, "", "domain_radius", c.domain_radius);
  c.K = field(j, "", "K", c.K);
  c.N = field(j, "", "N", c.N);
  c.mode = field(j, "", "mode", c.mode);
  c.xi_grid = field(j, "", "xi_grid", c.xi_grid);
  if (j.contains("rho_cut")) {
    const auto& r = j.at("rho_cut");
    if (r.is_string() && r.get<std::string>() == "auto") c.rho_cut = 0.0;
    else if (r.is_number()) c.rho_cut = r.get<double>();
    else throw ConfigError("rho_cut", "must be a number or \"auto\"");
    if (r.is_number() && !(c.rho_cut > 0.0)) throw ConfigError("rho_cut", "must be positive or \"auto\"");
  }
  c.taper = field(j, "", "taper", c.taper);
  if (j.contains("design")) {
    const auto& d = j.at("design");
    detail::reject_unknown(d, "design.", {"k_fractions", "far_density", "margin"});
    c.k_fractions = field(d, "design.", "k_fractions", c.k_fractions);
    c.far_density = field(d, "design.", "far_density", c.far_density);
    c.margin = field(d, "design.", "margin", c.margin);
  }
  c.seed = field(j, "", "seed", c.seed);
  c.output = field(j, "", "output", c.output);
  validate(c);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["dimension"] = c.dimension;
  j["order_m"] = c.order_m;
  j["delta"] = c.delta;
  j["grid"] = {{"n", c.grid_n}, {"L", c.grid_L}};
  j["strength"] = {{"r0", c.r0}, {"amplitude", c.amplitude}, {"sobolev_s", c.sobolev_s}};
  j["surface_radius"] = c.surface_radius;
  j["domain_radius"] = c.domain_radius;
  j["K"] = c.K;
  j["N"] = c.N;
  j["mode"] = c.mode;
  j["xi_grid"] = c.xi_grid;
  if (c.rho_cut > 0.0) j["rho_cut"] = c.rho_cut;
  else j["rho_cut"] = "auto";
  j["taper"] = c.taper;
  j["design"] = {{"k_fractions", c.k_fractions}, {"far_density", c.far_density}, {"margin", c.margin}};
  j["seed"] = c.seed;
  j["output"] = c.output;
  return j;
}

}  // namespace sthm::io
