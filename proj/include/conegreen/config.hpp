// Flat key=value experiment configuration with dotted keys.
//
//   # comment
//   dist.kind = product-rademacher
//   cone.kind = half-space
//   cone.d = 2
//   start = 0,1
//   target = 4,3
//
// Every problem is collected; unknown keys are errors.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conegreen/cone.hpp"
#include "conegreen/exact_dp.hpp"
#include "conegreen/step_models.hpp"

namespace conegreen {

struct ExperimentConfig {
  // step law
  std::string dist_kind = "simple";  ///< simple, product-rademacher, product-lazy, williamson, custom
  std::optional<int> dist_dim;
  double williamson_beta = 3.0;
  int williamson_n_max = 30;
  std::vector<Atom> custom_atoms;

  // cone
  std::string cone_kind = "half-space";  ///< half-space, wedge, orthant, full-space
  int dim = 2;
  double wedge_opening = 1.5707963267948966;

  std::optional<Point> start;
  std::optional<Point> start2;
  std::optional<Point> target;
  std::vector<double> direction;
  std::vector<double> moduli;
  std::int64_t height = 2;
  std::vector<double> along;

  GreenMethod method = GreenMethod::dp;
  std::optional<std::int64_t> horizon;
  double horizon_factor = 4.0;
  std::int64_t replicas = 100000;
  std::optional<std::uint64_t> seed;
  double gamma = 0.5;
  int threads = 1;
  std::size_t memory_cap = kDefaultMemoryCap;
  std::string output;

  double plateau_tolerance = 0.15;
  double interior_tolerance = 0.3;
  double boundary_tolerance = 0.4;
  double martin_tolerance = 0.15;
  double llt_tolerance = 0.1;

  std::int64_t llt_n = 400;
  std::vector<std::int64_t> schedule{64, 256, 1024};
  std::int64_t v_replicas = 100000;
  std::optional<Pmf1D> ladder_pmf;
  std::int64_t ladder_horizon = 10000;
  std::int64_t ladder_kmax = 1024;

  double integral_p = 1.0;
  double integral_d = 2.0;
  double integral_eps = 0.0;
};

struct ParseResult {
  ExperimentConfig config;
  std::vector<std::string> errors;
  bool ok() const noexcept { return errors.empty(); }
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Reads "key = value" lines ('#' starts a comment); duplicate keys keep the last value.
KeyValues read_key_values(const std::string& text, std::vector<std::string>& errors);

/// Parses file text, then applies overrides in order, then validates.
ParseResult parse_config(const std::string& text, const KeyValues& overrides = {});

/// Keys accepted by parse_config.
const std::vector<std::string>& config_keys();

StepDistribution build_distribution(const ExperimentConfig& config);
Cone build_cone(const ExperimentConfig& config);

/// "-1:2/3, 2:1/3"; probabilities may be fractions.
Pmf1D parse_pmf(const std::string& text);

}  // namespace conegreen
