#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "runlab/noise.hpp"

namespace runlab {

// One checked hypothesis: signed margin (negative = fail) plus the binding
// witness for quantified conditions. Informational entries record alternate
// readings (e.g. the stated-direction ratio bound) and never affect the
// overall verdict.
struct Hypothesis {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  nlohmann::json witness;
  bool informational = false;
};

struct ConditionReport {
  std::string id;
  std::vector<Hypothesis> items;
  bool overall = false;  // every non-informational margin >= 0 and conclusive
  std::string status = "conclusive";
  nlohmann::json to_json() const;
};

struct HorizonConfig {
  double horizon = 0.0;  // 0: auto, max(3, 1 - delta - gamma + 10 sigma)
  int nodes = 1000;
};

// Bounded-noise two-signal regime: noise half-width sigma < 1/2, reported
// with the signal separation gap 1 - 2 sigma.
ConditionReport check_two_signal_bounded(double sigma);

// Two-signal hypotheses at (delta, gamma, xi): the x-odds times the worst
// density ratio sup f_y(eta - a), a in [0, delta], over inf f_y(eta - a),
// a in [1-delta, 1], stays at or below (1-c)/c for all eta >= 1-delta-gamma;
// the signal mass bound F_x(xi) F_y(gamma) >= 1 - delta; and the side
// constraints 1 - delta >= gamma, 1 > 3 delta + 2 gamma.
ConditionReport check_two_signal(const NoiseSpec& fx, const NoiseSpec& fy, double delta,
                                 double gamma, double xi, double c, const HorizonConfig& h = {});

// Bounded-noise one-signal regime: sigma < 1/2 and t inside (sigma, 1-sigma).
ConditionReport check_one_signal_bounded(double sigma, double t);

// One-signal hypotheses at (delta, gamma): the tail ratio
// (1 - G(xi - a)) / G(xi - b) over a in [0, delta], b in [1-delta, 1] stays
// at or below (1-c)/c for all xi >= 1-delta-gamma (proof direction; the
// stated >= reading is reported informationally); the mass bound
// G(gamma) >= 1 - delta; and the density bound g(delta - gamma) < 1.
ConditionReport check_one_signal(const NoiseSpec& g, double delta, double gamma, double c,
                                 const HorizonConfig& h = {});

struct SearchResult {
  bool feasible = false;
  double delta = 0.0;
  double gamma = 0.0;
  double xi = 0.0;           // two-signal searches only
  double xi_quantile = 0.0;  // F_x(xi)
  double best_min_margin = 0.0;
  ConditionReport report;            // re-check at the best point
  nlohmann::json failure_stats;      // per-hypothesis fail counts when infeasible
};

struct SearchGrid {
  double lo = 0.005;
  double hi = 0.45;
  double step = 0.005;
};

SearchResult search_params_two_signal(const NoiseSpec& fx, const NoiseSpec& fy, double c,
                                      const SearchGrid& dgrid = {}, const SearchGrid& ggrid = {},
                                      double quantile_lo = 0.55, double quantile_hi = 0.995,
                                      double quantile_step = 0.005);

SearchResult search_params_one_signal(const NoiseSpec& g, double c, const SearchGrid& dgrid = {},
                                      const SearchGrid& ggrid = {});

}  // namespace runlab
