#include "runlab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace runlab {

namespace {

constexpr double kHuge = 1e300;

Hypothesis make(const std::string& name, double margin, bool strict,
                nlohmann::json witness = nullptr, bool informational = false) {
  Hypothesis h;
  h.name = name;
  h.margin = margin;
  h.pass = strict ? margin > 0.0 : margin >= 0.0;
  h.witness = std::move(witness);
  h.informational = informational;
  return h;
}

void finish(ConditionReport& r) {
  r.overall = r.status == "conclusive";
  for (const auto& h : r.items)
    if (!h.informational && !h.pass) r.overall = false;
}

double auto_horizon(const HorizonConfig& h, double start, double sigma) {
  return h.horizon > 0.0 ? h.horizon : std::max(3.0, start + 10.0 * sigma);
}

// conclusive when the grid reaches past the point where the ratio is known
// to decay monotonically (gaussian) or to vanish outright (bounded support)
bool tail_conclusive(const NoiseSpec& f, double delta, double horizon) {
  if (f.bounded()) return horizon >= delta + f.support_hi();
  return horizon >= 1.0 + 2.0 * f.sigma();
}

}  // namespace

nlohmann::json ConditionReport::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["overall"] = overall;
  j["status"] = status;
  j["items"] = nlohmann::json::array();
  for (const auto& h : items) {
    nlohmann::json e;
    e["name"] = h.name;
    e["pass"] = h.pass;
    e["margin"] = h.margin;
    e["witness"] = h.witness;
    e["informational"] = h.informational;
    j["items"].push_back(e);
  }
  return j;
}

ConditionReport check_two_signal_bounded(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("check_two_signal_bounded: sigma <= 0");
  ConditionReport r;
  r.id = "two_signal_bounded";
  r.items.push_back(make("noise_precision", 0.5 - sigma, true));
  r.items.push_back(make("separation_gap", 1.0 - 2.0 * sigma, true));
  finish(r);
  return r;
}

ConditionReport check_two_signal(const NoiseSpec& fx, const NoiseSpec& fy, double delta,
                                 double gamma, double xi, double c, const HorizonConfig& h) {
  if (!(delta > 0.0 && gamma > 0.0 && xi > 0.0))
    throw std::invalid_argument("check_two_signal: delta, gamma, xi must be positive");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("check_two_signal: c outside (0,1)");
  ConditionReport r;
  r.id = "two_signal";
  r.items.push_back(make("band_order", (1.0 - delta) - gamma, false));
  r.items.push_back(make("band_mass", 1.0 - (3.0 * delta + 2.0 * gamma), true));

  const double fx_xi = fx.cumulative(xi);
  const double odds = fx_xi < 1.0 ? fx_xi / (1.0 - fx_xi) : kHuge;
  const double start = 1.0 - delta - gamma;
  const double horizon = auto_horizon(h, start, fy.sigma());
  const int n = std::max(2, h.nodes);
  double worst = -1.0, worst_eta = start;
  for (int i = 0; i < n; ++i) {
    const double eta = start + (horizon - start) * i / (n - 1);
    const double sup = fy.density_envelope(eta, 0.0, delta).sup;
    double ratio;
    if (sup <= 0.0) {
      ratio = 0.0;
    } else {
      const double inf = fy.density_envelope(eta, 1.0 - delta, 1.0).inf;
      ratio = inf > 0.0 ? std::min(kHuge, odds * sup / inf) : kHuge;
    }
    if (ratio > worst) {
      worst = ratio;
      worst_eta = eta;
    }
  }
  const double bound = (1.0 - c) / c;
  r.items.push_back(make("ratio_bound", bound - worst, false,
                         {{"eta", worst_eta}, {"ratio", worst}, {"odds_x", odds}}));
  r.items.push_back(make("mass_bound", fx_xi * fy.cumulative(gamma) - (1.0 - delta), false,
                         {{"F_x_xi", fx_xi}, {"F_y_gamma", fy.cumulative(gamma)}}));
  if (!tail_conclusive(fy, delta, horizon)) r.status = "inconclusive";
  finish(r);
  return r;
}

ConditionReport check_one_signal_bounded(double sigma, double t) {
  if (!(sigma > 0.0)) throw std::invalid_argument("check_one_signal_bounded: sigma <= 0");
  ConditionReport r;
  r.id = "one_signal_bounded";
  r.items.push_back(make("noise_precision", 0.5 - sigma, true));
  r.items.push_back(make("threshold_above", t - sigma, true));
  r.items.push_back(make("threshold_below", (1.0 - sigma) - t, true));
  finish(r);
  return r;
}

ConditionReport check_one_signal(const NoiseSpec& g, double delta, double gamma, double c,
                                 const HorizonConfig& h) {
  if (!(delta > 0.0 && gamma > 0.0))
    throw std::invalid_argument("check_one_signal: delta, gamma must be positive");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("check_one_signal: c outside (0,1)");
  if (!(1.0 - delta - gamma > 0.0))
    throw std::invalid_argument("check_one_signal: 1 - delta - gamma must be positive");
  ConditionReport r;
  r.id = "one_signal";

  const double start = 1.0 - delta - gamma;
  const double horizon = auto_horizon(h, start, g.sigma());
  const int n = std::max(2, h.nodes);
  // the binding (a, b) corner is not assumed: corners plus an interior grid
  std::vector<double> as = {0.0, 0.25 * delta, 0.5 * delta, 0.75 * delta, delta};
  std::vector<double> bs = {1.0 - delta, 1.0 - 0.75 * delta, 1.0 - 0.5 * delta,
                            1.0 - 0.25 * delta, 1.0};
  double worst = -1.0, worst_xi = start, worst_a = 0.0, worst_b = 1.0;
  for (int i = 0; i < n; ++i) {
    const double xi = start + (horizon - start) * i / (n - 1);
    for (double a : as) {
      const double num = 1.0 - g.cumulative(xi - a);
      if (num <= 0.0) continue;  // zero tail mass: the bound holds trivially here
      for (double b : bs) {
        const double den = g.cumulative(xi - b);
        const double ratio = den > 0.0 ? std::min(kHuge, num / den) : kHuge;
        if (ratio > worst) {
          worst = ratio;
          worst_xi = xi;
          worst_a = a;
          worst_b = b;
        }
      }
    }
  }
  if (worst < 0.0) worst = 0.0;  // every numerator vanished on the grid
  const double bound = (1.0 - c) / c;
  r.items.push_back(make("tail_ratio_bound", bound - worst, false,
                         {{"xi", worst_xi}, {"a", worst_a}, {"b", worst_b}, {"ratio", worst}}));
  // the stated direction of the same inequality, shown but never enforced
  r.items.push_back(make("tail_ratio_stated_direction", worst - bound, false,
                         {{"xi", worst_xi}, {"a", worst_a}, {"b", worst_b}, {"ratio", worst}},
                         true));
  r.items.push_back(make("mass_bound", g.cumulative(gamma) - (1.0 - delta), false,
                         {{"G_gamma", g.cumulative(gamma)}}));
  r.items.push_back(
      make("density_bound", 1.0 - g.density(delta - gamma), true,
           {{"g_delta_minus_gamma", g.density(delta - gamma)}}));
  if (!tail_conclusive(g, delta, horizon)) r.status = "inconclusive";
  finish(r);
  return r;
}

namespace {

double min_noninformational_margin(const ConditionReport& r) {
  double m = kHuge;
  for (const auto& h : r.items)
    if (!h.informational) m = std::min(m, h.margin);
  return m;
}

}  // namespace

SearchResult search_params_two_signal(const NoiseSpec& fx, const NoiseSpec& fy, double c,
                                      const SearchGrid& dgrid, const SearchGrid& ggrid,
                                      double quantile_lo, double quantile_hi,
                                      double quantile_step) {
  SearchResult res;
  long long fail_side = 0, fail_ratio = 0, fail_mass = 0;
  double best = -kHuge;
  const double bound = (1.0 - c) / c;
  const HorizonConfig h;
  for (double delta = dgrid.lo; delta <= dgrid.hi + 1e-12; delta += dgrid.step) {
    for (double gamma = ggrid.lo; gamma <= ggrid.hi + 1e-12; gamma += ggrid.step) {
      const double side1 = (1.0 - delta) - gamma;
      const double side2 = 1.0 - (3.0 * delta + 2.0 * gamma);
      if (side1 < 0.0 || side2 <= 0.0) {
        ++fail_side;
        continue;
      }
      // the eta ratio without the x odds: shared by every xi at this (delta, gamma)
      const double start = 1.0 - delta - gamma;
      const double horizon = auto_horizon(h, start, fy.sigma());
      double ratio_raw = 0.0;
      for (int i = 0; i < h.nodes; ++i) {
        const double eta = start + (horizon - start) * i / (h.nodes - 1);
        const double sup = fy.density_envelope(eta, 0.0, delta).sup;
        if (sup <= 0.0) continue;
        const double inf = fy.density_envelope(eta, 1.0 - delta, 1.0).inf;
        ratio_raw = std::max(ratio_raw, inf > 0.0 ? std::min(kHuge, sup / inf) : kHuge);
      }
      const double fy_gamma = fy.cumulative(gamma);
      for (double p = quantile_lo; p <= quantile_hi + 1e-12; p += quantile_step) {
        const double m6 = bound - std::min(kHuge, p / (1.0 - p) * ratio_raw);
        const double m7 = p * fy_gamma - (1.0 - delta);
        if (m6 < 0.0) ++fail_ratio;
        if (m7 < 0.0) ++fail_mass;
        const double mm = std::min({side1, side2, m6, m7});
        if (mm > best) {
          best = mm;
          res.delta = delta;
          res.gamma = gamma;
          res.xi_quantile = p;
        }
      }
    }
  }
  res.best_min_margin = best;
  if (best > 0.0) {
    res.xi = fx.quantile(res.xi_quantile);
    res.report = check_two_signal(fx, fy, res.delta, res.gamma, res.xi, c, h);
    res.feasible = res.report.overall;
  }
  if (!res.feasible)
    res.failure_stats = {{"side_constraints", fail_side},
                        {"ratio_bound", fail_ratio},
                        {"mass_bound", fail_mass}};
  return res;
}

SearchResult search_params_one_signal(const NoiseSpec& g, double c, const SearchGrid& dgrid,
                                      const SearchGrid& ggrid) {
  SearchResult res;
  long long fail_ratio = 0, fail_mass = 0, fail_density = 0;
  double best = -kHuge;
  const HorizonConfig h;
  for (double delta = dgrid.lo; delta <= dgrid.hi + 1e-12; delta += dgrid.step) {
    for (double gamma = ggrid.lo; gamma <= ggrid.hi + 1e-12; gamma += ggrid.step) {
      if (!(1.0 - delta - gamma > 0.0)) continue;
      const ConditionReport rep = check_one_signal(g, delta, gamma, c, h);
      for (const auto& item : rep.items) {
        if (item.informational || item.pass) continue;
        if (item.name == "tail_ratio_bound") ++fail_ratio;
        if (item.name == "mass_bound") ++fail_mass;
        if (item.name == "density_bound") ++fail_density;
      }
      const double mm = min_noninformational_margin(rep);
      if (mm > best) {
        best = mm;
        res.delta = delta;
        res.gamma = gamma;
      }
    }
  }
  res.best_min_margin = best;
  if (best > 0.0) {
    res.report = check_one_signal(g, res.delta, res.gamma, c, h);
    res.feasible = res.report.overall;
  }
  if (!res.feasible)
    res.failure_stats = {{"ratio_bound", fail_ratio},
                        {"mass_bound", fail_mass},
                        {"density_bound", fail_density}};
  return res;
}

}  // namespace runlab
