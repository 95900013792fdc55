#include "runlab/tipping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "runlab/noise.hpp"
#include "runlab/posterior.hpp"

namespace runlab {

namespace {

double residual(double alpha, double z, double theta, double a) {
  return 1.0 - gaussian_cdf(alpha * (z - a + theta), 1.0) - a;
}

double slope_term(double alpha, double z, double theta, double a) {
  return alpha * gaussian_pdf(alpha * (z - a + theta), 1.0);  // best-response slope
}

double refine_root(double alpha, double z, double theta, double lo, double hi) {
  // An endpoint residual can round to exactly zero when 1 - Phi saturates;
  // the endpoint is then the root at double precision.
  double rlo = residual(alpha, z, theta, lo);
  if (rlo == 0.0) return lo;
  if (residual(alpha, z, theta, hi) == 0.0) return hi;
  for (int k = 0; k < 80 && hi - lo > 1e-14; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double rm = residual(alpha, z, theta, mid);
    if (rm == 0.0) return mid;
    if ((rlo < 0.0) == (rm < 0.0)) {
      lo = mid;
      rlo = rm;
    } else {
      hi = mid;
    }
  }
  double a = 0.5 * (lo + hi);
  for (int k = 0; k < 2; ++k) {  // Newton polish, clamped to the bracket
    const double d = slope_term(alpha, z, theta, a) - 1.0;
    if (d == 0.0) break;
    a = std::clamp(a - residual(alpha, z, theta, a) / d, lo, hi);
  }
  return a;
}

}  // namespace

std::vector<FixedPoint> attack_fixed_points(double alpha_z, double z_star, double theta) {
  if (!(alpha_z > 0.0)) throw std::invalid_argument("attack_fixed_points: alpha_z <= 0");
  std::vector<double> roots;
  const int n = 10000;
  double a_prev = 0.0;
  double r_prev = residual(alpha_z, z_star, theta, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double a = static_cast<double>(i) / n;
    const double ri = residual(alpha_z, z_star, theta, a);
    if (r_prev == 0.0)
      roots.push_back(a_prev);
    else if ((r_prev > 0.0) != (ri > 0.0))
      roots.push_back(refine_root(alpha_z, z_star, theta, a_prev, a));
    a_prev = a;
    r_prev = ri;
  }
  if (r_prev == 0.0) roots.push_back(1.0);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-8; }),
              roots.end());

  const TangencyInterval iv = tangency_interval(alpha_z, z_star);
  std::vector<FixedPoint> out;
  out.reserve(roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k) {
    FixedPoint fp;
    fp.attack = roots[k];
    const double g = slope_term(alpha_z, z_star, theta, roots[k]);
    fp.stable = g < 1.0;
    fp.near_tangent = std::abs(g - 1.0) < 1e-3;
    if (roots.size() == 3) {
      fp.branch = k == 0 ? 3 : (k == 1 ? 2 : 1);
    } else if (!iv.exists) {
      fp.branch = 2;
    } else if (roots.size() == 1 && theta < iv.theta_lo) {
      fp.branch = 1;
    } else if (roots.size() == 1 && theta > iv.theta_hi) {
      fp.branch = 3;
    } else if (roots[k] >= iv.a_fold_hi) {
      fp.branch = 1;
    } else if (roots[k] <= iv.a_fold_lo) {
      fp.branch = 3;
    } else {
      fp.branch = 2;
    }
    out.push_back(fp);
  }
  return out;
}

TangencyInterval tangency_interval(double alpha_z, double z_star) {
  TangencyInterval iv;
  if (!(alpha_z > kCriticalAlpha)) return iv;
  iv.exists = true;
  iv.u0 = std::sqrt(2.0 * std::log(alpha_z / kCriticalAlpha));
  const double cum = gaussian_cdf(iv.u0, 1.0);
  iv.a_fold_lo = 1.0 - cum;
  iv.a_fold_hi = cum;
  iv.theta_lo = iv.u0 / alpha_z - z_star + 1.0 - cum;
  iv.theta_hi = -iv.u0 / alpha_z - z_star + cum;
  return iv;
}

double switch_theta(const TangencyInterval& iv, SwitchRule rule) {
  if (!iv.exists) throw std::domain_error("switch_theta: no multiplicity window");
  const double w = iv.theta_hi - iv.theta_lo;
  switch (rule) {
    case SwitchRule::midpoint:
      return 0.5 * (iv.theta_lo + iv.theta_hi);
    case SwitchRule::lower_edge:
      return iv.theta_lo + 1e-6 * w;
    case SwitchRule::upper_edge:
      return iv.theta_hi - 1e-6 * w;
  }
  throw std::logic_error("switch_theta: bad rule");
}

AttackProfile assemble_branch_profile(double alpha_z, double z_star,
                                      const std::vector<double>& grid, double theta_switch,
                                      Exec exec) {
  const TangencyInterval iv = tangency_interval(alpha_z, z_star);
  if (!iv.exists)
    throw std::domain_error("assemble_branch_profile: alpha_z at or below sqrt(2 pi)");
  if (!(theta_switch >= iv.theta_lo && theta_switch <= iv.theta_hi))
    throw std::invalid_argument("assemble_branch_profile: switch outside the window");
  const double span = grid.back() - grid.front();
  std::size_t jump = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - theta_switch) <= 1e-9 * span) {
      jump = i;
      break;
    }
  if (jump == grid.size())
    throw std::invalid_argument("assemble_branch_profile: switch is not a grid node");

  auto solve = [&](double theta, bool high) {
    const double lo = high ? iv.a_fold_hi : 0.0;
    const double hi = high ? 1.0 : iv.a_fold_lo;
    return refine_root(alpha_z, z_star, theta, lo, hi);
  };
  std::vector<double> vals(grid.size());
  par_for(grid.size(), exec, [&](std::size_t i) { vals[i] = solve(grid[i], i < jump); });
  const double left = solve(theta_switch, true);
  return AttackProfile::from_values(grid, std::move(vals), jump, left);
}

CutoffResult solve_cutoff_zstar(double alpha_z, double c, SwitchRule rule, const GridSpec& gs,
                                Exec exec) {
  if (!(alpha_z > kCriticalAlpha))
    throw std::domain_error("solve_cutoff_zstar: alpha_z at or below sqrt(2 pi)");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("solve_cutoff_zstar: c outside (0,1)");
  const PosteriorConfig pcfg;
  auto psi = [&](double z) {
    const TangencyInterval iv = tangency_interval(alpha_z, z);
    const double tsw = switch_theta(iv, rule);
    const AttackProfile prof = assemble_branch_profile(alpha_z, z, gs.build(tsw), tsw, exec);
    return success_probability_1d(z, prof, alpha_z, pcfg);
  };

  double zl = 0.0, zh = 0.0, pl = 0.0, ph = 0.0;
  bool found = false;
  double prev_z = -3.0;
  double prev_p = psi(prev_z);
  for (int i = 1; i <= 120 && !found; ++i) {
    const double z = -3.0 + 6.0 * i / 120.0;
    const double p = psi(z);
    if (prev_p < c && p >= c) {
      zl = prev_z;
      zh = z;
      pl = prev_p;
      ph = p;
      found = true;
    }
    prev_z = z;
    prev_p = p;
  }
  if (!found) throw std::runtime_error("solve_cutoff_zstar: no bracket in [-3, 3]");

  for (int k = 0; k < 100 && zh - zl > 1e-12; ++k) {
    const double mid = 0.5 * (zl + zh);
    const double pm = psi(mid);
    if (pm >= c) {
      zh = mid;
      ph = pm;
    } else {
      zl = mid;
      pl = pm;
    }
  }
  CutoffResult res;
  res.z_star = 0.5 * (zl + zh);
  res.psi_at = psi(res.z_star);
  res.jump_gap = ph - pl;
  res.bracket_lo = zl;
  res.bracket_hi = zh;
  res.continuous = res.jump_gap <= 1e-6;
  return res;
}

std::vector<SweepRow> multiplicity_sweep(const std::vector<double>& alphas, double z_star,
                                         Exec exec) {
  std::vector<SweepRow> rows(alphas.size());
  par_for(alphas.size(), exec, [&](std::size_t i) {
    const double a = alphas[i];
    SweepRow row;
    row.alpha = a;
    const TangencyInterval iv = tangency_interval(a, z_star);
    std::vector<double> probes;
    if (iv.exists) {
      const double w = iv.theta_hi - iv.theta_lo;
      row.theta_lo = iv.theta_lo;
      row.theta_hi = iv.theta_hi;
      probes = {0.5 * (iv.theta_lo + iv.theta_hi), iv.theta_lo + 0.25 * w,
                iv.theta_hi - 0.25 * w, iv.theta_lo - 0.1, iv.theta_hi + 0.1};
    } else {
      row.theta_lo = std::numeric_limits<double>::quiet_NaN();
      row.theta_hi = std::numeric_limits<double>::quiet_NaN();
      probes = {0.5 - z_star, 0.25 - z_star, 0.75 - z_star};
    }
    int mr = 0;
    for (double th : probes)
      mr = std::max(mr, static_cast<int>(attack_fixed_points(a, z_star, th).size()));
    row.max_roots = mr;
    rows[i] = row;
  });
  return rows;
}

}  // namespace runlab
