#include "runlab/posterior.hpp"

#include <algorithm>
#include <cmath>

namespace runlab {

namespace {

// Laplace-rate penalty of a zero density value: distance beyond the support
// for bounded noise, squared sigma-normalized distance for gaussian
// underflow. Used only to resolve 0/0 posteriors, where the side whose
// likelihood vanishes slowest under any vanishing smoothing wins.
double hard_distance(const NoiseSpec& s, double u) {
  return std::max(0.0, std::abs(u) - s.support_hi());
}

bool side_hard(const NoiseSpec& s, double u) {
  return s.bounded() && std::abs(u) > s.support_hi();
}

struct ZeroZero {
  bool below_hard, above_hard;
  double below_pen, above_pen;  // comparable within the same hardness class
};

std::optional<double> resolve_zero_zero(const ZeroZero& r) {
  if (r.below_hard != r.above_hard) return r.below_hard ? 0.0 : 1.0;
  if (r.below_pen < r.above_pen) return 1.0;
  if (r.above_pen < r.below_pen) return 0.0;
  return std::nullopt;
}

// composite Simpson over one linear-in-s panel of fx(x - s) * fy(y - A(s))
double simpson_panel_2d(double x, double y, double s0, double s1, double a0, double slope,
                        double v_anchor, const NoiseSpec& fx, const NoiseSpec& fy, int m) {
  const double hp = (s1 - s0) / m;
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    const double sa = s0 + j * hp;
    const double sb = sa + hp;
    const double sm = 0.5 * (sa + sb);
    auto kern = [&](double s) {
      return fx.density(x - s) * fy.density(y - (v_anchor + slope * (s - a0)));
    };
    acc += (kern(sa) + 4.0 * kern(sm) + kern(sb)) * (hp / 6.0);
  }
  return acc;
}

// integral over one side of t of fx(x - s) fy(y - A(s)) ds, truncated to the
// prior window, with analytic constant tails beyond the profile grid
double integrate_side_2d(double x, double y, const AttackProfile& p, const NoiseSpec& fx,
                         const NoiseSpec& fy, const PosteriorConfig& cfg, bool below,
                         double h_scale) {
  const auto& g = p.grid();
  const double t = p.t();
  const double s_lo = below ? t - cfg.truncation_N : t;
  const double s_hi = below ? t : t + cfg.truncation_N;
  const double reach = fx.bounded() ? fx.support_hi() : cfg.trunc_sigmas * fx.sigma();
  double total = 0.0;

  if (below && s_lo < g.front()) {
    const double mass = fx.cumulative(x - s_lo) - fx.cumulative(x - g.front());
    total += fy.density(y - p.value_at(0)) * std::max(0.0, mass);
  }
  if (!below && s_hi > g.back()) {
    const double mass = fx.cumulative(x - g.back()) - fx.cumulative(x - s_hi);
    total += fy.density(y - p.value_at(g.size() - 1)) * std::max(0.0, mass);
  }

  const std::size_t jump = p.jump_index();
  const std::size_t k_first = below ? 0 : jump;
  const std::size_t k_last = below ? jump : g.size() - 1;
  const double h_target = h_scale / cfg.quad_nodes;
  for (std::size_t k = k_first; k < k_last; ++k) {
    const double a0 = g[k], a1 = g[k + 1];
    const double v0 = p.value_at(k);
    const double v1 = (below && k + 1 == jump) ? p.left_limit() : p.value_at(k + 1);
    double c0 = std::max({a0, s_lo, x - reach});
    double c1 = std::min({a1, s_hi, x + reach});
    if (!(c1 > c0)) continue;
    const double slope = (v1 - v0) / (a1 - a0);
    const bool near_t = (k + 4 >= jump) && (k < jump + 4);
    const double ht = near_t ? h_target / 4.0 : h_target;
    int m = static_cast<int>(std::ceil((c1 - c0) / ht));
    m = std::clamp(m, 1, 100000);
    total += simpson_panel_2d(x, y, c0, c1, a0, slope, v0, fx, fy, m);
  }
  return total;
}

// one-sided profile value scan for the 0/0 resolution on general profiles
ZeroZero scan_zero_zero_2d(double x, double y, const AttackProfile& p, const NoiseSpec& fx,
                           const NoiseSpec& fy) {
  ZeroZero r{true, true, 1e300, 1e300};
  auto fold = [&](double a, bool below) {
    const double u = y - a;
    const bool hard = side_hard(fy, u);
    const double pen = hard ? hard_distance(fy, u) : std::abs(u) / fy.sigma();
    if (below) {
      r.below_hard = r.below_hard && hard;
      r.below_pen = std::min(r.below_pen, pen);
    } else {
      r.above_hard = r.above_hard && hard;
      r.above_pen = std::min(r.above_pen, pen);
    }
  };
  for (std::size_t i = 0; i < p.size(); ++i) {
    fold(p.value_at(i), p.grid()[i] < p.t());
    if (i == p.jump_index()) fold(p.left_value_at(i), true);
  }
  (void)x;
  (void)fx;
  return r;
}

}  // namespace

std::optional<double> try_posterior_below_t_2d(double x, double y, const AttackProfile& p,
                                               const NoiseSpec& fx, const NoiseSpec& fy,
                                               const PosteriorConfig& cfg) {
  if (p.is_step() && !cfg.force_quadrature) {
    const double Fx = fx.cumulative(x - p.t());
    const double fyL = fy.density(y - p.left_limit());
    const double fyR = fy.density(y - p.right_limit());
    const double ib = (1.0 - Fx) * fyL;
    const double ia = Fx * fyR;
    if (ib + ia > 0.0) return ib / (ib + ia);
    // 0/0: the x odds alone never vanish both ways, so the y factors decide
    ZeroZero r;
    r.below_hard = side_hard(fy, y - p.left_limit());
    r.above_hard = side_hard(fy, y - p.right_limit());
    const double uL = y - p.left_limit(), uR = y - p.right_limit();
    r.below_pen = r.below_hard ? hard_distance(fy, uL) : std::abs(uL) / fy.sigma();
    r.above_pen = r.above_hard ? hard_distance(fy, uR) : std::abs(uR) / fy.sigma();
    if (fyL > 0.0 && fyR == 0.0) return 1.0;
    if (fyR > 0.0 && fyL == 0.0) return 0.0;
    if (fyL == 0.0 && fyR == 0.0) return resolve_zero_zero(r);
    return std::nullopt;
  }
  const double ib = integrate_side_2d(x, y, p, fx, fy, cfg, true, 1.0);
  const double ia = integrate_side_2d(x, y, p, fx, fy, cfg, false, 1.0);
  if (ib + ia > 0.0) return ib / (ib + ia);
  return resolve_zero_zero(scan_zero_zero_2d(x, y, p, fx, fy));
}

double posterior_below_t_2d(double x, double y, const AttackProfile& p, const NoiseSpec& fx,
                            const NoiseSpec& fy, const PosteriorConfig& cfg) {
  const auto v = try_posterior_below_t_2d(x, y, p, fx, fy, cfg);
  if (!v) throw NoSupportError{};
  return *v;
}

ValueWithError posterior_below_t_2d_refined(double x, double y, const AttackProfile& p,
                                            const NoiseSpec& fx, const NoiseSpec& fy,
                                            const PosteriorConfig& cfg) {
  PosteriorConfig c2 = cfg;
  c2.force_quadrature = true;
  const double ib1 = integrate_side_2d(x, y, p, fx, fy, c2, true, 1.0);
  const double ia1 = integrate_side_2d(x, y, p, fx, fy, c2, false, 1.0);
  const double ib2 = integrate_side_2d(x, y, p, fx, fy, c2, true, 0.5);
  const double ia2 = integrate_side_2d(x, y, p, fx, fy, c2, false, 0.5);
  if (!(ib1 + ia1 > 0.0) || !(ib2 + ia2 > 0.0)) throw NoSupportError{};
  const double v1 = ib1 / (ib1 + ia1);
  const double v2 = ib2 / (ib2 + ia2);
  return {v2, std::abs(v1 - v2)};
}

namespace {

// integral of g(z - A(s) + s) ds over [a, b] with the profile's constant
// extensions handled analytically; b may sit inside the grid (success split)
double integrate_kernel_1d(const AttackProfile& p, const NoiseSpec& g, double z, double a,
                           double b, const PosteriorConfig& cfg, double h_scale) {
  if (!(b > a)) return 0.0;
  const auto& gr = p.grid();
  const double glo = gr.front(), ghi = gr.back();
  const double reach = g.bounded() ? g.support_hi() : cfg.trunc_sigmas * g.sigma();
  double total = 0.0;
  if (a < glo) {
    const double v = p.value_at(0);
    const double hi_end = std::min(b, glo);
    total += std::max(0.0, g.cumulative(z - v + hi_end) - g.cumulative(z - v + a));
  }
  if (b > ghi) {
    const double v = p.value_at(p.size() - 1);
    const double lo_end = std::max(a, ghi);
    total += std::max(0.0, g.cumulative(z - v + b) - g.cumulative(z - v + lo_end));
  }
  const std::size_t jump = p.jump_index();
  const double h_target = h_scale / cfg.quad_nodes;
  for (std::size_t k = 0; k + 1 < gr.size(); ++k) {
    const double a0 = gr[k], a1 = gr[k + 1];
    const double v0 = p.value_at(k);
    const double v1 = (k + 1 == jump) ? p.left_limit() : p.value_at(k + 1);
    const double c0 = std::max(a0, a);
    const double c1 = std::min(a1, b);
    if (!(c1 > c0)) continue;
    const double slope = (v1 - v0) / (a1 - a0);
    // kernel argument z - A(s) + s is linear in s: skip fully out-of-reach panels
    const double arg0 = z - (v0 + slope * (c0 - a0)) + c0;
    const double arg1 = z - (v0 + slope * (c1 - a0)) + c1;
    if ((arg0 > reach && arg1 > reach) || (arg0 < -reach && arg1 < -reach)) continue;
    const bool near_t = (k + 4 >= jump) && (k < jump + 4);
    const double ht = near_t ? h_target / 4.0 : h_target;
    int m = static_cast<int>(std::ceil((c1 - c0) / ht));
    m = std::clamp(m, 1, 100000);
    const double hp = (c1 - c0) / m;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const double sa = c0 + j * hp;
      const double sb = sa + hp;
      const double sm = 0.5 * (sa + sb);
      auto kern = [&](double s) { return g.density(z - (v0 + slope * (s - a0)) + s); };
      acc += (kern(sa) + 4.0 * kern(sm) + kern(sb)) * (hp / 6.0);
    }
    total += acc;
  }
  return total;
}

ZeroZero scan_zero_zero_1d(double z, const AttackProfile& p, const NoiseSpec& g) {
  // below-side mass vanishes when z - A + t is left of the support; above-side
  // when z - A + t is right of it
  const double t = p.t();
  const double ub = z - p.left_limit() + t;
  const double ua = z - p.right_limit() + t;
  ZeroZero r;
  const double hi = g.bounded() ? g.support_hi() : 1e300;
  r.below_hard = g.bounded() && ub < -hi;
  r.above_hard = g.bounded() && ua > hi;
  r.below_pen = r.below_hard ? (-hi - ub) : std::max(0.0, -ub) / g.sigma();
  r.above_pen = r.above_hard ? (ua - hi) : std::max(0.0, ua) / g.sigma();
  return r;
}

}  // namespace

std::optional<double> try_posterior_below_t_1d(double z, const AttackProfile& p,
                                               const NoiseSpec& g, const PosteriorConfig& cfg) {
  const double t = p.t();
  if (p.is_step() && !cfg.force_quadrature) {
    const double ib = g.cumulative(z - p.left_limit() + t);
    const double ia = 1.0 - g.cumulative(z - p.right_limit() + t);
    if (ib + ia > 0.0) return ib / (ib + ia);
    return resolve_zero_zero(scan_zero_zero_1d(z, p, g));
  }
  const double ib = integrate_kernel_1d(p, g, z, t - cfg.truncation_N, t, cfg, 1.0);
  const double ia = integrate_kernel_1d(p, g, z, t, t + cfg.truncation_N, cfg, 1.0);
  if (ib + ia > 0.0) return ib / (ib + ia);
  return resolve_zero_zero(scan_zero_zero_1d(z, p, g));
}

double posterior_below_t_1d(double z, const AttackProfile& p, const NoiseSpec& g,
                            const PosteriorConfig& cfg) {
  const auto v = try_posterior_below_t_1d(z, p, g, cfg);
  if (!v) throw NoSupportError{};
  return *v;
}

double success_probability_1d(double z_star, const AttackProfile& p, double alpha_z,
                              const PosteriorConfig& cfg) {
  if (!(alpha_z > 0.0)) throw std::invalid_argument("success_probability_1d: alpha_z <= 0");
  const NoiseSpec gz = NoiseSpec::gaussian_sigma(1.0 / alpha_z);
  const auto& gr = p.grid();
  const double t = p.t();

  // d(s) = A(s) - s must be strictly decreasing (true for any profile with
  // nonincreasing sides and a downward jump)
  {
    double prev = p.value_at(0) - gr[0];
    for (std::size_t i = 1; i < p.size(); ++i) {
      const double dl = p.left_value_at(i) - gr[i];
      const double dr = p.value_at(i) - gr[i];
      if (!(dl < prev) || !(dr <= dl))
        throw std::domain_error("success_probability_1d: A(theta) - theta not decreasing");
      prev = dr;
    }
  }

  const double s_lo = t - cfg.truncation_N;
  const double s_hi = t + cfg.truncation_N;
  // unique zero of d(s), with the constant extensions d = A_end - s in the tails
  double s_cross;
  const double d_lo = p.value_at(0) - s_lo;
  const double d_glo = p.value_at(0) - gr.front();
  const double d_ghi = p.value_at(p.size() - 1) - gr.back();
  if (d_lo <= 0.0) {
    s_cross = s_lo;
  } else if (d_glo <= 0.0) {
    s_cross = std::min(p.value_at(0), gr.front());
  } else if (d_ghi > 0.0) {
    s_cross = std::min(s_hi, p.value_at(p.size() - 1));
  } else {
    s_cross = gr.back();
    double prev_d = d_glo;
    double prev_s = gr.front();
    for (std::size_t i = 1; i < p.size(); ++i) {
      const double dl = p.left_value_at(i) - gr[i];
      if (dl <= 0.0) {  // crossing inside the panel ending at node i
        s_cross = prev_s + prev_d * (gr[i] - prev_s) / (prev_d - dl);
        break;
      }
      const double dr = p.value_at(i) - gr[i];
      if (dr <= 0.0) {  // crossing exactly at the jump
        s_cross = gr[i];
        break;
      }
      prev_d = dr;
      prev_s = gr[i];
    }
  }

  const double num = integrate_kernel_1d(p, gz, z_star, s_lo, s_cross, cfg, 1.0);
  const double den = num + integrate_kernel_1d(p, gz, z_star, s_cross, s_hi, cfg, 1.0);
  if (!(den > 0.0)) throw NoSupportError{};
  return std::clamp(num / den, 0.0, 1.0);
}

}  // namespace runlab
