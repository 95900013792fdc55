#include "runlab/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace runlab {

ErrorRule build_error_rule(const NoiseSpec& spec, int n, double width_sigmas) {
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("error rule needs an odd node count >= 3");
  const double r = spec.bounded() ? spec.support_hi() : width_sigmas * spec.sigma();
  const double h = 2.0 * r / (n - 1);
  ErrorRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = -r + i * h;
    const double coeff = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    rule.weights[i] = coeff * (h / 3.0) * spec.density(rule.nodes[i]);
  }
  // Kahan-renormalize so the rule integrates the constant 1 to within an ulp
  double sum = 0.0, comp = 0.0;
  for (double w : rule.weights) {
    const double yk = w - comp;
    const double tk = sum + yk;
    comp = (tk - sum) - yk;
    sum = tk;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("error rule has zero mass");
  for (double& w : rule.weights) w /= sum;
  return rule;
}

namespace {

// attack decision for a zero-likelihood signal pair, resolved once per ey
// node: the support-distance rule decides which side of t wins; an exact tie
// is resolved toward attacking (consistent with ties attacking at p_star)
int zero_zero_attack(const NoiseSpec& fy, double uL, double uR, double p_star) {
  const bool hb = fy.bounded() && std::abs(uL) > fy.support_hi();
  const bool ha = fy.bounded() && std::abs(uR) > fy.support_hi();
  double pb = hb ? std::abs(uL) - fy.support_hi() : std::abs(uL) / fy.sigma();
  double pa = ha ? std::abs(uR) - fy.support_hi() : std::abs(uR) / fy.sigma();
  if (hb != ha) return hb ? (0.0 >= p_star ? 1 : 0) : 1;
  if (pb < pa) return 1;
  if (pa < pb) return 0.0 >= p_star ? 1 : 0;
  return 1;
}

struct SideTables {
  std::vector<double> fy_below;  // f_y(y - A(t-)) at y = base + ey_j
  std::vector<double> fy_above;  // f_y(y - A(t+))
  std::vector<int> zz_attack;    // resolution when both vanish
};

SideTables make_side_tables(double base, double a_left, double a_right, const NoiseSpec& fy,
                            const ErrorRule& ry, double p_star) {
  SideTables s;
  const int ny = static_cast<int>(ry.nodes.size());
  s.fy_below.resize(ny);
  s.fy_above.resize(ny);
  s.zz_attack.resize(ny);
  for (int j = 0; j < ny; ++j) {
    const double y = base + ry.nodes[j];
    s.fy_below[j] = fy.density(y - a_left);
    s.fy_above[j] = fy.density(y - a_right);
    s.zz_attack[j] = zero_zero_attack(fy, y - a_left, y - a_right, p_star);
  }
  return s;
}

double weighted_attack_fraction_step(const std::vector<double>& cdf_x, const SideTables& st,
                                     const ErrorRule& rx, const ErrorRule& ry, double p_star) {
  const int nx = static_cast<int>(rx.nodes.size());
  const int ny = static_cast<int>(ry.nodes.size());
  long long count = 0;
  double acc = 0.0;
  for (int j = 0; j < ny; ++j) {
    const double fb = st.fy_below[j];
    const double fa = st.fy_above[j];
    for (int i = 0; i < nx; ++i) {
      const double ib = (1.0 - cdf_x[i]) * fb;
      const double ia = cdf_x[i] * fa;
      int attack;
      if (ib + ia > 0.0) {
        attack = ib >= p_star * (ib + ia) ? 1 : 0;
      } else if (fb > 0.0) {
        attack = 1;  // P = 1: the below side survives the x rounding
      } else if (fa > 0.0) {
        attack = 0.0 >= p_star ? 1 : 0;
      } else {
        attack = st.zz_attack[j];
      }
      if (attack) {
        ++count;
        acc += rx.weights[i] * ry.weights[j];
      }
    }
  }
  if (count == 0) return 0.0;
  if (count == static_cast<long long>(nx) * ny) return 1.0;
  return std::clamp(acc, 0.0, 1.0);
}

double weighted_attack_fraction_general(double theta, double a_here, const AttackProfile& a,
                                        const NoiseSpec& fx, const NoiseSpec& fy,
                                        const ErrorRule& rx, const ErrorRule& ry, double p_star,
                                        const PosteriorConfig& pcfg) {
  const int nx = static_cast<int>(rx.nodes.size());
  const int ny = static_cast<int>(ry.nodes.size());
  long long count = 0;
  double acc = 0.0;
  for (int j = 0; j < ny; ++j) {
    const double y = a_here + ry.nodes[j];
    for (int i = 0; i < nx; ++i) {
      const double x = theta + rx.nodes[i];
      const auto p = try_posterior_below_t_2d(x, y, a, fx, fy, pcfg);
      const int attack = p ? (*p >= p_star ? 1 : 0) : 1;
      if (attack) {
        ++count;
        acc += rx.weights[i] * ry.weights[j];
      }
    }
  }
  if (count == 0) return 0.0;
  if (count == static_cast<long long>(nx) * ny) return 1.0;
  return std::clamp(acc, 0.0, 1.0);
}

}  // namespace

AttackProfile best_response_2d(const AttackProfile& a, const NoiseSpec& fx, const NoiseSpec& fy,
                               const GameConfig& game, const ErrorRule& rx, const ErrorRule& ry,
                               const PosteriorConfig& pcfg, Exec exec) {
  const auto& gr = a.grid();
  const std::size_t n = gr.size();
  const std::size_t jump = a.jump_index();
  const double t = a.t();
  const double p_star = game.p_star;
  std::vector<double> out(n, 0.0);
  double out_left = 0.0;

  if (a.is_step() && !pcfg.force_quadrature) {
    const double a_left = a.left_limit();
    const double a_right = a.right_limit();
    const SideTables left_tab = make_side_tables(a_left, a_left, a_right, fy, ry, p_star);
    const SideTables right_tab = make_side_tables(a_right, a_left, a_right, fy, ry, p_star);
    const int nx = static_cast<int>(rx.nodes.size());
    // slot n is the left limit at the jump
    par_for(n + 1, exec, [&](std::size_t s) {
      const double theta = (s == n) ? t : gr[s];
      std::vector<double> cdf_x(nx);
      for (int i = 0; i < nx; ++i) cdf_x[i] = fx.cumulative(theta + rx.nodes[i] - t);
      const bool left_side = (s == n) || gr[s] < t;
      const SideTables& st = left_side ? left_tab : right_tab;
      const double v = weighted_attack_fraction_step(cdf_x, st, rx, ry, p_star);
      if (s == n)
        out_left = v;
      else
        out[s] = v;
    });
  } else {
    par_for(n + 1, exec, [&](std::size_t s) {
      const double theta = (s == n) ? t : gr[s];
      const double a_here = (s == n) ? a.left_limit() : a.value_at(s);
      const double v =
          weighted_attack_fraction_general(theta, a_here, a, fx, fy, rx, ry, p_star, pcfg);
      if (s == n)
        out_left = v;
      else
        out[s] = v;
    });
  }
  return AttackProfile::from_values(gr, std::move(out), jump, out_left);
}

double cutoff_1d(const AttackProfile& a, const NoiseSpec& g, const GameConfig& game,
                 const PosteriorConfig& pcfg, double bracket_hint) {
  const double p_star = game.p_star;
  auto post = [&](double z) { return try_posterior_below_t_1d(z, a, g, pcfg); };

  double b = bracket_hint > 0.0 ? bracket_hint : 0.25;
  double zl = -b, zh = b;
  std::optional<double> boundary;
  for (int k = 0;; ++k) {
    const auto pl = post(zl);
    if (!pl) return zl;  // exact support tie: this is the separation point
    if (*pl < p_star) break;
    zl -= (zh - zl);
    if (k > 100 || zl < -1e9) throw std::runtime_error("cutoff_1d: no lower bracket");
  }
  for (int k = 0;; ++k) {
    const auto ph = post(zh);
    if (!ph) return zh;
    if (*ph >= p_star) break;
    zh += (zh - zl);
    if (k > 100 || zh > 1e9) throw std::runtime_error("cutoff_1d: no upper bracket");
  }

  // the cutoff construction assumes the posterior is nondecreasing in z;
  // probe it rather than trust it
  {
    double prev = -1.0;
    const int m = 33;
    for (int i = 0; i <= m; ++i) {
      const auto p = post(zl + (zh - zl) * i / m);
      if (!p) continue;
      if (*p < prev - 1e-9)
        throw std::domain_error("cutoff_1d: posterior not monotone on probe grid");
      prev = std::max(prev, *p);
    }
  }

  for (int k = 0; k < 200 && (zh - zl) > 1e-13 * std::max(1.0, std::abs(zl) + std::abs(zh)); ++k) {
    const double mid = 0.5 * (zl + zh);
    const auto pm = post(mid);
    if (!pm) return mid;
    if (*pm >= p_star)
      zh = mid;
    else
      zl = mid;
  }
  return 0.5 * (zl + zh);
}

AttackProfile best_response_1d(const AttackProfile& a, const NoiseSpec& g, double z_cut) {
  const auto& gr = a.grid();
  std::vector<double> out(gr.size());
  for (std::size_t i = 0; i < gr.size(); ++i)
    out[i] = 1.0 - g.cumulative(z_cut - a.value_at(i) + gr[i]);
  const double left = 1.0 - g.cumulative(z_cut - a.left_limit() + a.t());
  return AttackProfile::from_values(gr, std::move(out), a.jump_index(), left);
}

AttackProfile start_profile(const GridSpec& gs, double t, double delta, Start start) {
  auto grid = gs.build(t);
  if (start == Start::inner_step) return AttackProfile::step(t, 1.0 - delta, delta, std::move(grid));
  return AttackProfile::step(t, 1.0, 0.0, std::move(grid));
}

namespace {

void check_band(const AttackProfile& p, double delta, int iter, std::vector<SandwichReport>* trace,
                bool enforce) {
  const SandwichReport rep = sandwich_check(p, p.t(), delta);
  if (trace) trace->push_back(rep);
  if (enforce && !rep.ok) throw HypothesisFailure(iter, rep.worst_theta, rep.worst_margin);
}

}  // namespace

IterationResult iterate_equilibrium_two_signal(const AttackProfile& start, const NoiseSpec& fx,
                                               const NoiseSpec& fy, const GameConfig& game,
                                               const ErrorGridSpec& egrid,
                                               const PosteriorConfig& pcfg,
                                               const IterationSettings& settings) {
  const ErrorRule rx = build_error_rule(fx, egrid.n_x, egrid.width_sigmas);
  const ErrorRule ry = build_error_rule(fy, egrid.n_y, egrid.width_sigmas);
  IterationResult res{start, 0, false, 0.0, 0.0, {}, {}, {}};
  const bool band = settings.enforce_band && settings.band_delta > 0.0;
  auto* btrace = settings.record_trace ? &res.band_trace : nullptr;
  if (band || btrace) check_band(res.profile, settings.band_delta, 0, btrace, band);
  for (int it = 1; it <= settings.max_iter; ++it) {
    AttackProfile next = best_response_2d(res.profile, fx, fy, game, rx, ry, pcfg, settings.exec);
    if (band || btrace) check_band(next, settings.band_delta, it, btrace, band);
    const double change = sup_norm_distance(res.profile, next);
    res.profile = std::move(next);
    res.iterations = it;
    res.final_change = change;
    if (settings.record_trace) res.change_trace.push_back(change);
    if (change <= settings.conv_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

IterationResult iterate_equilibrium_one_signal(const AttackProfile& start, const NoiseSpec& g,
                                               const GameConfig& game, double bracket_hint,
                                               const PosteriorConfig& pcfg,
                                               const IterationSettings& settings) {
  IterationResult res{start, 0, false, 0.0, 0.0, {}, {}, {}};
  const bool band = settings.enforce_band && settings.band_delta > 0.0;
  auto* btrace = settings.record_trace ? &res.band_trace : nullptr;
  if (band || btrace) check_band(res.profile, settings.band_delta, 0, btrace, band);
  for (int it = 1; it <= settings.max_iter; ++it) {
    const double z = cutoff_1d(res.profile, g, game, pcfg, bracket_hint);
    AttackProfile next = best_response_1d(res.profile, g, z);
    if (band || btrace) check_band(next, settings.band_delta, it, btrace, band);
    const double change = sup_norm_distance(res.profile, next);
    res.profile = std::move(next);
    res.z_cut = z;
    res.iterations = it;
    res.final_change = change;
    if (settings.record_trace) {
      res.change_trace.push_back(change);
      res.z_trace.push_back(z);
    }
    if (change <= settings.conv_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

FamilyResult equilibrium_family_two_signal(const std::vector<double>& ts, const GridSpec& gs,
                                           const NoiseSpec& fx, const NoiseSpec& fy,
                                           const GameConfig& game, double delta,
                                           const ErrorGridSpec& egrid, const PosteriorConfig& pcfg,
                                           const IterationSettings& settings) {
  auto grid = gs.build_shared(ts);
  FamilyResult fam;
  fam.members.reserve(ts.size());
  IterationSettings s2 = settings;
  s2.band_delta = delta;
  for (double t : ts) {
    const double hi = settings.start == Start::inner_step ? 1.0 - delta : 1.0;
    const double lo = settings.start == Start::inner_step ? delta : 0.0;
    AttackProfile start = AttackProfile::step(t, hi, lo, grid);
    fam.members.push_back(iterate_equilibrium_two_signal(start, fx, fy, game, egrid, pcfg, s2));
  }
  const std::size_t m = fam.members.size();
  fam.pairwise.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = sup_norm_distance(fam.members[i].profile, fam.members[j].profile);
      fam.pairwise[i][j] = fam.pairwise[j][i] = d;
    }
  return fam;
}

}  // namespace runlab
