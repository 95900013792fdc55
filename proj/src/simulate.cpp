#include "runlab/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace runlab {

namespace {

// one noise draw; reserves two counters (gaussian consumes both)
double draw_noise(const NoiseSpec& s, const CounterRng& rng, std::uint64_t stream,
                  std::uint64_t counter) {
  switch (s.kind()) {
    case NoiseKind::gaussian:
      return s.sigma() * rng.normal(stream, counter);
    case NoiseKind::uniform_bounded:
      return s.support_hi() * (2.0 * rng.u01(stream, counter) - 1.0);
    case NoiseKind::custom_table:
      return s.quantile(rng.u01(stream, counter));
  }
  throw std::logic_error("draw_noise: bad kind");
}

std::uint64_t stream_for(double theta, int rep) {
  return CounterRng::mix(std::bit_cast<std::uint64_t>(theta)) +
         static_cast<std::uint64_t>(rep) * CounterRng::kGolden;
}

}  // namespace

SimRow simulate_once(double theta, int rep, const AttackProfile& profile, const NoiseSpec& fx,
                     const NoiseSpec& fy, const GameConfig& game, const SimConfig& cfg,
                     const PosteriorConfig& pcfg) {
  if (cfg.n_agents < 1) throw std::invalid_argument("simulate_once: n_agents < 1");
  const long long n = cfg.n_agents;
  const CounterRng rng{cfg.seed};
  const std::uint64_t stream = stream_for(theta, rep);
  const double a_theory = profile.eval(theta);
  const double sigma_z = cfg.model == SimModel::normal_fixed_point ? 1.0 / cfg.alpha_z : 0.0;

  // per-agent slots so parallel order cannot change the result; the counts
  // are integers, so the reduction is exact in any case
  std::vector<unsigned char> act(static_cast<std::size_t>(n), 0);
  std::vector<int> tries(static_cast<std::size_t>(n), 0);
  std::vector<unsigned char> failed(static_cast<std::size_t>(n), 0);

  par_for(static_cast<std::size_t>(n), cfg.exec, [&](std::size_t i) {
    bool decided = false;
    int attempt = 0;
    for (; attempt < cfg.max_attempts_per_agent && !decided; ++attempt) {
      const std::uint64_t base =
          (static_cast<std::uint64_t>(i) << 16) | static_cast<std::uint64_t>(4 * attempt);
      switch (cfg.model) {
        case SimModel::two_signal: {
          const double x = theta + draw_noise(fx, rng, stream, base);
          const double y = a_theory + draw_noise(fy, rng, stream, base + 2);
          const auto p = try_posterior_below_t_2d(x, y, profile, fx, fy, pcfg);
          if (p) {
            act[i] = *p >= game.p_star ? 1 : 0;
            decided = true;
          }
          break;
        }
        case SimModel::one_signal: {
          const double z = a_theory - theta + draw_noise(fx, rng, stream, base);
          const auto p = try_posterior_below_t_1d(z, profile, fx, pcfg);
          if (p) {
            act[i] = *p >= game.p_star ? 1 : 0;
            decided = true;
          }
          break;
        }
        case SimModel::normal_fixed_point: {
          const double z = a_theory - theta + sigma_z * rng.normal(stream, base);
          act[i] = z >= cfg.z_star ? 1 : 0;
          decided = true;
          break;
        }
      }
    }
    tries[i] = attempt;
    if (!decided) failed[i] = 1;
  });

  long long attacks = 0, resampled = 0, undecided = 0;
  for (long long i = 0; i < n; ++i) {
    attacks += act[i];
    resampled += tries[i] - 1;
    undecided += failed[i];
  }
  if (undecided > 0)
    throw std::runtime_error("simulate_once: an agent exhausted its signal redraw budget");
  if (static_cast<double>(resampled) >
      cfg.max_resample_fraction * static_cast<double>(n + resampled))
    throw std::runtime_error("simulate_once: no-support resample fraction above the limit");

  SimRow row;
  row.theta = theta;
  row.rep = rep;
  row.a_theory = a_theory;
  row.a_realized = static_cast<double>(attacks) / static_cast<double>(n);
  row.stderr_val = std::sqrt(row.a_realized * (1.0 - row.a_realized) / static_cast<double>(n));
  const double diff = row.a_realized - row.a_theory;
  if (diff == 0.0)
    row.z_score = 0.0;
  else
    row.z_score = row.stderr_val > 0.0 ? diff / row.stderr_val : std::copysign(1e300, diff);
  row.success = row.a_realized > theta;
  row.resampled = resampled;
  return row;
}

SimReport simulate_sweep(const std::vector<double>& thetas, const AttackProfile& profile,
                         const NoiseSpec& fx, const NoiseSpec& fy, const GameConfig& game,
                         const SimConfig& cfg, const PosteriorConfig& pcfg) {
  SimReport rep;
  rep.seed = cfg.seed;
  for (double theta : thetas)
    for (int r = 0; r < cfg.reps; ++r) {
      SimRow row = simulate_once(theta, r, profile, fx, fy, game, cfg, pcfg);
      rep.max_abs_error = std::max(rep.max_abs_error, std::abs(row.a_realized - row.a_theory));
      rep.worst_z = std::max(rep.worst_z, std::abs(row.z_score));
      rep.rows.push_back(row);
    }
  return rep;
}

SelfConsistentResult self_consistent_attack(double theta, double z_star, double alpha_z,
                                            double a_start, double tol, int max_iter) {
  if (!(alpha_z > 0.0)) throw std::invalid_argument("self_consistent_attack: alpha_z <= 0");
  SelfConsistentResult res;
  double a = std::clamp(a_start, 0.0, 1.0);
  for (int it = 1; it <= max_iter; ++it) {
    const double next = 1.0 - gaussian_cdf(alpha_z * (z_star - a + theta), 1.0);
    res.iterations = it;
    const double step = std::abs(next - a);
    a = next;
    if (step < tol) {
      res.converged = true;
      break;
    }
  }
  res.attack = a;
  return res;
}

}  // namespace runlab
