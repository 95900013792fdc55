#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "runlab/exec.hpp"
#include "runlab/iterate.hpp"
#include "runlab/model.hpp"
#include "runlab/noise.hpp"
#include "runlab/simulate.hpp"
#include "runlab/tipping.hpp"

namespace {

using namespace runlab;
using clk = std::chrono::steady_clock;

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

bool identical(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

void report(const char* name, double ts, double tp, bool same) {
  std::printf("%-28s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  identical %s\n", name, ts,
              tp, tp > 0.0 ? ts / tp : 0.0, same ? "yes" : "NO");
}

}  // namespace

int main() {
  // Best response on a step profile, two bounded signals.
  {
    const NoiseSpec fx = NoiseSpec::uniform_bounded(0.25);
    const NoiseSpec fy = NoiseSpec::uniform_bounded(0.25);
    const GameConfig game = GameConfig::with_cost(0.5);
    GridSpec gs;
    gs.n = 4001;
    const AttackProfile a = AttackProfile::step(0.5, 0.8, 0.2, gs.build(0.5));
    const ErrorRule rx = build_error_rule(fx, 129, 8.0);
    const ErrorRule ry = build_error_rule(fy, 129, 8.0);
    const PosteriorConfig pcfg;
    auto t0 = clk::now();
    const AttackProfile bs = best_response_2d(a, fx, fy, game, rx, ry, pcfg, Exec::serial);
    const double ts = seconds_since(t0);
    t0 = clk::now();
    const AttackProfile bp = best_response_2d(a, fx, fy, game, rx, ry, pcfg, Exec::parallel);
    const double tp = seconds_since(t0);
    report("best_response_2d", ts, tp, identical(bs.values(), bp.values()));
  }

  // Branch profile assembly over a dense grid.
  {
    const double alpha = 5.0, z_star = 0.0;
    const TangencyInterval iv = tangency_interval(alpha, z_star);
    const double tsw = switch_theta(iv, SwitchRule::midpoint);
    GridSpec gs;
    gs.n = 200001;
    const std::vector<double> grid = gs.build(tsw);
    auto t0 = clk::now();
    const AttackProfile ps = assemble_branch_profile(alpha, z_star, grid, tsw, Exec::serial);
    const double ts = seconds_since(t0);
    t0 = clk::now();
    const AttackProfile pp = assemble_branch_profile(alpha, z_star, grid, tsw, Exec::parallel);
    const double tp = seconds_since(t0);
    report("assemble_branch_profile", ts, tp, identical(ps.values(), pp.values()));
  }

  // Multiplicity sweep over a fine alpha ladder.
  {
    std::vector<double> alphas;
    for (double a = 1.0; a <= 10.0 + 1e-12; a += 0.002) alphas.push_back(a);
    auto t0 = clk::now();
    const auto rs = multiplicity_sweep(alphas, 0.0, Exec::serial);
    const double ts = seconds_since(t0);
    t0 = clk::now();
    const auto rp = multiplicity_sweep(alphas, 0.0, Exec::parallel);
    const double tp = seconds_since(t0);
    bool same = rs.size() == rp.size();
    for (std::size_t i = 0; same && i < rs.size(); ++i)
      same = rs[i].alpha == rp[i].alpha && rs[i].max_roots == rp[i].max_roots &&
             ((rs[i].theta_lo != rs[i].theta_lo && rp[i].theta_lo != rp[i].theta_lo) ||
              rs[i].theta_lo == rp[i].theta_lo) &&
             ((rs[i].theta_hi != rs[i].theta_hi && rp[i].theta_hi != rp[i].theta_hi) ||
              rs[i].theta_hi == rp[i].theta_hi);
    report("multiplicity_sweep", ts, tp, same);
  }

  // Agent-level simulation with bounded noise.
  {
    const NoiseSpec fx = NoiseSpec::uniform_bounded(0.25);
    const NoiseSpec fy = NoiseSpec::uniform_bounded(0.25);
    const GameConfig game = GameConfig::with_cost(0.5);
    GridSpec gs;
    const AttackProfile prof = AttackProfile::step(0.5, 0.8, 0.2, gs.build(0.5));
    SimConfig cfg;
    cfg.model = SimModel::two_signal;
    cfg.n_agents = 400000;
    cfg.seed = 7;
    const std::vector<double> thetas = {0.2, 0.5, 0.8};
    cfg.exec = Exec::serial;
    auto t0 = clk::now();
    const SimReport rs = simulate_sweep(thetas, prof, fx, fy, game, cfg);
    const double ts = seconds_since(t0);
    cfg.exec = Exec::parallel;
    t0 = clk::now();
    const SimReport rp = simulate_sweep(thetas, prof, fx, fy, game, cfg);
    const double tp = seconds_since(t0);
    bool same = rs.rows.size() == rp.rows.size();
    for (std::size_t i = 0; same && i < rs.rows.size(); ++i)
      same = rs.rows[i].a_realized == rp.rows[i].a_realized &&
             rs.rows[i].resampled == rp.rows[i].resampled;
    report("simulate_sweep", ts, tp, same);
  }
  return 0;
}
