#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "runlab/exec.hpp"
#include "runlab/model.hpp"
#include "runlab/noise.hpp"
#include "runlab/posterior.hpp"
#include "runlab/rng.hpp"

namespace runlab {

enum class SimModel { two_signal, one_signal, normal_fixed_point };

// Finite-population check of a computed equilibrium: agents draw signals
// around the equilibrium attack level A(theta) (the continuum has no feedback
// noise) and act on their posterior thresholds; the realized fraction is
// compared against A(theta) binomially.
struct SimConfig {
  SimModel model = SimModel::two_signal;
  long long n_agents = 100000;
  std::uint64_t seed = 1;
  int reps = 1;
  double z_star = 0.0;       // explicit cutoff models
  double alpha_z = 5.0;      // normal_fixed_point only
  Exec exec = Exec::serial;
  // a no-support signal draw is discarded and redrawn; the run errors when
  // more than this fraction of draws had to be discarded
  double max_resample_fraction = 1e-6;
  int max_attempts_per_agent = 1024;
};

struct SimRow {
  double theta = 0.0;
  int rep = 0;
  double a_theory = 0.0;
  double a_realized = 0.0;
  double stderr_val = 0.0;  // sqrt(A_hat (1 - A_hat) / n)
  double z_score = 0.0;
  bool success = false;  // realized attack exceeds theta
  long long resampled = 0;
};

struct SimReport {
  std::vector<SimRow> rows;
  double max_abs_error = 0.0;
  double worst_z = 0.0;  // largest |z|
  std::uint64_t seed = 0;
};

// One population at one theta. The strategy is the posterior threshold of
// `profile` for the signal models, or the explicit cutoff z_star for
// normal_fixed_point. two_signal draws from (fx, fy); one_signal draws its
// signal noise from fx and ignores fy; normal_fixed_point draws gaussian
// noise at rate alpha_z and ignores both.
SimRow simulate_once(double theta, int rep, const AttackProfile& profile, const NoiseSpec& fx,
                     const NoiseSpec& fy, const GameConfig& game, const SimConfig& cfg,
                     const PosteriorConfig& pcfg = {});

SimReport simulate_sweep(const std::vector<double>& thetas, const AttackProfile& profile,
                         const NoiseSpec& fx, const NoiseSpec& fy, const GameConfig& game,
                         const SimConfig& cfg, const PosteriorConfig& pcfg = {});

struct SelfConsistentResult {
  double attack = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Continuum self-consistent attack at fundamentals theta: Picard iteration of
// A -> 1 - Phi(alpha_z (z_star - A + theta)) from a_start. The map is
// increasing in A, so iterates converge monotonically into the basin of the
// start; with multiple equilibria the reached root identifies the basin.
SelfConsistentResult self_consistent_attack(double theta, double z_star, double alpha_z,
                                            double a_start, double tol = 1e-12,
                                            int max_iter = 200000);

}  // namespace runlab
