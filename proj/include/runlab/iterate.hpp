#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "runlab/exec.hpp"
#include "runlab/model.hpp"
#include "runlab/noise.hpp"
#include "runlab/posterior.hpp"

namespace runlab {

// Tensor rule for integrating over the two signal errors: per-axis nodes over
// the noise support (bounded) or +-width_sigmas.sigma (gaussian), composite
// Simpson weights times the density, renormalized to unit total mass. Node
// counts must be odd and at least 3.
struct ErrorGridSpec {
  int n_x = 65;
  int n_y = 65;
  double width_sigmas = 8.0;
};

struct ErrorRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1 up to rounding
};

ErrorRule build_error_rule(const NoiseSpec& spec, int n, double width_sigmas);

// Thrown when an iterate escapes the invariant band it is supposed to stay
// in: at least 1 - delta left of the threshold, at most delta right of it.
struct HypothesisFailure : std::runtime_error {
  HypothesisFailure(int iter, double th, double margin)
      : std::runtime_error("iterate " + std::to_string(iter) + " leaves the band near theta = " +
                           std::to_string(th)),
        iteration(iter),
        theta(th),
        worst_margin(margin) {}
  int iteration;
  double theta;
  double worst_margin;
};

enum class Start { inner_step, full_step };

struct IterationSettings {
  int max_iter = 200;
  double conv_tol = 1e-6;
  bool record_trace = true;
  Start start = Start::inner_step;
  Exec exec = Exec::serial;
  bool enforce_band = true;
  double band_delta = 0.0;  // band half-width; 0 disables the check
};

// One best-response update of the attack profile in the two-signal model.
// Agents see x = theta + ex and y = A(theta) + ey; each attacks when the
// posterior mass below the profile's threshold reaches p_star (ties attack).
// The returned profile lives on the same grid with the same jump node.
AttackProfile best_response_2d(const AttackProfile& a, const NoiseSpec& fx, const NoiseSpec& fy,
                               const GameConfig& game, const ErrorRule& rx, const ErrorRule& ry,
                               const PosteriorConfig& pcfg, Exec exec);

// Signal cutoff of the one-signal model: the z at which the posterior mass
// below the threshold first reaches p_star. The posterior is checked to be
// nondecreasing on a probe grid; inside a zero-likelihood gap the bisection
// lands on the support-distance tie point.
double cutoff_1d(const AttackProfile& a, const NoiseSpec& g, const GameConfig& game,
                 const PosteriorConfig& pcfg, double bracket_hint);

// Closed-form best response of the one-signal model given the cutoff:
// A'(theta) = 1 - G(z_cut - A(theta) + theta).
AttackProfile best_response_1d(const AttackProfile& a, const NoiseSpec& g, double z_cut);

struct IterationResult {
  AttackProfile profile;
  int iterations = 0;
  bool converged = false;
  double final_change = 0.0;
  double z_cut = 0.0;  // one-signal runs only
  std::vector<double> change_trace;
  std::vector<double> z_trace;
  std::vector<SandwichReport> band_trace;
};

AttackProfile start_profile(const GridSpec& gs, double t, double delta, Start start);

IterationResult iterate_equilibrium_two_signal(const AttackProfile& start, const NoiseSpec& fx,
                                               const NoiseSpec& fy, const GameConfig& game,
                                               const ErrorGridSpec& egrid,
                                               const PosteriorConfig& pcfg,
                                               const IterationSettings& settings);

IterationResult iterate_equilibrium_one_signal(const AttackProfile& start, const NoiseSpec& g,
                                               const GameConfig& game, double bracket_hint,
                                               const PosteriorConfig& pcfg,
                                               const IterationSettings& settings);

struct FamilyResult {
  std::vector<IterationResult> members;
  std::vector<std::vector<double>> pairwise;  // sup-norm distances, symmetric
};

// One equilibrium per threshold, all profiles on one shared grid so that
// sup-norm distances between members are well defined.
FamilyResult equilibrium_family_two_signal(const std::vector<double>& ts, const GridSpec& gs,
                                           const NoiseSpec& fx, const NoiseSpec& fy,
                                           const GameConfig& game, double delta,
                                           const ErrorGridSpec& egrid, const PosteriorConfig& pcfg,
                                           const IterationSettings& settings);

}  // namespace runlab
