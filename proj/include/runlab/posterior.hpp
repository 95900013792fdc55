#pragma once

#include <optional>
#include <stdexcept>

#include "runlab/model.hpp"
#include "runlab/noise.hpp"

namespace runlab {

// Posterior beliefs under the improper uniform prior on theta, realized as
// the large-N limit of a uniform prior on [t - N, t + N]. Step profiles use
// the exact closed forms; general profiles are integrated with composite
// Simpson on the profile panels (split exactly at the jump, refined 4x around
// it) plus analytic constant tails beyond the grid window.
struct PosteriorConfig {
  double truncation_N = 30.0;   // prior window half-width
  int quad_nodes = 800;         // target quadrature nodes per unit length
  double tol = 1e-9;            // tolerance for the truncation stability check
  double trunc_sigmas = 10.0;   // kernel reach for unbounded noise
  bool force_quadrature = false;  // bypass the step closed form (cross-checks)
};

// Thrown when the observed signal has zero likelihood on both sides of t, so
// no posterior is defined. Callers that can tolerate this (the simulator's
// resampling path) use the try_ variants instead.
struct NoSupportError : std::runtime_error {
  NoSupportError() : std::runtime_error("signal has no support on either side of t") {}
};

// P[theta < t | x, y] in the two-signal model x = theta + ex, y = A(theta) + ey.
double posterior_below_t_2d(double x, double y, const AttackProfile& profile,
                            const NoiseSpec& fx, const NoiseSpec& fy,
                            const PosteriorConfig& cfg = {});
std::optional<double> try_posterior_below_t_2d(double x, double y, const AttackProfile& profile,
                                               const NoiseSpec& fx, const NoiseSpec& fy,
                                               const PosteriorConfig& cfg = {});

// P[theta < t | z] in the one-signal model z = A(theta) - theta + rho.
double posterior_below_t_1d(double z, const AttackProfile& profile, const NoiseSpec& g,
                            const PosteriorConfig& cfg = {});
std::optional<double> try_posterior_below_t_1d(double z, const AttackProfile& profile,
                                               const NoiseSpec& g,
                                               const PosteriorConfig& cfg = {});

struct ValueWithError {
  double value;
  double error;  // |value_h - value_{h/2}| from one grid refinement
};
ValueWithError posterior_below_t_2d_refined(double x, double y, const AttackProfile& profile,
                                            const NoiseSpec& fx, const NoiseSpec& fy,
                                            const PosteriorConfig& cfg = {});

// P[A(theta) > theta | z_star] for the normal one-signal model with rate
// alpha_z = 1/sigma_z: ratio of the success-region kernel mass to the total
// kernel mass, flat prior in theta. Requires A(theta) - theta strictly
// decreasing across the profile.
double success_probability_1d(double z_star, const AttackProfile& profile, double alpha_z,
                              const PosteriorConfig& cfg = {});

}  // namespace runlab
