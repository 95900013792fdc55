#pragma once

#include <vector>

#include "runlab/exec.hpp"
#include "runlab/model.hpp"

namespace runlab {

// Normal one-signal fixed-point model: the aggregate attack solves
// A = 1 - Phi(alpha_z (z_star - A + theta)), with alpha_z = 1/sigma_z the
// signal precision rate. Multiple solutions appear exactly when
// alpha_z > sqrt(2 pi).

inline constexpr double kCriticalAlpha = 2.5066282746310007;  // sqrt(2 pi)

struct FixedPoint {
  double attack = 0.0;
  int branch = 0;        // 1 high, 2 middle (or unique sub-critical), 3 low
  bool stable = false;   // alpha_z * phi < 1 at the root
  bool near_tangent = false;  // |alpha_z * phi - 1| < 1e-3
};

// All solutions in [0,1] for fundamentals theta and signal cutoff z_star.
std::vector<FixedPoint> attack_fixed_points(double alpha_z, double z_star, double theta);

struct TangencyInterval {
  bool exists = false;
  double u0 = 0.0;        // tangency abscissa, alpha-dependent
  double theta_lo = 0.0;  // below: unique high root
  double theta_hi = 0.0;  // above: unique low root
  double a_fold_lo = 0.0;  // low fold attack level, 1 - Phi(u0)
  double a_fold_hi = 0.0;  // high fold attack level, Phi(u0)
};

// Closed-form multiplicity window: three roots exist exactly for theta in
// (theta_lo, theta_hi), with folds at u = +-u0, u0 = sqrt(2 ln(alpha/sqrt(2 pi))).
TangencyInterval tangency_interval(double alpha_z, double z_star);

enum class SwitchRule { midpoint, lower_edge, upper_edge };

// Threshold at which an equilibrium selection jumps from the high branch to
// the low branch; edges sit 1e-6 of the width inside the interval.
double switch_theta(const TangencyInterval& iv, SwitchRule rule);

// Equilibrium selection as an attack profile: high branch left of the switch
// point, low branch at and right of it. theta_switch must be a grid node
// inside the tangency interval. Solved per node with bisection plus a Newton
// polish; nodes are independent, so the loop parallelizes.
AttackProfile assemble_branch_profile(double alpha_z, double z_star,
                                      const std::vector<double>& grid, double theta_switch,
                                      Exec exec);

struct CutoffResult {
  double z_star = 0.0;
  double psi_at = 0.0;     // success probability at z_star
  double jump_gap = 0.0;   // psi(hi) - psi(lo) across the final bracket
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool continuous = true;  // false when psi jumps across the root
};

// Solve psi(z_star) = c where psi is the posterior success probability of the
// marginal agent under the selection rule. psi is nondecreasing in z_star;
// with the midpoint rule it is continuous, with edge rules the solver reports
// a jump crossing honestly instead of a root.
CutoffResult solve_cutoff_zstar(double alpha_z, double c, SwitchRule rule, const GridSpec& gs,
                                Exec exec);

struct SweepRow {
  double alpha = 0.0;
  double theta_lo = 0.0;  // NaN when no multiplicity window exists
  double theta_hi = 0.0;
  int max_roots = 1;
};

// Root-count sweep over signal precisions at fixed z_star. Probes include the
// tangency-interval midpoint so thin windows just above the critical alpha
// are not missed.
std::vector<SweepRow> multiplicity_sweep(const std::vector<double>& alphas, double z_star,
                                         Exec exec);

}  // namespace runlab
