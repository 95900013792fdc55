#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <json.hpp>

namespace runlab {

// Attack cost c in (0,1); an agent attacks iff the posterior probability of
// success is at least p_star, and p_star == c at the optimum.
struct GameConfig {
  double c = 0.5;
  double p_star = 0.5;
  static GameConfig with_cost(double c);
};

// attack (1) iff p_success >= p_star; ties attack
int optimal_action(double p_success, const GameConfig& game);

// Threshold-state parameters: sandwich half-widths delta (action side) and
// gamma (noise mass), private-signal margin xi, threshold t.
struct ThresholdParams {
  double t = 0.5;
  double delta = 0.2;
  double gamma = 0.1;
  double xi = 0.0;
};

// Evaluation window for attack profiles: [t - pad_lo, t + pad_hi], widened to
// cover [cover_lo, cover_hi] (both dominance regions), with t placed exactly
// on a node.
struct GridSpec {
  int n = 2001;
  double pad_lo = 3.0;
  double pad_hi = 4.0;
  double cover_lo = -1.0;
  double cover_hi = 2.0;
  std::vector<double> build(double t) const;
  // one grid for a family of thresholds: nearest nodes snapped onto each t
  std::vector<double> build_shared(const std::vector<double>& ts) const;
};

// A(theta) on a finite grid: piecewise linear within each side of the jump
// node, constant beyond the grid ends, with both one-sided limits stored at
// the jump. The node value at the jump is the right limit (A(t) = A(t+)).
class AttackProfile {
 public:
  static AttackProfile step(double t, double hi, double lo, std::vector<double> grid);
  static AttackProfile from_values(std::vector<double> grid, std::vector<double> values,
                                   std::size_t jump_index, double left_limit);

  double t() const { return grid_[jump_]; }
  std::size_t jump_index() const { return jump_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return value_; }
  double left_limit() const { return left_; }
  double right_limit() const { return value_[jump_]; }
  std::size_t size() const { return grid_.size(); }

  // one-sided node accessors: value_at is the right-continuous value,
  // left_value_at differs from it only at the jump node
  double value_at(std::size_t i) const { return value_[i]; }
  double left_value_at(std::size_t i) const { return i == jump_ ? left_ : value_[i]; }

  double eval(double theta) const;       // right-continuous at the jump
  double eval_left(double theta) const;  // left limit at the jump

  bool is_step() const;

  void to_csv(std::ostream& os) const;
  static AttackProfile from_csv(std::istream& is);
  nlohmann::json to_json() const;
  static AttackProfile from_json(const nlohmann::json& j);

 private:
  AttackProfile() = default;
  std::vector<double> grid_;
  std::vector<double> value_;
  std::size_t jump_ = 0;
  double left_ = 0.0;
};

struct SandwichReport {
  bool ok = false;
  double worst_margin = 0.0;  // negative when the sandwich fails
  double worst_theta = 0.0;
};

// A in [1-delta, 1] strictly left of t and in [0, delta] at and right of t;
// worst_margin is the smallest slack over all nodes and one-sided limits.
SandwichReport sandwich_check(const AttackProfile& profile, double t, double delta);

// max |A1 - A2| over shared grid nodes, comparing both one-sided limits at
// every jump node; requires identical grids.
double sup_norm_distance(const AttackProfile& a, const AttackProfile& b);

}  // namespace runlab
