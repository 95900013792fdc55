#include "runlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace runlab {

GameConfig GameConfig::with_cost(double c) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("GameConfig: c outside (0,1)");
  return GameConfig{c, c};
}

int optimal_action(double p_success, const GameConfig& game) {
  return p_success >= game.p_star ? 1 : 0;
}

std::vector<double> GridSpec::build(double t) const {
  return build_shared({t});
}

std::vector<double> GridSpec::build_shared(const std::vector<double>& ts) const {
  if (n < 5) throw std::invalid_argument("GridSpec: n too small");
  if (ts.empty()) throw std::invalid_argument("GridSpec: no thresholds");
  double lo = cover_lo, hi = cover_hi;
  for (double t : ts) {
    lo = std::min(lo, t - pad_lo);
    hi = std::max(hi, t + pad_hi);
  }
  std::vector<double> g(static_cast<std::size_t>(n));
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + h * i;
  g.front() = lo;
  g.back() = hi;
  // snap the nearest node onto each threshold so it is a grid point exactly
  for (double t : ts) {
    const auto k = static_cast<std::size_t>(
        std::clamp(std::llround((t - lo) / h), 1ll, static_cast<long long>(n - 2)));
    g[k] = t;
  }
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    if (!(g[i] < g[i + 1]))
      throw std::invalid_argument("GridSpec: thresholds too close for this resolution");
  return g;
}

namespace {

std::size_t find_node(const std::vector<double>& grid, double t) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-12);
  if (it == grid.end() || std::abs(*it - t) > 1e-9)
    throw std::invalid_argument("AttackProfile: t is not a grid node");
  return static_cast<std::size_t>(std::distance(grid.begin(), it));
}

void validate_profile(const std::vector<double>& grid, const std::vector<double>& values,
                      std::size_t jump, double left) {
  if (grid.size() < 3 || values.size() != grid.size())
    throw std::invalid_argument("AttackProfile: grid/values size mismatch");
  if (jump == 0 || jump + 1 >= grid.size())
    throw std::invalid_argument("AttackProfile: jump node must be interior");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1]))
      throw std::invalid_argument("AttackProfile: grid must be strictly increasing");
  auto in01 = [](double v) { return v >= -1e-12 && v <= 1.0 + 1e-12; };
  for (double v : values)
    if (!in01(v)) throw std::invalid_argument("AttackProfile: values must lie in [0,1]");
  if (!in01(left)) throw std::invalid_argument("AttackProfile: left limit outside [0,1]");
}

}  // namespace

AttackProfile AttackProfile::step(double t, double hi, double lo, std::vector<double> grid) {
  if (!(hi >= lo)) throw std::invalid_argument("step: hi < lo");
  const std::size_t jump = find_node(grid, t);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = i < jump ? hi : lo;
  return from_values(std::move(grid), std::move(values), jump, hi);
}

AttackProfile AttackProfile::from_values(std::vector<double> grid, std::vector<double> values,
                                         std::size_t jump_index, double left_limit) {
  validate_profile(grid, values, jump_index, left_limit);
  AttackProfile p;
  p.grid_ = std::move(grid);
  p.value_ = std::move(values);
  p.jump_ = jump_index;
  p.left_ = left_limit;
  for (auto& v : p.value_) v = std::clamp(v, 0.0, 1.0);
  p.left_ = std::clamp(p.left_, 0.0, 1.0);
  return p;
}

double AttackProfile::eval(double theta) const {
  if (theta <= grid_.front()) return value_.front();
  if (theta >= grid_.back()) return value_.back();
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), theta);
  const std::size_t i = static_cast<std::size_t>(std::distance(grid_.begin(), it)) - 1;
  if (grid_[i] == theta) return value_[i];
  // the panel [grid_[i], grid_[i+1]] never straddles the jump: t is a node
  const double w = (theta - grid_[i]) / (grid_[i + 1] - grid_[i]);
  const double right_end = (i + 1 == jump_) ? left_ : value_[i + 1];
  return value_[i] + w * (right_end - value_[i]);
}

double AttackProfile::eval_left(double theta) const {
  if (theta == grid_[jump_]) return left_;
  return eval(theta);
}

bool AttackProfile::is_step() const {
  const double hi = left_;
  const double lo = value_[jump_];
  for (std::size_t i = 0; i < jump_; ++i)
    if (value_[i] != hi) return false;
  for (std::size_t i = jump_; i < value_.size(); ++i)
    if (value_[i] != lo) return false;
  return true;
}

SandwichReport sandwich_check(const AttackProfile& profile, double t, double delta) {
  if (!(delta >= 0.0 && delta <= 0.5)) throw std::invalid_argument("sandwich_check: delta outside [0,0.5]");
  SandwichReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  auto consider = [&](double theta, double v, bool left_of_t) {
    const double m = left_of_t ? std::min(v - (1.0 - delta), 1.0 - v)
                               : std::min(v - 0.0, delta - v);
    if (m < rep.worst_margin) {
      rep.worst_margin = m;
      rep.worst_theta = theta;
    }
  };
  const auto& g = profile.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    consider(g[i], profile.value_at(i), g[i] < t);
    if (g[i] == profile.t()) consider(g[i], profile.left_value_at(i), g[i] <= t);
  }
  rep.ok = rep.worst_margin >= 0.0;
  return rep;
}

double sup_norm_distance(const AttackProfile& a, const AttackProfile& b) {
  if (a.grid() != b.grid())
    throw std::invalid_argument("sup_norm_distance: profiles use different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a.value_at(i) - b.value_at(i)));
    d = std::max(d, std::abs(a.left_value_at(i) - b.left_value_at(i)));
  }
  return d;
}

namespace {
std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void AttackProfile::to_csv(std::ostream& os) const {
  os << "theta,A,side\n";
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (i == jump_) {
      os << fmt17(grid_[i]) << ',' << fmt17(left_) << ",L\n";
      os << fmt17(grid_[i]) << ',' << fmt17(value_[i]) << ",R\n";
    } else {
      os << fmt17(grid_[i]) << ',' << fmt17(value_[i]) << ",\n";
    }
  }
}

AttackProfile AttackProfile::from_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("profile csv: empty");
  while (!line.empty() && line.front() == '#') {
    if (!std::getline(is, line)) throw std::invalid_argument("profile csv: no header");
  }
  if (line.rfind("theta,A,side", 0) != 0)
    throw std::invalid_argument("profile csv: bad header");
  std::vector<double> grid, values;
  double left = -1.0;
  std::ptrdiff_t jump = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c);
    const double theta = std::stod(a);
    const double v = std::stod(b);
    if (c == "L") {
      left = v;
      jump = static_cast<std::ptrdiff_t>(grid.size());
    } else {
      grid.push_back(theta);
      values.push_back(v);
    }
  }
  if (jump < 0) throw std::invalid_argument("profile csv: missing jump rows");
  return from_values(std::move(grid), std::move(values), static_cast<std::size_t>(jump), left);
}

nlohmann::json AttackProfile::to_json() const {
  return nlohmann::json{{"grid", grid_},
                        {"values", value_},
                        {"jump_index", jump_},
                        {"left_limit", left_}};
}

AttackProfile AttackProfile::from_json(const nlohmann::json& j) {
  return from_values(j.at("grid").get<std::vector<double>>(),
                     j.at("values").get<std::vector<double>>(),
                     j.at("jump_index").get<std::size_t>(),
                     j.at("left_limit").get<double>());
}

}  // namespace runlab
