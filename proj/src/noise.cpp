#include "runlab/noise.hpp"

#include <algorithm>
#include <cmath>

namespace runlab {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880168872420969808;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438187;
}  // namespace

double gaussian_pdf(double u, double sigma) {
  const double s = u / sigma;
  return kInvSqrt2Pi / sigma * std::exp(-0.5 * s * s);
}

double gaussian_cdf(double u, double sigma) {
  return 0.5 * std::erfc(-u / (sigma * kSqrt2));
}

double gaussian_quantile(double p, double sigma) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gaussian_quantile: p outside (0,1)");
  double lo = -42.0, hi = 42.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo)); ++i) {
    const double m = 0.5 * (lo + hi);
    (gaussian_cdf(m, 1.0) < p ? lo : hi) = m;
  }
  double q = 0.5 * (lo + hi);
  // one Newton step sharpens the bisection result to full precision
  const double r = gaussian_cdf(q, 1.0) - p;
  const double d = gaussian_pdf(q, 1.0);
  if (d > 0.0) q -= r / d;
  return q * sigma;
}

NoiseSpec NoiseSpec::uniform_bounded(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("uniform_bounded: sigma must be positive");
  NoiseSpec s;
  s.kind_ = NoiseKind::uniform_bounded;
  s.sigma_ = sigma;
  s.lo_ = -sigma;
  s.hi_ = sigma;
  return s;
}

NoiseSpec NoiseSpec::gaussian_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("gaussian_sigma: sigma must be positive");
  NoiseSpec s;
  s.kind_ = NoiseKind::gaussian;
  s.sigma_ = sigma;
  return s;
}

NoiseSpec NoiseSpec::gaussian_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("gaussian_alpha: alpha must be positive");
  return gaussian_sigma(1.0 / std::sqrt(alpha));
}

NoiseSpec NoiseSpec::custom_table(std::vector<double> grid, std::vector<double> density) {
  const std::size_t n = grid.size();
  if (n < 3 || density.size() != n)
    throw std::invalid_argument("custom_table: need matching grid/density with >= 3 nodes");
  const double span = grid.back() - grid.front();
  if (!(span > 0.0)) throw std::invalid_argument("custom_table: grid not increasing");
  const double h = span / static_cast<double>(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(grid[i + 1] - grid[i] - h) > 1e-9 * span)
      throw std::invalid_argument("custom_table: grid must be uniform");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(grid[i] + grid[n - 1 - i]) > 1e-9 * span)
      throw std::invalid_argument("custom_table: grid must be symmetric about 0");
    if (!(density[i] >= 0.0) || !std::isfinite(density[i]))
      throw std::invalid_argument("custom_table: density must be finite and nonnegative");
    if (std::abs(density[i] - density[n - 1 - i]) > 1e-6 * (1.0 + std::abs(density[i])))
      throw std::invalid_argument("custom_table: density must be symmetric");
  }
  // symmetrize exactly, then renormalize so the trapezoid integral is 1
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double m = 0.5 * (density[i] + density[n - 1 - i]);
    density[i] = density[n - 1 - i] = m;
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) total += 0.5 * h * (density[i] + density[i + 1]);
  if (!(total > 0.0)) throw std::invalid_argument("custom_table: density integrates to zero");
  for (auto& d : density) d /= total;

  NoiseSpec s;
  s.kind_ = NoiseKind::custom_table;
  s.lo_ = grid.front();
  s.hi_ = grid.back();
  s.grid_ = std::move(grid);
  s.dens_ = std::move(density);
  s.cum_.assign(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += 0.5 * h * (s.dens_[i] + s.dens_[i + 1]);
    s.cum_[i + 1] = acc;
  }
  const double tot = s.cum_.back();
  for (auto& c : s.cum_) c /= tot;  // forces cum_.back() == 1.0 exactly
  double var = 0.0;  // trapezoid second moment, for the std-dev-equivalent scale
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = s.grid_[i], b = s.grid_[i + 1];
    var += 0.5 * (b - a) * (a * a * s.dens_[i] + b * b * s.dens_[i + 1]);
  }
  s.sigma_ = std::sqrt(std::max(var, 1e-300));
  return s;
}

double NoiseSpec::density(double u) const {
  switch (kind_) {
    case NoiseKind::uniform_bounded:
      return (u < lo_ || u > hi_) ? 0.0 : 0.5 / sigma_;
    case NoiseKind::gaussian:
      return gaussian_pdf(u, sigma_);
    case NoiseKind::custom_table: {
      if (u < lo_ || u > hi_) return 0.0;
      const double h = (hi_ - lo_) / static_cast<double>(grid_.size() - 1);
      std::size_t i = std::min<std::size_t>(
          static_cast<std::size_t>(std::max(0.0, (u - lo_) / h)), grid_.size() - 2);
      const double w = (u - grid_[i]) / (grid_[i + 1] - grid_[i]);
      return dens_[i] + w * (dens_[i + 1] - dens_[i]);
    }
  }
  return 0.0;
}

double NoiseSpec::cumulative(double u) const {
  switch (kind_) {
    case NoiseKind::uniform_bounded: {
      if (u <= lo_) return 0.0;
      if (u >= hi_) return 1.0;
      return (u - lo_) / (hi_ - lo_);
    }
    case NoiseKind::gaussian:
      return gaussian_cdf(u, sigma_);
    case NoiseKind::custom_table: {
      if (u <= lo_) return 0.0;
      if (u >= hi_) return 1.0;
      const double h = (hi_ - lo_) / static_cast<double>(grid_.size() - 1);
      std::size_t i = std::min<std::size_t>(
          static_cast<std::size_t>(std::max(0.0, (u - lo_) / h)), grid_.size() - 2);
      const double d = u - grid_[i];
      const double slope = (dens_[i + 1] - dens_[i]) / h;
      return std::min(1.0, cum_[i] + dens_[i] * d + 0.5 * slope * d * d);
    }
  }
  return 0.0;
}

double NoiseSpec::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile: p outside (0,1)");
  switch (kind_) {
    case NoiseKind::uniform_bounded:
      return (2.0 * p - 1.0) * sigma_;
    case NoiseKind::gaussian:
      return gaussian_quantile(p, sigma_);
    case NoiseKind::custom_table: {
      const auto it = std::upper_bound(cum_.begin(), cum_.end(), p);
      std::size_t i = static_cast<std::size_t>(
          std::max<std::ptrdiff_t>(0, std::distance(cum_.begin(), it) - 1));
      i = std::min(i, grid_.size() - 2);
      const double h = grid_[i + 1] - grid_[i];
      const double target = p - cum_[i];
      const double f0 = dens_[i];
      const double slope = (dens_[i + 1] - dens_[i]) / h;
      double d;
      if (std::abs(slope) < 1e-14 * (1.0 + f0)) {
        d = (f0 > 0.0) ? target / f0 : 0.0;
      } else {
        const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * target);
        d = (-f0 + std::sqrt(disc)) / slope;
      }
      return grid_[i] + std::clamp(d, 0.0, h);
    }
  }
  return 0.0;
}

NoiseSpec::Envelope NoiseSpec::density_envelope(double eta, double a_lo, double a_hi) const {
  if (!(a_lo <= a_hi)) throw std::invalid_argument("density_envelope: a_lo > a_hi");
  const double v_lo = eta - a_hi;
  const double v_hi = eta - a_lo;
  if (kind_ == NoiseKind::custom_table) {
    // piecewise-linear extrema sit at table nodes or interval endpoints
    double sup = std::max(density(v_lo), density(v_hi));
    double inf = std::min(density(v_lo), density(v_hi));
    for (double g : grid_) {
      if (g > v_lo && g < v_hi) {
        const double d = density(g);
        sup = std::max(sup, d);
        inf = std::min(inf, d);
      }
    }
    return {sup, inf};
  }
  // symmetric unimodal: sup at the argument closest to 0, inf at the farthest
  double closest;
  if (v_lo <= 0.0 && 0.0 <= v_hi) closest = 0.0;
  else closest = (v_hi < 0.0) ? v_hi : v_lo;
  const double farthest = (std::abs(v_lo) > std::abs(v_hi)) ? v_lo : v_hi;
  return {density(closest), density(farthest)};
}

std::string NoiseSpec::kind_name() const {
  switch (kind_) {
    case NoiseKind::uniform_bounded: return "uniform_bounded";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::custom_table: return "custom_table";
  }
  return "?";
}

}  // namespace runlab
