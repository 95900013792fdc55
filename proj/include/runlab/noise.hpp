#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace runlab {

double gaussian_pdf(double u, double sigma);   // N(0, sigma^2) density
double gaussian_cdf(double u, double sigma);   // via erfc, |error| < 1e-12
double gaussian_quantile(double p, double sigma);

enum class NoiseKind { uniform_bounded, gaussian, custom_table };

// Symmetric, unimodal, mean-zero noise distribution. Scale conventions:
// sigma is the half-width for uniform_bounded and the standard deviation for
// gaussian; alpha = 1/sigma^2 is the gaussian precision. (The one-signal
// normal fixed-point model uses a rate alpha_z = 1/sigma_z instead; that
// parameter is passed directly to the tipping module, not through NoiseSpec.)
class NoiseSpec {
 public:
  static NoiseSpec uniform_bounded(double sigma);
  static NoiseSpec gaussian_sigma(double sigma);
  static NoiseSpec gaussian_alpha(double alpha);  // alpha = 1/sigma^2
  // Piecewise-linear density on a uniform symmetric grid; renormalized to
  // integrate to 1 exactly (trapezoid) and symmetrized.
  static NoiseSpec custom_table(std::vector<double> grid, std::vector<double> density);

  NoiseKind kind() const { return kind_; }
  double sigma() const { return sigma_; }  // custom_table: std-dev equivalent
  double alpha() const { return 1.0 / (sigma_ * sigma_); }
  bool bounded() const { return kind_ != NoiseKind::gaussian; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }

  double density(double u) const;
  double cumulative(double u) const;
  // p in (0,1); cumulative(quantile(p)) == p within 1e-9 wherever density > 0
  double quantile(double p) const;

  struct Envelope { double sup; double inf; };
  // sup / inf of density(eta - a) over a in [a_lo, a_hi]
  Envelope density_envelope(double eta, double a_lo, double a_hi) const;

  std::string kind_name() const;

 private:
  NoiseSpec() = default;
  NoiseKind kind_ = NoiseKind::gaussian;
  double sigma_ = 1.0;
  double lo_ = -std::numeric_limits<double>::infinity();
  double hi_ = std::numeric_limits<double>::infinity();
  // custom_table data
  std::vector<double> grid_;
  std::vector<double> dens_;
  std::vector<double> cum_;  // cdf at grid nodes, cum_.back() == 1 exactly
};

}  // namespace runlab
