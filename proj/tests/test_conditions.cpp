#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "runlab/conditions.hpp"
#include "runlab/noise.hpp"

using runlab::ConditionReport;
using runlab::HorizonConfig;
using runlab::Hypothesis;
using runlab::NoiseSpec;
using runlab::SearchGrid;

namespace {

const Hypothesis& item(const ConditionReport& r, const std::string& name) {
  for (const auto& h : r.items)
    if (h.name == name) return h;
  throw std::logic_error("missing hypothesis: " + name);
}

double min_enforced_margin(const ConditionReport& r) {
  double m = 1e300;
  for (const auto& h : r.items)
    if (!h.informational) m = std::min(m, h.margin);
  return m;
}

void check_overall_consistency(const ConditionReport& r) {
  bool all = r.status == "conclusive";
  for (const auto& h : r.items)
    if (!h.informational && !h.pass) all = false;
  CHECK(r.overall == all);
}

}  // namespace

TEST_CASE("bounded regime checks gate on the noise width") {
  auto r = runlab::check_two_signal_bounded(0.25);
  CHECK(r.overall);
  CHECK(item(r, "noise_precision").margin == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(item(r, "separation_gap").margin == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(runlab::check_two_signal_bounded(0.49).overall);
  r = runlab::check_two_signal_bounded(0.5);  // width one half closes the gap
  CHECK_FALSE(r.overall);
  CHECK_FALSE(item(r, "noise_precision").pass);
  CHECK_FALSE(item(r, "separation_gap").pass);

  CHECK(runlab::check_one_signal_bounded(0.25, 0.5).overall);
  r = runlab::check_one_signal_bounded(0.25, 0.25);  // threshold on the edge
  CHECK_FALSE(r.overall);
  CHECK_FALSE(item(r, "threshold_above").pass);
  CHECK(item(r, "threshold_above").margin == doctest::Approx(0.0).epsilon(1e-12));
  r = runlab::check_one_signal_bounded(0.25, 0.75);
  CHECK_FALSE(item(r, "threshold_below").pass);
  r = runlab::check_one_signal_bounded(0.6, 0.65);
  CHECK_FALSE(item(r, "noise_precision").pass);
  for (const auto& rep :
       {runlab::check_two_signal_bounded(0.3), runlab::check_one_signal_bounded(0.3, 0.4)})
    check_overall_consistency(rep);
}

TEST_CASE("two signal hypotheses pass in the concentrated regime") {
  const auto fx = NoiseSpec::gaussian_sigma(0.3);
  const auto fy = NoiseSpec::gaussian_alpha(1e4);
  const double xi = fx.quantile(0.81);
  const auto r = runlab::check_two_signal(fx, fy, 0.2, 0.1, xi, 0.5);
  CHECK(r.overall);
  CHECK(r.status == "conclusive");
  CHECK(item(r, "band_order").margin == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(item(r, "band_mass").margin == doctest::Approx(0.2).epsilon(1e-12));
  // every density in the ratio scan underflows: the worst ratio is exactly zero
  CHECK(item(r, "ratio_bound").margin == 1.0);
  CHECK(item(r, "ratio_bound").witness.at("ratio").get<double>() == 0.0);
  CHECK(item(r, "mass_bound").margin == doctest::Approx(0.01).epsilon(1e-9));
  check_overall_consistency(r);
}

TEST_CASE("a diffuse second signal breaks the ratio bound") {
  const auto fx = NoiseSpec::gaussian_sigma(0.3);
  const auto fy = NoiseSpec::gaussian_sigma(1.0);
  const double xi = fx.quantile(0.81);
  const auto r = runlab::check_two_signal(fx, fy, 0.2, 0.1, xi, 0.5);
  CHECK_FALSE(r.overall);
  const auto& rb = item(r, "ratio_bound");
  CHECK_FALSE(rb.pass);
  CHECK(rb.margin < -1.0);
  // the recorded witness reproduces its own ratio and margin
  const double eta = rb.witness.at("eta").get<double>();
  const double odds = rb.witness.at("odds_x").get<double>();
  const double sup = fy.density_envelope(eta, 0.0, 0.2).sup;
  const double inf = fy.density_envelope(eta, 0.8, 1.0).inf;
  const double ratio = rb.witness.at("ratio").get<double>();
  CHECK(ratio == doctest::Approx(odds * sup / inf).epsilon(1e-10));
  CHECK(rb.margin == doctest::Approx(1.0 - ratio).epsilon(1e-10));
  check_overall_consistency(r);
}

TEST_CASE("sharper second signals enlarge the ratio margin monotonically") {
  const auto fx = NoiseSpec::gaussian_sigma(0.3);
  const double xi = fx.quantile(0.81);
  const std::vector<double> sigmas = {1.0, 0.5, 0.25, 0.1, 0.01};
  const std::vector<bool> want_pass = {false, false, false, true, true};
  double prev = -1e300, odds = 0.0;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const auto r = runlab::check_two_signal(fx, NoiseSpec::gaussian_sigma(sigmas[k]), 0.2, 0.1,
                                            xi, 0.5);
    const auto& rb = item(r, "ratio_bound");
    CHECK(rb.pass == want_pass[k]);
    CHECK(rb.margin > prev);
    prev = rb.margin;
    if (k == 0) odds = rb.witness.at("odds_x").get<double>();
    // the binding point is the scan start, where the gaussian ratio is in
    // closed form: odds times exp(-0.08 / sigma^2)
    if (sigmas[k] == 0.25)
      CHECK(rb.margin ==
            doctest::Approx(1.0 - odds * 0.2780373004531941).epsilon(1e-9));
  }
}

TEST_CASE("one signal hypotheses pass in the concentrated regime") {
  const auto g = NoiseSpec::gaussian_sigma(0.04);
  const auto r = runlab::check_one_signal(g, 0.2, 0.1, 0.5);
  CHECK(r.overall);
  CHECK(r.status == "conclusive");
  CHECK(item(r, "tail_ratio_bound").pass);
  CHECK(item(r, "mass_bound").margin == doctest::Approx(0.19379033467422386).epsilon(1e-9));
  CHECK(item(r, "density_bound").margin ==
        doctest::Approx(0.5617924876607866).epsilon(1e-9));
  // the stated-direction reading fails here, and that must not veto the report
  const auto& sd = item(r, "tail_ratio_stated_direction");
  CHECK(sd.informational);
  CHECK_FALSE(sd.pass);
  CHECK(r.overall);
  check_overall_consistency(r);
}

TEST_CASE("one signal hypotheses fail honestly as the noise widens") {
  // slightly wider noise: only the density bound flips
  auto r = runlab::check_one_signal(NoiseSpec::gaussian_sigma(0.05), 0.2, 0.1, 0.5);
  CHECK_FALSE(r.overall);
  CHECK(item(r, "tail_ratio_bound").pass);
  CHECK(item(r, "mass_bound").pass);
  CHECK_FALSE(item(r, "density_bound").pass);
  CHECK(item(r, "density_bound").margin ==
        doctest::Approx(-0.07981933026376104).epsilon(1e-9));

  // unit noise at wide bands: the tail ratio binds at the grid corner
  const auto g = NoiseSpec::gaussian_sigma(1.0);
  r = runlab::check_one_signal(g, 0.45, 0.45, 0.5);
  CHECK_FALSE(r.overall);
  const auto& tr = item(r, "tail_ratio_bound");
  CHECK_FALSE(tr.pass);
  CHECK(tr.witness.at("xi").get<double>() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(tr.witness.at("a").get<double>() == 0.45);
  CHECK(tr.witness.at("b").get<double>() == 1.0);
  const double ratio = tr.witness.at("ratio").get<double>();
  CHECK(ratio == doctest::Approx(3.4599055606197376).epsilon(1e-10));
  const double xi = tr.witness.at("xi").get<double>();
  CHECK(ratio == doctest::Approx((1.0 - g.cumulative(xi - 0.45)) / g.cumulative(xi - 1.0))
                     .epsilon(1e-10));
  CHECK(item(r, "mass_bound").margin == doctest::Approx(0.12364477971208).epsilon(1e-9));
  check_overall_consistency(r);
}

TEST_CASE("horizon control reports inconclusive scans") {
  const auto g = NoiseSpec::gaussian_sigma(0.04);
  auto r = runlab::check_one_signal(g, 0.2, 0.1, 0.5, HorizonConfig{1.0, 300});
  CHECK(r.status == "inconclusive");
  CHECK_FALSE(r.overall);  // passing margins cannot rescue a truncated scan
  CHECK(item(r, "tail_ratio_bound").pass);
  r = runlab::check_one_signal(g, 0.2, 0.1, 0.5, HorizonConfig{1.2, 300});
  CHECK(r.status == "conclusive");
  CHECK(r.overall);

  const auto fx = NoiseSpec::gaussian_sigma(0.3);
  const auto fy = NoiseSpec::uniform_bounded(0.25);
  auto r2 = runlab::check_two_signal(fx, fy, 0.2, 0.1, 0.25, 0.5, HorizonConfig{0.3, 200});
  CHECK(r2.status == "inconclusive");
  CHECK_FALSE(r2.overall);
  r2 = runlab::check_two_signal(fx, fy, 0.2, 0.1, 0.25, 0.5, HorizonConfig{0.5, 200});
  CHECK(r2.status == "conclusive");
}

TEST_CASE("argument validation rejects malformed condition inputs") {
  const auto g = NoiseSpec::gaussian_sigma(0.1);
  CHECK_THROWS_AS(runlab::check_two_signal_bounded(0.0), std::invalid_argument);
  CHECK_THROWS_AS(runlab::check_one_signal_bounded(-1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(runlab::check_two_signal(g, g, 0.0, 0.1, 0.2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(runlab::check_two_signal(g, g, 0.2, 0.1, 0.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(runlab::check_one_signal(g, 0.6, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(runlab::check_one_signal(g, 0.2, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("report serialization mirrors the fields") {
  const auto r = runlab::check_one_signal(NoiseSpec::gaussian_sigma(0.04), 0.2, 0.1, 0.5);
  const auto j = r.to_json();
  CHECK(j.at("id").get<std::string>() == "one_signal");
  CHECK(j.at("overall").get<bool>() == r.overall);
  CHECK(j.at("status").get<std::string>() == r.status);
  REQUIRE(j.at("items").size() == r.items.size());
  for (std::size_t i = 0; i < r.items.size(); ++i) {
    const auto& e = j.at("items")[i];
    CHECK(e.at("name").get<std::string>() == r.items[i].name);
    CHECK(e.at("pass").get<bool>() == r.items[i].pass);
    CHECK(e.at("margin").get<double>() == r.items[i].margin);
    CHECK(e.at("informational").get<bool>() == r.items[i].informational);
  }
}

TEST_CASE("parameter search finds a certified two signal point") {
  const auto fx = NoiseSpec::gaussian_sigma(0.3);
  const auto fy = NoiseSpec::gaussian_alpha(1e4);
  const auto res = runlab::search_params_two_signal(fx, fy, 0.5);
  REQUIRE(res.feasible);
  CHECK(res.report.overall);
  CHECK(res.best_min_margin > 0.0);
  CHECK(res.delta >= 0.005);
  CHECK(res.delta <= 0.45);
  CHECK(res.gamma >= 0.005);
  CHECK(res.gamma <= 0.45);
  CHECK(res.xi_quantile >= 0.55);
  CHECK(res.xi_quantile <= 0.995 + 1e-9);  // grid accumulates a few ulps
  CHECK(std::abs(fx.cumulative(res.xi) - res.xi_quantile) <= 1e-8);
  // the certificate re-check reproduces the margin the search optimized
  CHECK(res.best_min_margin ==
        doctest::Approx(min_enforced_margin(res.report)).epsilon(1e-8));
}

TEST_CASE("parameter search reports two signal infeasibility with counts") {
  const auto fx = NoiseSpec::gaussian_sigma(0.3);
  const auto fy = NoiseSpec::gaussian_alpha(0.5);  // too diffuse for any band
  const auto res = runlab::search_params_two_signal(fx, fy, 0.5);
  CHECK_FALSE(res.feasible);
  CHECK(res.best_min_margin < 0.0);
  CHECK_FALSE(res.report.overall);
  CHECK(res.report.items.empty());
  CHECK(res.failure_stats.at("mass_bound").get<long long>() > 0);
  CHECK(res.failure_stats.contains("ratio_bound"));
  CHECK(res.failure_stats.contains("side_constraints"));
}

TEST_CASE("one signal search certifies and rejects by noise width") {
  const auto res =
      runlab::search_params_one_signal(NoiseSpec::gaussian_sigma(0.04), 0.5);
  REQUIRE(res.feasible);
  CHECK(res.report.overall);
  CHECK(res.best_min_margin > 0.0);
  // the stored report is the deterministic re-check at the best point
  const auto again =
      runlab::check_one_signal(NoiseSpec::gaussian_sigma(0.04), res.delta, res.gamma, 0.5);
  REQUIRE(again.items.size() == res.report.items.size());
  for (std::size_t i = 0; i < again.items.size(); ++i)
    CHECK(again.items[i].margin == res.report.items[i].margin);

  const SearchGrid coarse{0.05, 0.45, 0.05};
  const auto bad = runlab::search_params_one_signal(NoiseSpec::gaussian_sigma(1.0), 0.5,
                                                    coarse, coarse);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.failure_stats.at("ratio_bound").get<long long>() > 0);
  CHECK(bad.failure_stats.at("mass_bound").get<long long>() > 0);
}
