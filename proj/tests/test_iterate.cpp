#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "runlab/iterate.hpp"
#include "runlab/model.hpp"
#include "runlab/noise.hpp"
#include "runlab/posterior.hpp"

using runlab::AttackProfile;
using runlab::ErrorGridSpec;
using runlab::GameConfig;
using runlab::GridSpec;
using runlab::IterationSettings;
using runlab::NoiseSpec;
using runlab::PosteriorConfig;
using runlab::Start;

TEST_CASE("error rule has unit mass, symmetry, and exact uniform moments") {
  for (const auto& spec : {NoiseSpec::uniform_bounded(0.25), NoiseSpec::gaussian_sigma(0.2)}) {
    const auto rule = runlab::build_error_rule(spec, 65, 8.0);
    REQUIRE(rule.nodes.size() == 65);
    double mass = 0.0, mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      mass += rule.weights[i];
      mean += rule.weights[i] * rule.nodes[i];
      var += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
      CHECK(rule.nodes[i] ==
            doctest::Approx(-rule.nodes[rule.nodes.size() - 1 - i]).epsilon(1e-14));
      CHECK(rule.weights[i] == doctest::Approx(rule.weights[rule.nodes.size() - 1 - i]).epsilon(1e-15));
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-14));
    if (spec.bounded()) {
      // Simpson integrates the quadratic exactly on the closed support
      CHECK(var == doctest::Approx(0.25 * 0.25 / 3.0).epsilon(1e-13));
      CHECK(rule.nodes.front() == -0.25);
      CHECK(rule.nodes.back() == 0.25);
    } else {
      CHECK(var == doctest::Approx(0.2 * 0.2).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(runlab::build_error_rule(NoiseSpec::gaussian_sigma(0.2), 64, 8.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(runlab::build_error_rule(NoiseSpec::gaussian_sigma(0.2), 1, 8.0),
                  std::invalid_argument);
}

TEST_CASE("bounded two signal best response fixes the full step exactly") {
  const auto fx = NoiseSpec::uniform_bounded(0.25);
  const auto fy = NoiseSpec::uniform_bounded(0.25);
  const auto game = GameConfig::with_cost(0.5);
  const auto rx = runlab::build_error_rule(fx, 129, 8.0);
  const auto ry = runlab::build_error_rule(fy, 129, 8.0);
  for (double t : {0.1, 0.5, 0.9}) {
    const auto a = AttackProfile::step(t, 1.0, 0.0, GridSpec{}.build(t));
    const auto br = runlab::best_response_2d(a, fx, fy, game, rx, ry, PosteriorConfig{},
                                             runlab::Exec::serial);
    CHECK(br.grid() == a.grid());
    CHECK(br.jump_index() == a.jump_index());
    CHECK(runlab::sup_norm_distance(br, a) <= 1e-12);
    CHECK(br.is_step());
  }
}

TEST_CASE("two signal best response tracks a Monte Carlo evaluation") {
  const auto fx = NoiseSpec::gaussian_sigma(0.3);
  const auto fy = NoiseSpec::gaussian_sigma(0.2);
  const auto game = GameConfig::with_cost(0.5);
  const double t = 0.5;
  GridSpec gs;
  gs.n = 501;
  const auto a = AttackProfile::step(t, 0.8, 0.2, gs.build(t));
  const auto rx = runlab::build_error_rule(fx, 257, 8.0);
  const auto ry = runlab::build_error_rule(fy, 257, 8.0);
  const auto br = runlab::best_response_2d(a, fx, fy, game, rx, ry, PosteriorConfig{},
                                           runlab::Exec::serial);
  int probe = 0;
  for (double theta : {0.35, 0.5, 0.65}) {
    const double mc =
        oracle::attack_fraction_mc(theta, a, fx, fy, game.p_star, 1000000, 991 + probe++, {});
    CHECK(std::abs(br.eval(theta) - mc) <= 3e-3);
  }
}

TEST_CASE("one signal cutoff lands on closed form crossings") {
  const auto game = GameConfig::with_cost(0.5);
  const PosteriorConfig pcfg;

  SUBCASE("symmetric bounded tie sits at zero") {
    const auto a = AttackProfile::step(0.5, 0.8, 0.2, GridSpec{}.build(0.5));
    const auto g = NoiseSpec::uniform_bounded(0.25);
    CHECK(std::abs(runlab::cutoff_1d(a, g, game, pcfg, 0.1)) <= 1e-12);
  }
  SUBCASE("support gap tie point of the shifted profile") {
    const auto a = AttackProfile::step(0.3, 0.8, 0.2, GridSpec{}.build(0.3));
    const auto g = NoiseSpec::uniform_bounded(0.25);
    CHECK(runlab::cutoff_1d(a, g, game, pcfg, 1.0) == doctest::Approx(0.2).epsilon(1e-10));
  }
  SUBCASE("smooth gaussian crossings match an independent bisection") {
    const auto a = AttackProfile::step(0.5, 0.8, 0.2, GridSpec{}.build(0.5));
    const auto g = NoiseSpec::gaussian_sigma(0.2);
    CHECK(std::abs(runlab::cutoff_1d(a, g, game, pcfg, 0.1)) <= 1e-10);
    for (double c : {0.3, 0.7}) {
      const auto gm = GameConfig::with_cost(c);
      const auto post = [&](double z) {
        const double ib = static_cast<double>(oracle::Phi((z - 0.3) / 0.2));
        const double ia = 1.0 - static_cast<double>(oracle::Phi((z + 0.3) / 0.2));
        return ib / (ib + ia);
      };
      double lo = -2.0, hi = 2.0;
      for (int k = 0; k < 100; ++k) {
        const double mid = 0.5 * (lo + hi);
        (post(mid) < c ? lo : hi) = mid;
      }
      CHECK(runlab::cutoff_1d(a, g, gm, pcfg, 0.1) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
    }
  }
}

TEST_CASE("one signal best response follows the closed form at every node") {
  const auto a = AttackProfile::step(0.5, 0.8, 0.2, GridSpec{}.build(0.5));
  const auto g = NoiseSpec::gaussian_sigma(0.2);
  const double z = 0.07;
  const auto br = runlab::best_response_1d(a, g, z);
  REQUIRE(br.grid() == a.grid());
  REQUIRE(br.jump_index() == a.jump_index());
  for (std::size_t i = 0; i < br.size(); ++i) {
    const double want =
        1.0 - static_cast<double>(oracle::Phi((z - a.value_at(i) + a.grid()[i]) / 0.2));
    CHECK(std::abs(br.value_at(i) - want) <= 1e-13);
  }
  const double want_left =
      1.0 - static_cast<double>(oracle::Phi((z - a.left_limit() + a.t()) / 0.2));
  CHECK(std::abs(br.left_limit() - want_left) <= 1e-13);
}

TEST_CASE("start profiles bracket the band") {
  const GridSpec gs;
  const auto inner = runlab::start_profile(gs, 0.5, 0.2, Start::inner_step);
  const auto full = runlab::start_profile(gs, 0.5, 0.2, Start::full_step);
  CHECK(inner.left_limit() == 0.8);
  CHECK(inner.right_limit() == 0.2);
  CHECK(full.left_limit() == 1.0);
  CHECK(full.right_limit() == 0.0);
  CHECK(runlab::sandwich_check(inner, 0.5, 0.2).ok);
  CHECK(runlab::sandwich_check(full, 0.5, 0.2).ok);
}

TEST_CASE("bounded one signal iteration converges in two exact steps") {
  const auto g = NoiseSpec::uniform_bounded(0.25);
  const auto game = GameConfig::with_cost(0.5);
  IterationSettings settings;
  settings.band_delta = 0.2;
  const auto start = runlab::start_profile(GridSpec{}, 0.5, 0.2, Start::inner_step);
  const auto res =
      runlab::iterate_equilibrium_one_signal(start, g, game, 0.1, PosteriorConfig{}, settings);
  CHECK(res.converged);
  CHECK(res.iterations == 2);
  CHECK(res.final_change == 0.0);
  CHECK(res.z_cut == 0.0);
  REQUIRE(res.z_trace.size() == 2);
  // iterate 1 bisects onto the near-zero penalty crossover; iterate 2 hits the
  // exactly representable full-step tie
  CHECK(std::abs(res.z_trace[0]) <= 1e-12);
  CHECK(res.z_trace[1] == 0.0);
  REQUIRE(res.change_trace.size() == 2);
  CHECK(res.change_trace[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(res.change_trace[1] == 0.0);
  CHECK(res.profile.eval(0.3) == 1.0);
  CHECK(res.profile.eval(0.7) == 0.0);
  // iteration 0 plus both iterates stay inside the band
  REQUIRE(res.band_trace.size() == 3);
  for (const auto& b : res.band_trace) CHECK(b.ok);
}

TEST_CASE("band enforcement rejects a start outside the sandwich") {
  const auto g = NoiseSpec::uniform_bounded(0.25);
  const auto game = GameConfig::with_cost(0.5);
  IterationSettings settings;
  settings.band_delta = 0.1;  // inner step at delta 0.2 sits outside this band
  const auto start = runlab::start_profile(GridSpec{}, 0.5, 0.2, Start::inner_step);
  try {
    runlab::iterate_equilibrium_one_signal(start, g, game, 0.1, PosteriorConfig{}, settings);
    FAIL("expected HypothesisFailure");
  } catch (const runlab::HypothesisFailure& e) {
    CHECK(e.iteration == 0);
    CHECK(e.worst_margin < 0.0);
  }
}

TEST_CASE("smooth one signal iteration respects the cutoff and slope bounds") {
  const double delta = 0.2, gamma = 0.1, sigma = 0.04;
  const auto g = NoiseSpec::gaussian_sigma(sigma);
  const auto game = GameConfig::with_cost(0.5);
  IterationSettings settings;
  settings.band_delta = delta;
  const auto start = runlab::start_profile(GridSpec{}, 0.5, delta, Start::inner_step);
  const auto res =
      runlab::iterate_equilibrium_one_signal(start, g, game, gamma, PosteriorConfig{}, settings);
  REQUIRE(res.converged);
  for (double z : res.z_trace) {
    CHECK(z > -gamma);
    CHECK(z < gamma);
  }
  for (const auto& b : res.band_trace) CHECK(b.ok);

  // density bound at delta - gamma holds, so slopes obey the implicit bound
  const double gd = g.density(delta - gamma);
  REQUIRE(gd < 1.0);
  const double bound = -gd / (1.0 - gd);
  const auto& gr = res.profile.grid();
  const auto& val = res.profile.values();
  for (std::size_t i = 0; i + 1 < gr.size(); ++i) {
    if (i + 1 == res.profile.jump_index()) continue;  // slope across the jump is unconstrained
    const double slope = (val[i + 1] - val[i]) / (gr[i + 1] - gr[i]);
    CHECK(slope <= 1e-12);
    CHECK(slope >= bound - 1e-9);
  }

  // the converged profile is a genuine fixed point under a refined posterior
  PosteriorConfig refined;
  refined.quad_nodes = 2 * PosteriorConfig{}.quad_nodes;
  refined.truncation_N = 2 * PosteriorConfig{}.truncation_N;
  const double z_ref = runlab::cutoff_1d(res.profile, g, game, refined, gamma);
  const auto br = runlab::best_response_1d(res.profile, g, z_ref);
  CHECK(runlab::sup_norm_distance(res.profile, br) <= 2.0 * settings.conv_tol);
}

TEST_CASE("bounded family members are separated by a full unit") {
  GridSpec gs;
  gs.n = 1001;
  const auto fx = NoiseSpec::uniform_bounded(0.25);
  const auto fy = NoiseSpec::uniform_bounded(0.25);
  const auto game = GameConfig::with_cost(0.5);
  const std::vector<double> ts = {0.4, 0.5, 0.6};
  const auto fam = runlab::equilibrium_family_two_signal(
      ts, gs, fx, fy, game, 0.2, ErrorGridSpec{65, 65, 8.0}, PosteriorConfig{}, IterationSettings{});
  REQUIRE(fam.members.size() == 3);
  for (const auto& m : fam.members) {
    CHECK(m.converged);
    CHECK(m.iterations == 2);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(fam.pairwise[i][j] == fam.pairwise[j][i]);
      if (i == j)
        CHECK(fam.pairwise[i][j] == 0.0);
      else
        CHECK(fam.pairwise[i][j] == 1.0);
    }
  }
  // every member ends sandwiched around its own threshold
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(runlab::sandwich_check(fam.members[i].profile, ts[i], 0.2).ok);
}
