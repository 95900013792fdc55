#include <doctest.h>

#include <cstddef>
#include <vector>

#include "runlab/iterate.hpp"
#include "runlab/model.hpp"
#include "runlab/noise.hpp"
#include "runlab/simulate.hpp"
#include "runlab/tipping.hpp"

using runlab::AttackProfile;
using runlab::ErrorGridSpec;
using runlab::Exec;
using runlab::GameConfig;
using runlab::GridSpec;
using runlab::NoiseSpec;

namespace {

void check_identical(const AttackProfile& a, const AttackProfile& b) {
  REQUIRE(a.size() == b.size());
  REQUIRE(a.jump_index() == b.jump_index());
  CHECK(a.left_limit() == b.left_limit());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.grid()[i] == b.grid()[i]);
    CHECK(a.value_at(i) == b.value_at(i));
  }
}

}  // namespace

TEST_CASE("parallel best response is bit identical to serial") {
  GridSpec gs;
  gs.n = 301;
  const auto grid = gs.build(0.5);
  const auto start = AttackProfile::step(0.5, 0.8, 0.2, grid);
  const auto fx = NoiseSpec::gaussian_sigma(0.3);
  const auto fy = NoiseSpec::gaussian_sigma(0.2);
  const auto game = GameConfig::with_cost(0.5);
  const auto rx = runlab::build_error_rule(fx, 33, 8.0);
  const auto ry = runlab::build_error_rule(fy, 33, 8.0);
  const auto ser = runlab::best_response_2d(start, fx, fy, game, rx, ry, {}, Exec::serial);
  const auto par = runlab::best_response_2d(start, fx, fy, game, rx, ry, {}, Exec::parallel);
  check_identical(ser, par);
}

TEST_CASE("parallel iteration reproduces the serial equilibrium exactly") {
  GridSpec gs;
  gs.n = 301;
  const auto start = runlab::start_profile(gs, 0.5, 0.2, runlab::Start::inner_step);
  const auto fx = NoiseSpec::gaussian_sigma(0.3);
  const auto fy = NoiseSpec::gaussian_sigma(0.2);
  const auto game = GameConfig::with_cost(0.5);
  ErrorGridSpec eg;
  eg.n_x = 33;
  eg.n_y = 33;
  runlab::IterationSettings st;
  st.max_iter = 3;
  st.conv_tol = 0.0;  // run the full three updates on both paths
  st.enforce_band = false;
  st.exec = Exec::serial;
  const auto ser = runlab::iterate_equilibrium_two_signal(start, fx, fy, game, eg, {}, st);
  st.exec = Exec::parallel;
  const auto par = runlab::iterate_equilibrium_two_signal(start, fx, fy, game, eg, {}, st);
  CHECK(ser.iterations == par.iterations);
  CHECK(ser.final_change == par.final_change);
  check_identical(ser.profile, par.profile);
}

TEST_CASE("parallel branch assembly matches serial node for node") {
  const auto grid = GridSpec{}.build(0.5);
  const auto ser = runlab::assemble_branch_profile(5.0, 0.0, grid, 0.5, Exec::serial);
  const auto par = runlab::assemble_branch_profile(5.0, 0.0, grid, 0.5, Exec::parallel);
  check_identical(ser, par);
}

TEST_CASE("parallel multiplicity sweep matches serial row for row") {
  const std::vector<double> alphas = {1.0, 2.0, 2.51, 3.0, 5.0, 8.0};
  const auto ser = runlab::multiplicity_sweep(alphas, 0.1, Exec::serial);
  const auto par = runlab::multiplicity_sweep(alphas, 0.1, Exec::parallel);
  REQUIRE(ser.size() == par.size());
  for (std::size_t i = 0; i < ser.size(); ++i) {
    CHECK(ser[i].alpha == par[i].alpha);
    CHECK(ser[i].max_roots == par[i].max_roots);
    // NaN rows must agree as NaN; compare through bit patterns of equality
    const bool lo_same = ser[i].theta_lo == par[i].theta_lo ||
                         (ser[i].theta_lo != ser[i].theta_lo && par[i].theta_lo != par[i].theta_lo);
    const bool hi_same = ser[i].theta_hi == par[i].theta_hi ||
                         (ser[i].theta_hi != ser[i].theta_hi && par[i].theta_hi != par[i].theta_hi);
    CHECK(lo_same);
    CHECK(hi_same);
  }
}

TEST_CASE("parallel simulation draws the same population as serial") {
  const auto prof = runlab::assemble_branch_profile(5.0, 0.0, GridSpec{}.build(0.5), 0.5,
                                                    Exec::serial);
  const auto g = NoiseSpec::gaussian_sigma(1.0);
  runlab::SimConfig cfg;
  cfg.model = runlab::SimModel::normal_fixed_point;
  cfg.n_agents = 50000;
  cfg.seed = 31;
  cfg.exec = Exec::serial;
  const auto ser = runlab::simulate_once(0.45, 0, prof, g, g, GameConfig::with_cost(0.5), cfg);
  cfg.exec = Exec::parallel;
  const auto par = runlab::simulate_once(0.45, 0, prof, g, g, GameConfig::with_cost(0.5), cfg);
  CHECK(ser.a_realized == par.a_realized);
  CHECK(ser.z_score == par.z_score);
  CHECK(ser.resampled == par.resampled);
  CHECK(ser.success == par.success);
}
