#include <cmath>
#include <vector>

#include "aoi/equilibrium.hpp"
#include "aoi/errors.hpp"
#include "aoi/transient.hpp"
#include "doctest.h"

using namespace aoi;

namespace {

std::vector<ClassSpec> one_class(double h, double p) { return {{1.0, p, h}}; }

std::vector<ClassSpec> two_linear_classes(double eps) {
  std::vector<ClassSpec> cs = {{0.5, 0.9, {}}, {0.5, 0.2, {}}};
  const auto hs = thresholds_linear(cs, eps);
  cs[0].threshold = hs[0];
  cs[1].threshold = hs[1];
  return cs;
}

}  // namespace

TEST_CASE("initialization validates the sampled density") {
  const auto cs = one_class(0.5, 1.0);
  const auto eq = solve_equilibrium(cs);
  const auto sol = TransientSolution::init(cs, equilibrium_initializer(eq), 1e-3,
                                           TransientSolution::default_h_max(cs));
  CHECK(sol.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.time() == 0.0);
  CHECK(sol.sup_distance(eq) < 1e-2);

  // all the initial mass beyond the grid: rejected, not silently renormalized
  CHECK_THROWS_AS(TransientSolution::init(
                      cs, gaussian_initializer(cs, 50.0, 0.1), 1e-3, 10.0),
                  Error);
  try {
    (void)TransientSolution::init(cs, gaussian_initializer(cs, 50.0, 0.1), 1e-3, 10.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MassDeficit);
  }

  // negative densities are rejected
  CHECK_THROWS_AS(TransientSolution::init(
                      cs, [](std::size_t, double) { return -1.0; }, 1e-3, 10.0),
                  Error);

  // degenerate grid parameters
  CHECK_THROWS_AS(TransientSolution::init(cs, equilibrium_initializer(eq), 0.0, 10.0),
                  Error);
  CHECK_THROWS_AS(TransientSolution::init(cs, equilibrium_initializer(eq), 1e-3, 0.25),
                  Error);
}

TEST_CASE("time step guards") {
  const auto cs = one_class(0.5, 1.0);
  const auto eq = solve_equilibrium(cs);
  auto sol = TransientSolution::init(cs, equilibrium_initializer(eq), 1e-3, 20.0);
  try {
    sol.step(2e-3);  // dt > dh violates the transport CFL bound
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CflViolation);
  }
  CHECK_THROWS_AS(sol.step(0.0), Error);
  CHECK_THROWS_AS(sol.step(-1e-3), Error);
  CHECK_THROWS_AS(sol.run_to(-1.0, 1e-3), Error);

  // zero-length run leaves the state untouched
  const auto before = sol.densities(0);
  sol.run_to(0.0, 1e-3);
  CHECK(sol.time() == 0.0);
  CHECK(sol.densities(0) == before);
}

TEST_CASE("equilibrium is a discrete near-fixed point") {
  // pure exponential: one step moves the sampled profile by O(dh) at most
  const auto cs = one_class(0.0, 1.0);
  const auto eq = solve_equilibrium(cs);
  const double dh = 1e-3;
  auto sol = TransientSolution::init(cs, equilibrium_initializer(eq), dh, 20.0);
  const auto before = sol.densities(0);
  sol.step(dh);
  double change = 0.0;
  for (std::size_t k = 0; k < sol.num_cells(); ++k)
    change = std::max(change, std::abs(sol.density(0, k) - before[k]));
  CHECK(change <= dh);

  // flat-plus-tail class: drift after a full unit of time stays within 10 dh
  const auto cs2 = one_class(0.5, 1.0);
  const auto eq2 = solve_equilibrium(cs2);
  auto sol2 = TransientSolution::init(cs2, equilibrium_initializer(eq2), dh,
                                      TransientSolution::default_h_max(cs2));
  const double d0 = sol2.sup_distance(eq2);
  sol2.run_to(1.0, dh);
  CHECK(sol2.sup_distance(eq2) <= d0 + 10.0 * dh);
  CHECK(sol2.sup_distance(eq2) <= 10.0 * dh);
  CHECK(std::abs(sol2.total_mass() - 1.0) <= 1e-3);
}

TEST_CASE("densities stay nonnegative and mass stays near one") {
  // near-boundary thresholds: the drain cap engages, the state must stay sane
  const auto cs = two_linear_classes(5e-4);
  auto sol = TransientSolution::init(cs, gaussian_initializer(cs, 0.5, 0.1), 1e-3, 6.0);
  sol.run_to(5.0, 1e-3);
  for (std::size_t c = 0; c < sol.num_classes(); ++c)
    for (std::size_t k = 0; k < sol.num_cells(); ++k)
      REQUIRE(sol.density(c, k) >= 0.0);
  // in the capped regime the refill/drain mismatch is the O(dh) mass sliver in
  // the threshold cell; at this grid it peaks a little under 2e-3
  CHECK(std::abs(sol.total_mass() - 1.0) <= 5e-3);
  CHECK(sol.max_mass_error() <= 5e-3);
  CHECK(sol.beta_last() > 0.0);
}

TEST_CASE("gaussian start relaxes toward the stationary profile") {
  // epsilon well inside the feasible region so the stationary tails are
  // resolvable at this grid step (tail scale beta/p of order 0.1)
  const auto cs = two_linear_classes(0.05);
  const auto eq = solve_equilibrium(cs);
  auto sol = TransientSolution::init(cs, gaussian_initializer(cs, 0.5, 0.1), 1e-3, 6.0);
  // sample after the initial sweep has cleared the thresholds
  double prev = sol.sup_distance(eq);
  CHECK(prev > 0.05);  // far from stationarity at t = 0
  std::vector<double> dists;
  for (double t : {4.0, 8.0, 14.0, 20.0}) {
    sol.run_to(t, 1e-3);
    dists.push_back(sol.sup_distance(eq));
  }
  for (std::size_t i = 1; i < dists.size(); ++i) CHECK(dists[i] < dists[i - 1] + 1e-9);
  CHECK(dists.back() < 0.05);
}
