#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qpl/error.hpp"
#include "qpl/eval.hpp"

using namespace qpl;

namespace {

const Eigen::Vector4d kTruth(1, 1, 3, 2);
const double kOptimal = std::sqrt(24.4) / std::sqrt(2.0 * std::numbers::pi);

Eigen::VectorXd dyn(const Eigen::Vector4d& v) { return v; }

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("policy action rule") {
    const LinearPolicy p{Eigen::Vector2d(3, 2)};
    CHECK(p.act({1, 0}) == 1);
    CHECK(p.act({-1, 0}) == 0);
    CHECK(p.act({2, -3}) == 0);  // tie
    CHECK(LinearPolicy::greedy(dyn(kTruth)).gate == Eigen::Vector2d(3, 2));
  }

  TEST_CASE("optimal value against a brute-force average") {
    const auto dist = ContextDistribution::bivariate_gaussian(0.95);
    const double v = value_closed_form(dyn(kTruth), LinearPolicy{Eigen::Vector2d(3, 2)}, dist).value;
    CHECK(v == doctest::Approx(kOptimal).epsilon(1e-14));
    CHECK(std::abs(v - 1.9706) < 0.01);
    CHECK(std::abs(v - oracle::brute_value(kTruth, {3, 2}, 0.95, 10000000, 1)) < 0.002);
  }

  TEST_CASE("degenerate and reflected gates") {
    const auto dist = ContextDistribution::bivariate_gaussian(0.95);
    CHECK(value_closed_form(dyn(kTruth), LinearPolicy{}, dist).value == 0.0);
    const double up = value_closed_form(dyn(kTruth), LinearPolicy{Eigen::Vector2d(3, 2)}, dist).value;
    const double down = value_closed_form(dyn(kTruth), LinearPolicy{Eigen::Vector2d(-3, -2)}, dist).value;
    CHECK(up == -down);
    CHECK(std::abs(oracle::brute_value(kTruth, {-3, -2}, 0.95, 2000000, 3) + up) < 0.01);
  }

  TEST_CASE("closed form agrees with Monte Carlo") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-0.9, 0.95);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd b = Eigen::Vector4d(normal(rng), normal(rng), 2 * normal(rng), 2 * normal(rng));
      const LinearPolicy pol{Eigen::Vector2d(normal(rng), normal(rng))};
      const auto dist = ContextDistribution::bivariate_gaussian(unif(rng));
      const ValueEstimate mc = value_monte_carlo(b, pol, dist, 200000, 100 + static_cast<std::uint64_t>(trial));
      const double cf = value_closed_form(b, pol, dist).value;
      CHECK(std::abs(cf - mc.value) <= 4.0 * mc.std_error);
      CHECK(mc.draws == 200000);
    }
  }

  TEST_CASE("single-context law") {
    const auto dist = ContextDistribution::univariate();
    const Eigen::VectorXd b = Eigen::Vector2d(1.0, 3.0);
    const LinearPolicy pol = LinearPolicy::greedy(b);
    // E[3 X 1{X > 0}] = 3 / sqrt(2 pi).
    CHECK(value_closed_form(b, pol, dist).value == doctest::Approx(3.0 / std::sqrt(2.0 * std::numbers::pi)));
    const ValueEstimate mc = value_monte_carlo(b, pol, dist, 200000, 4);
    CHECK(std::abs(mc.value - value_closed_form(b, pol, dist).value) <= 4.0 * mc.std_error);
  }

  TEST_CASE("Monte Carlo determinism and point masses") {
    const auto dist = ContextDistribution::bivariate_gaussian(0.5);
    const LinearPolicy pol{Eigen::Vector2d(1, -1)};
    const auto a = value_monte_carlo(dyn(kTruth), pol, dist, 1, 42);
    const auto b = value_monte_carlo(dyn(kTruth), pol, dist, 1, 42);
    CHECK(a.value == b.value);
    CHECK(a.seed == 42);

    const auto point = ContextDistribution::empirical({Eigen::Vector2d(1.0, 2.0)});
    const auto pm = value_monte_carlo(dyn(kTruth), LinearPolicy{Eigen::Vector2d(1, 1)}, point, 50, 1);
    CHECK(pm.value == structural_quantile(1, {1.0, 2.0}, kTruth));
    CHECK(pm.std_error == 0.0);
    CHECK(value_closed_form(dyn(kTruth), LinearPolicy{Eigen::Vector2d(1, 1)}, point).value == 10.0);

    CHECK_THROWS_AS(value_monte_carlo(dyn(kTruth), pol, dist, 0, 1), ConfigError);
  }

  TEST_CASE("empirical closed form is the sample average") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::Vector2d> xs;
    for (int i = 0; i < 100; ++i) xs.emplace_back(normal(rng), normal(rng));
    const LinearPolicy pol{Eigen::Vector2d(0.4, -1.0)};
    double direct = 0.0;
    for (const auto& x : xs) direct += structural_quantile(pol.act(x), x, kTruth);
    direct /= 100.0;
    CHECK(value_closed_form(dyn(kTruth), pol, ContextDistribution::empirical(xs)).value ==
          doctest::Approx(direct).epsilon(1e-13));
  }

  TEST_CASE("regret") {
    const auto dist = ContextDistribution::bivariate_gaussian(0.95);
    CHECK(regret(LinearPolicy{Eigen::Vector2d(3, 2)}, kTruth, dist) == 0.0);
    CHECK(regret(LinearPolicy{Eigen::Vector2d(-3, -2)}, kTruth, dist) == doctest::Approx(2.0 * kOptimal));
    CHECK(regret(LinearPolicy{Eigen::Vector2d(-3, -2)}, kTruth, dist) == doctest::Approx(3.9411).epsilon(1e-4));
    DgpConfig cfg;
    CHECK(regret(LinearPolicy{Eigen::Vector2d(3, 2)}, cfg, dist) == 0.0);

    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
      const Eigen::Vector2d g(normal(rng), normal(rng));
      const double r = regret(LinearPolicy{g}, kTruth, dist);
      CHECK(r >= -1e-12);
      // Power-of-two scalings are exact in floating point; others to rounding.
      CHECK(regret(LinearPolicy{4.0 * g}, kTruth, dist) == r);
      CHECK(std::abs(regret(LinearPolicy{3.7 * g}, kTruth, dist) - r) < 1e-12);
    }
  }

  TEST_CASE("invalid context laws") {
    CHECK_THROWS_AS(ContextDistribution::bivariate_gaussian(1.0), ConfigError);
    CHECK_THROWS_AS(ContextDistribution::empirical({}), ConfigError);
  }
}
