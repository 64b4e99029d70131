#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "qpl/error.hpp"
#include "qpl/eval.hpp"
#include "qpl/features.hpp"

using namespace qpl;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("hypothesis features") {
    CHECK(hypothesis_features(1, {1, 2}, Setting::TwoD) == vec({1, 2, 1, 2}));
    CHECK(hypothesis_features(0, {1, 2}, Setting::TwoD) == vec({1, 2, 0, 0}));
    CHECK(hypothesis_features(1, {3, 0}, Setting::OneD) == vec({3, 3}));
    CHECK(hypothesis_features(0, {3, 0}, Setting::OneD) == vec({3, 0}));
    CHECK(hypothesis_dim(Setting::TwoD) == 4);
    CHECK(hypothesis_dim(Setting::OneD) == 2);
  }

  TEST_CASE("four-vector layout") {
    CHECK(as_four(vec({1, 2, 3, 4})) == Eigen::Vector4d(1, 2, 3, 4));
    CHECK(as_four(vec({5, 7})) == Eigen::Vector4d(5, 0, 7, 0));
    CHECK_THROWS_AS(as_four(vec({1, 2, 3})), ConfigError);
  }

  TEST_CASE("hypothesis parameter validation") {
    HypothesisParams h{vec({1, 1, 3, 2}), std::nullopt};
    CHECK_NOTHROW(h.validate());
    h.norm_bound = 1.0;
    CHECK_THROWS_AS(h.validate(), ConfigError);
    h.norm_bound = 10.0;
    CHECK_NOTHROW(h.validate());
    h.beta(0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(h.validate(), DataError);
    h.beta = vec({1, 2, 3});
    CHECK_THROWS_AS(h.validate(), ConfigError);
  }

  TEST_CASE("main basis rows") {
    const TestBasis b = TestBasis::main13();
    CHECK(b.dim() == 13);
    Eigen::MatrixXd in(2, 3);
    in << 1, 1, 1, 2, 0, 0;
    const DesignMatrix dm = build_design_matrix(in, b);
    CHECK(dm.n() == 2);
    CHECK(dm.d() == 13);
    CHECK(dm.m.row(0) == Eigen::RowVectorXd::Ones(13));
    Eigen::RowVectorXd expect = Eigen::RowVectorXd::Zero(13);
    expect(0) = 2;
    expect(6) = 4;
    CHECK(dm.m.row(1) == expect);

    // Generic point: each monomial in the stated order.
    const double x1 = 1.5, x2 = -0.5, z = 2.0;
    const Eigen::VectorXd f = b.evaluate(std::vector<double>{x1, x2, z});
    const Eigen::VectorXd want = vec({x1, x2, z, x1 * x2, x1 * z, x2 * z, x1 * x1, x2 * x2, z * z, x1 * x1 * z,
                                      x1 * x2 * x2, z * z * z, x1 * x1 * x2 * x2});
    CHECK((f - want).norm() == 0.0);
  }

  TEST_CASE("appendix basis rows") {
    const TestBasis b = TestBasis::appendix10();
    CHECK(b.dim() == 10);
    const Eigen::VectorXd f = b.evaluate(std::vector<double>{0.0, 0.0, 3.0});
    CHECK(f == vec({0, 3, 0, 0, 9, 0, 0, 0, 27, 0}));
    const Eigen::VectorXd g = b.evaluate(std::vector<double>{2.0, 9.0, 1.0});
    CHECK(g == vec({2, 1, 2, 4, 1, 2, 4, 8, 1, 4}));
  }

  TEST_CASE("non-finite inputs are data errors") {
    Eigen::MatrixXd in(1, 3);
    in << 1, std::numeric_limits<double>::infinity(), 0;
    CHECK_THROWS_AS(build_design_matrix(in, TestBasis::main13()), DataError);
    Eigen::MatrixXd wrong(1, 2);
    wrong << 1, 2;
    CHECK_THROWS_AS(build_design_matrix(wrong, TestBasis::main13()), ConfigError);
  }

  TEST_CASE("dataset design matrices") {
    IvDataset d;
    d.samples = {{1, 1, 1, 1, 0.0}, {2, 0, 0, 0, 0.0}};
    const DesignMatrix dm = build_design_matrix(d, TestBasis::main13());
    CHECK(dm.m.row(0) == Eigen::RowVectorXd::Ones(13));
    const Eigen::MatrixXd h = hypothesis_design(d);
    CHECK(h.rows() == 2);
    CHECK(h.row(0) == Eigen::RowVector4d(1, 1, 1, 1));
    CHECK(h.row(1) == Eigen::RowVector4d(2, 0, 0, 0));
  }

  TEST_CASE("custom basis") {
    const TestBasis b = TestBasis::custom(1, {"1", "u"}, [](std::span<const double> in, std::span<double> out) {
      out[0] = 1.0;
      out[1] = in[0];
    });
    CHECK(b.id() == BasisId::Custom);
    Eigen::MatrixXd in(3, 1);
    in << 1, 2, 3;
    const DesignMatrix dm = build_design_matrix(in, b);
    CHECK(dm.m.col(0) == Eigen::VectorXd::Ones(3));
    CHECK(dm.m.col(1) == vec({1, 2, 3}));
  }

  TEST_CASE("negative-control dictionaries") {
    NcDataset d;
    d.samples = {{0.5, -1.0, 2.0, 3.0, 1, 0.0, 0}};
    CHECK(build_design_matrix(nc_exposure_inputs(d), nc_exposure_basis()).d() == 13);
    CHECK(build_design_matrix(nc_augmented_inputs(d), nc_augmented_basis()).d() == 9);
    const Eigen::MatrixXd obs = build_design_matrix(nc_bridge_inputs(d, false), nc_bridge_features()).m;
    const Eigen::MatrixXd aug = build_design_matrix(nc_bridge_inputs(d, true), nc_bridge_features()).m;
    // (1, a, v, a v, x1, x2) with a = 1 observed, a' = 0 augmented.
    CHECK(obs.row(0) == Eigen::RowVectorXd(vec({1, 1, 3, 3, 0.5, -1}).transpose()));
    CHECK(aug.row(0) == Eigen::RowVectorXd(vec({1, 0, 3, 0, 0.5, -1}).transpose()));
  }

  TEST_CASE("greedy decisions are invariant to positive scaling") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::VectorXd beta = vec({normal(rng), normal(rng), normal(rng), normal(rng)});
      const double c = std::exp(2.0 * normal(rng));
      const LinearPolicy p = LinearPolicy::greedy(beta), q = LinearPolicy::greedy(c * beta);
      for (int k = 0; k < 20; ++k) {
        const Eigen::Vector2d x(normal(rng), normal(rng));
        CHECK(p.act(x) == q.act(x));
      }
    }
  }
}
