#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpl/dgp.hpp"

namespace qpl {

/// Coefficients of a linear structural-quantile hypothesis
/// h(a, x; beta) = beta . phi(a, x). Length 4 in the 2-D setting, 2 in 1-D.
struct HypothesisParams {
  Eigen::VectorXd beta;
  /// Optional bound on ||beta||_2; checked by validate(), never enforced
  /// during optimization.
  std::optional<double> norm_bound;

  void validate() const;
};

/// phi(a, x): (x1, x2, a*x1, a*x2) in 2-D, (x1, a*x1) in 1-D.
Eigen::VectorXd hypothesis_features(int a, const Eigen::Vector2d& x, Setting setting);

std::size_t hypothesis_dim(Setting setting);

/// Map a hypothesis vector of either setting to the 4-vector layout
/// (b1, b2, b3, b4); 1-D vectors (b1, b2) become (b1, 0, b2, 0).
Eigen::Vector4d as_four(const Eigen::VectorXd& beta);

/// n x p matrix whose row i is phi(a_i, x_i).
Eigen::MatrixXd hypothesis_design(const IvDataset& data);

enum class BasisId { Main13, Appendix10, Custom };

/// A finite polynomial dictionary spanning the test-function class.
///
/// Each basis consumes a fixed-length input vector. Main13 and Appendix10 read
/// (x1, x2, z) where Appendix10 ignores x2; custom bases define their own input
/// layout and are evaluated over whatever rows the caller supplies.
class TestBasis {
 public:
  using FeatureFn = std::function<void(std::span<const double>, std::span<double>)>;

  TestBasis(BasisId id, std::size_t input_dim, std::vector<std::string> names, FeatureFn fn);

  /// {X1, X2, Z, X1X2, X1Z, X2Z, X1^2, X2^2, Z^2, X1^2 Z, X1 X2^2, Z^3, X1^2 X2^2}
  static TestBasis main13();
  /// {x, z, xz, x^2, z^2, xz^2, zx^2, x^3, z^3, x^2 z^2}
  static TestBasis appendix10();
  static TestBasis custom(std::size_t input_dim, std::vector<std::string> names, FeatureFn fn);

  BasisId id() const { return id_; }
  std::size_t dim() const { return names_.size(); }
  std::size_t input_dim() const { return input_dim_; }
  const std::vector<std::string>& names() const { return names_; }

  void evaluate(std::span<const double> input, std::span<double> out) const;
  Eigen::VectorXd evaluate(std::span<const double> input) const;

 private:
  BasisId id_;
  std::size_t input_dim_;
  std::vector<std::string> names_;
  FeatureFn fn_;
};

/// Row-per-sample design matrix (n x d) of a test basis over a dataset.
struct DesignMatrix {
  Eigen::MatrixXd m;

  Eigen::Index n() const { return m.rows(); }
  Eigen::Index d() const { return m.cols(); }
};

/// Rows from raw basis inputs (one input vector per row of `inputs`).
/// Throws DataError on a non-finite entry.
DesignMatrix build_design_matrix(const Eigen::MatrixXd& inputs, const TestBasis& basis);

/// IV overload: input row i is (x1_i, x2_i, z_i).
DesignMatrix build_design_matrix(const IvDataset& data, const TestBasis& basis);

/// Default NC dictionaries. Exposure basis over (e, a, x1, x2); augmented basis
/// over (a', x1, x2); bridge features h2(v, a, x) over (v, a, x1, x2).
TestBasis nc_exposure_basis();
TestBasis nc_augmented_basis();
TestBasis nc_bridge_features();

/// Input rows for the NC dictionaries above.
Eigen::MatrixXd nc_exposure_inputs(const NcDataset& data);
Eigen::MatrixXd nc_augmented_inputs(const NcDataset& data);
/// Bridge inputs (v, a, x1, x2), or (v, a', x1, x2) when `augmented`.
Eigen::MatrixXd nc_bridge_inputs(const NcDataset& data, bool augmented);

}  // namespace qpl
