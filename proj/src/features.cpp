#include "qpl/features.hpp"

#include <cmath>
#include <utility>

#include "qpl/error.hpp"
#include "qpl/format.hpp"

namespace qpl {

void HypothesisParams::validate() const {
  if (beta.size() != 2 && beta.size() != 4)
    throw ConfigError("hypothesis vector must have length 2 or 4, got " + std::to_string(beta.size()));
  if (!beta.allFinite()) throw DataError("hypothesis vector has non-finite entries");
  if (norm_bound) {
    if (!(*norm_bound > 0.0)) throw ConfigError("norm bound must be positive");
    if (beta.norm() > *norm_bound)
      throw ConfigError("||beta|| = " + fmt17(beta.norm()) + " exceeds bound " + fmt17(*norm_bound));
  }
}

std::size_t hypothesis_dim(Setting setting) { return setting == Setting::TwoD ? 4 : 2; }

Eigen::VectorXd hypothesis_features(int a, const Eigen::Vector2d& x, Setting setting) {
  if (setting == Setting::OneD) return Eigen::Vector2d(x(0), a * x(0));
  return Eigen::Vector4d(x(0), x(1), a * x(0), a * x(1));
}

Eigen::Vector4d as_four(const Eigen::VectorXd& beta) {
  if (beta.size() == 4) return beta;
  if (beta.size() == 2) return Eigen::Vector4d(beta(0), 0.0, beta(1), 0.0);
  throw ConfigError("hypothesis vector must have length 2 or 4");
}

Eigen::MatrixXd hypothesis_design(const IvDataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  if (data.setting == Setting::OneD) {
    Eigen::MatrixXd f(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& s = data.samples[static_cast<std::size_t>(i)];
      f(i, 0) = s.x1;
      f(i, 1) = s.a * s.x1;
    }
    return f;
  }
  Eigen::MatrixXd f(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = data.samples[static_cast<std::size_t>(i)];
    f(i, 0) = s.x1;
    f(i, 1) = s.x2;
    f(i, 2) = s.a * s.x1;
    f(i, 3) = s.a * s.x2;
  }
  return f;
}

TestBasis::TestBasis(BasisId id, std::size_t input_dim, std::vector<std::string> names, FeatureFn fn)
    : id_(id), input_dim_(input_dim), names_(std::move(names)), fn_(std::move(fn)) {
  if (names_.empty()) throw ConfigError("test basis must have at least one feature");
  if (!fn_) throw ConfigError("test basis needs a feature function");
}

TestBasis TestBasis::main13() {
  return TestBasis(BasisId::Main13, 3,
                   {"x1", "x2", "z", "x1*x2", "x1*z", "x2*z", "x1^2", "x2^2", "z^2", "x1^2*z", "x1*x2^2", "z^3",
                    "x1^2*x2^2"},
                   [](std::span<const double> in, std::span<double> out) {
                     const double x1 = in[0], x2 = in[1], z = in[2];
                     out[0] = x1;
                     out[1] = x2;
                     out[2] = z;
                     out[3] = x1 * x2;
                     out[4] = x1 * z;
                     out[5] = x2 * z;
                     out[6] = x1 * x1;
                     out[7] = x2 * x2;
                     out[8] = z * z;
                     out[9] = x1 * x1 * z;
                     out[10] = x1 * x2 * x2;
                     out[11] = z * z * z;
                     out[12] = x1 * x1 * x2 * x2;
                   });
}

TestBasis TestBasis::appendix10() {
  return TestBasis(BasisId::Appendix10, 3,
                   {"x", "z", "x*z", "x^2", "z^2", "x*z^2", "z*x^2", "x^3", "z^3", "x^2*z^2"},
                   [](std::span<const double> in, std::span<double> out) {
                     const double x = in[0], z = in[2];
                     out[0] = x;
                     out[1] = z;
                     out[2] = x * z;
                     out[3] = x * x;
                     out[4] = z * z;
                     out[5] = x * z * z;
                     out[6] = z * x * x;
                     out[7] = x * x * x;
                     out[8] = z * z * z;
                     out[9] = x * x * z * z;
                   });
}

TestBasis TestBasis::custom(std::size_t input_dim, std::vector<std::string> names, FeatureFn fn) {
  return TestBasis(BasisId::Custom, input_dim, std::move(names), std::move(fn));
}

void TestBasis::evaluate(std::span<const double> input, std::span<double> out) const {
  if (input.size() != input_dim_) throw ConfigError("basis input has wrong length");
  if (out.size() != dim()) throw ConfigError("basis output has wrong length");
  fn_(input, out);
}

Eigen::VectorXd TestBasis::evaluate(std::span<const double> input) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(dim()));
  evaluate(input, std::span<double>(out.data(), dim()));
  return out;
}

DesignMatrix build_design_matrix(const Eigen::MatrixXd& inputs, const TestBasis& basis) {
  if (static_cast<std::size_t>(inputs.cols()) != basis.input_dim())
    throw ConfigError("input width " + std::to_string(inputs.cols()) + " does not match basis input dimension " +
                      std::to_string(basis.input_dim()));
  const Eigen::Index n = inputs.rows();
  const auto d = static_cast<Eigen::Index>(basis.dim());
  // Fill row-major then copy so each row is contiguous for the callback.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, d);
  Eigen::VectorXd in(inputs.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    in = inputs.row(i).transpose();
    basis.evaluate(std::span<const double>(in.data(), static_cast<std::size_t>(in.size())),
                   std::span<double>(rows.row(i).data(), static_cast<std::size_t>(d)));
  }
  if (!rows.allFinite()) throw DataError("design matrix has a non-finite entry");
  return DesignMatrix{Eigen::MatrixXd(rows)};
}

DesignMatrix build_design_matrix(const IvDataset& data, const TestBasis& basis) {
  if (basis.id() == BasisId::Custom && basis.input_dim() != 3)
    throw ConfigError("IV design matrix requires a basis over (x1, x2, z)");
  Eigen::MatrixXd inputs(static_cast<Eigen::Index>(data.size()), 3);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    const auto r = static_cast<Eigen::Index>(i);
    inputs(r, 0) = s.x1;
    inputs(r, 1) = s.x2;
    inputs(r, 2) = s.z;
  }
  return build_design_matrix(inputs, basis);
}

TestBasis nc_exposure_basis() {
  return TestBasis::custom(4,
                           {"1", "e", "a", "x1", "x2", "a*e", "a*x1", "a*x2", "e^2", "e*x1", "e*x2", "x1^2", "x2^2"},
                           [](std::span<const double> in, std::span<double> out) {
                             const double e = in[0], a = in[1], x1 = in[2], x2 = in[3];
                             out[0] = 1.0;
                             out[1] = e;
                             out[2] = a;
                             out[3] = x1;
                             out[4] = x2;
                             out[5] = a * e;
                             out[6] = a * x1;
                             out[7] = a * x2;
                             out[8] = e * e;
                             out[9] = e * x1;
                             out[10] = e * x2;
                             out[11] = x1 * x1;
                             out[12] = x2 * x2;
                           });
}

TestBasis nc_augmented_basis() {
  return TestBasis::custom(3, {"1", "a'", "x1", "x2", "a'*x1", "a'*x2", "x1^2", "x2^2", "x1*x2"},
                           [](std::span<const double> in, std::span<double> out) {
                             const double a = in[0], x1 = in[1], x2 = in[2];
                             out[0] = 1.0;
                             out[1] = a;
                             out[2] = x1;
                             out[3] = x2;
                             out[4] = a * x1;
                             out[5] = a * x2;
                             out[6] = x1 * x1;
                             out[7] = x2 * x2;
                             out[8] = x1 * x2;
                           });
}

TestBasis nc_bridge_features() {
  return TestBasis::custom(4, {"1", "a", "v", "a*v", "x1", "x2"},
                           [](std::span<const double> in, std::span<double> out) {
                             const double v = in[0], a = in[1], x1 = in[2], x2 = in[3];
                             out[0] = 1.0;
                             out[1] = a;
                             out[2] = v;
                             out[3] = a * v;
                             out[4] = x1;
                             out[5] = x2;
                           });
}

Eigen::MatrixXd nc_exposure_inputs(const NcDataset& data) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()), 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    m.row(static_cast<Eigen::Index>(i)) << s.e, s.a, s.x1, s.x2;
  }
  return m;
}

Eigen::MatrixXd nc_augmented_inputs(const NcDataset& data) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()), 3);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    m.row(static_cast<Eigen::Index>(i)) << s.a_prime, s.x1, s.x2;
  }
  return m;
}

Eigen::MatrixXd nc_bridge_inputs(const NcDataset& data, bool augmented) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()), 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    m.row(static_cast<Eigen::Index>(i)) << s.v, augmented ? s.a_prime : s.a, s.x1, s.x2;
  }
  return m;
}

}  // namespace qpl
