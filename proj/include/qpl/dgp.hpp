#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qpl {

/// Dimensionality of the context. `TwoD` is the main simulation design with
/// X = (X1, X2); `OneD` is the single-context variant where x2 is pinned to 0
/// and hypotheses carry two coefficients instead of four.
enum class Setting { TwoD, OneD };

struct IvSample {
  double x1 = 0.0;
  double x2 = 0.0;
  double z = 0.0;
  int a = 0;
  double y = 0.0;
};

/// Parameters of the confounded IV data collection process.
struct DgpConfig {
  std::size_t n = 1000;
  double alpha = 0.2;
  double rho = 0.95;
  /// Fraction of samples whose action follows the structured (confounded)
  /// assignment score; the rest get a pure-noise score.
  double p_structured = 0.7;
  double b_plus = 8.0;
  double b_minus = -5.0;
  Eigen::Vector4d beta_true{1.0, 1.0, 3.0, 2.0};
  std::uint64_t seed = 0;

  /// Throws ConfigError if alpha is outside (0,1), rho outside (-1,1) or the
  /// equicorrelation matrix is not positive definite, or p outside [0,1].
  void validate() const;
};

struct IvDataset {
  std::vector<IvSample> samples;
  double alpha = 0.0;
  DgpConfig meta;
  Setting setting = Setting::TwoD;
  /// The drawn structural errors, one per sample. Not observable in practice;
  /// kept so tests can check y - h*(a, x) == eps exactly.
  std::vector<double> eps;

  std::size_t size() const { return samples.size(); }
};

IvDataset generate_iv_dataset(const DgpConfig& config);

/// Single-context design: X, Z ~ N(0,1) independent, a fraction `p_noise` of
/// samples get a noise assignment score, the rest t = X + Z + eps + gamma*1{X>0}.
/// Y = X + 3XA + eps. Stored with x2 = 0 and meta.beta_true = (1, 0, 3, 0).
IvDataset generate_appendix_dataset(std::size_t n, double alpha, double p_noise,
                                    double gamma, std::uint64_t seed);

struct NcSample {
  double x1 = 0.0;
  double x2 = 0.0;
  double e = 0.0;
  double v = 0.0;
  int a = 0;
  double y = 0.0;
  int a_prime = 0;
};

/// Negative-control design built around a latent confounder U ~ N(0,1):
///   eps = kappa*U + nu + shift,  nu ~ N(0, eps_noise^2)
///   E   = U + e_noise*N(0,1),    V = U + v_noise*N(0,1)
///   A   ~ Bernoulli(sigmoid(X1 + 0.5*X2 + u_action*U + N(0,1)))
/// The shift puts the marginal alpha-quantile of eps at exactly zero.
struct NcDgpConfig {
  std::size_t n = 1000;
  double alpha = 0.2;
  double kappa = 1.0;
  double rho = 0.95;
  double e_noise = 0.5;
  double v_noise = 0.5;
  double eps_noise = 1.0;
  double u_action = 1.0;
  Eigen::Vector4d beta_true{1.0, 1.0, 3.0, 2.0};
  std::uint64_t seed = 0;

  void validate() const;
};

struct NcDataset {
  std::vector<NcSample> samples;
  double alpha = 0.0;
  NcDgpConfig meta;
  std::vector<double> eps;

  std::size_t size() const { return samples.size(); }
};

NcDataset generate_nc_dataset(const NcDgpConfig& config);

/// Location shift applied to kappa*U + nu so that P(eps <= 0) = alpha.
double nc_epsilon_shift(const NcDgpConfig& config);

/// h(a, x; beta) = b1*x1 + b2*x2 + a*(b3*x1 + b4*x2).
double structural_quantile(int a, const Eigen::Vector2d& x, const Eigen::Vector4d& beta);

/// 1 iff 3*x1 + 2*x2 > 0. Ties go to action 0.
int oracle_policy(const Eigen::Vector2d& x);

/// Standard normal quantile function.
double normal_quantile(double p);

double sigmoid(double t);

/// Header `x1,x2,z,a,y`; 17 significant digits.
void write_iv_csv(const IvDataset& data, const std::string& path);
/// Header `x1,x2,e,v,a,y,a_prime`; 17 significant digits.
void write_nc_csv(const NcDataset& data, const std::string& path);

}  // namespace qpl
