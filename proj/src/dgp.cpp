#include "qpl/dgp.hpp"

#include <cmath>
#include <fstream>

#include <boost/math/distributions/normal.hpp>

#include "qpl/error.hpp"
#include "qpl/format.hpp"
#include "qpl/rng.hpp"

namespace qpl {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha must lie in (0,1), got " + fmt17(alpha));
}

Eigen::Matrix3d equicorrelation_factor(double rho) {
  Eigen::Matrix3d c;
  c << 1.0, rho, rho, rho, 1.0, rho, rho, rho, 1.0;
  Eigen::LLT<Eigen::Matrix3d> llt(c);
  if (llt.info() != Eigen::Success)
    throw ConfigError("correlation " + fmt17(rho) + " does not give a positive definite covariance");
  return llt.matrixL();
}

}  // namespace

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

void DgpConfig::validate() const {
  check_alpha(alpha);
  if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("rho must lie in (-1,1), got " + fmt17(rho));
  if (!(p_structured >= 0.0 && p_structured <= 1.0))
    throw ConfigError("p_structured must lie in [0,1], got " + fmt17(p_structured));
  if (!std::isfinite(b_plus) || !std::isfinite(b_minus) || !beta_true.allFinite())
    throw ConfigError("treatment biases and beta_true must be finite");
  equicorrelation_factor(rho);
}

IvDataset generate_iv_dataset(const DgpConfig& config) {
  config.validate();
  const Eigen::Matrix3d factor = equicorrelation_factor(config.rho);
  const double eps_mean = -normal_quantile(config.alpha);
  const auto n_structured = static_cast<std::size_t>(std::floor(config.p_structured * static_cast<double>(config.n)));

  Rng rng = make_rng(config.seed, Stream::Data);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  IvDataset out;
  out.alpha = config.alpha;
  out.meta = config;
  out.setting = Setting::TwoD;
  out.samples.reserve(config.n);
  out.eps.reserve(config.n);

  const Eigen::Vector4d& b = config.beta_true;
  for (std::size_t i = 0; i < config.n; ++i) {
    // Fixed draw order per sample, whether or not each draw is used.
    Eigen::Vector3d g;
    g << normal(rng), normal(rng), normal(rng);
    const Eigen::Vector3d xz = factor * g;
    const double eps = eps_mean + normal(rng);
    const double noise_score = normal(rng);
    const double u = unif(rng);

    IvSample s;
    s.x1 = xz(0);
    s.x2 = xz(1);
    s.z = xz(2);
    double score = noise_score;
    if (i < n_structured) {
      score = s.x1 + 0.5 * s.x2 * s.x2 + s.z + (s.x1 >= 0.0 ? config.b_plus : config.b_minus) + eps;
    }
    s.a = u < sigmoid(score) ? 1 : 0;
    s.y = b(0) * s.x1 + b(1) * s.x2 + s.a * (b(2) * s.x1 + b(3) * s.x2) + eps;
    out.samples.push_back(s);
    out.eps.push_back(eps);
  }
  return out;
}

IvDataset generate_appendix_dataset(std::size_t n, double alpha, double p_noise, double gamma,
                                    std::uint64_t seed) {
  check_alpha(alpha);
  if (!(p_noise >= 0.0 && p_noise <= 1.0)) throw ConfigError("p_noise must lie in [0,1]");
  if (!std::isfinite(gamma)) throw ConfigError("gamma must be finite");

  DgpConfig meta;
  meta.n = n;
  meta.alpha = alpha;
  meta.rho = 0.0;
  meta.p_structured = 1.0 - p_noise;
  meta.b_plus = gamma;
  meta.b_minus = 0.0;
  meta.beta_true = Eigen::Vector4d(1.0, 0.0, 3.0, 0.0);
  meta.seed = seed;

  const double eps_mean = -normal_quantile(alpha);
  const auto n_noise = static_cast<std::size_t>(std::floor(p_noise * static_cast<double>(n)));
  const std::size_t n_structured = n - n_noise;

  Rng rng = make_rng(seed, Stream::Data);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  IvDataset out;
  out.alpha = alpha;
  out.meta = meta;
  out.setting = Setting::OneD;
  out.samples.reserve(n);
  out.eps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = normal(rng);
    const double z = normal(rng);
    const double eps = eps_mean + normal(rng);
    const double noise_score = normal(rng);
    const double u = unif(rng);

    IvSample s;
    s.x1 = x;
    s.x2 = 0.0;
    s.z = z;
    const double t = i < n_structured ? x + z + eps + (x > 0.0 ? gamma : 0.0) : noise_score;
    s.a = u < sigmoid(t) ? 1 : 0;
    s.y = x + 3.0 * x * s.a + eps;
    out.samples.push_back(s);
    out.eps.push_back(eps);
  }
  return out;
}

void NcDgpConfig::validate() const {
  check_alpha(alpha);
  if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("rho must lie in (-1,1)");
  if (!(e_noise >= 0.0 && v_noise >= 0.0 && eps_noise >= 0.0))
    throw ConfigError("noise scales must be nonnegative");
  if (kappa == 0.0 && eps_noise == 0.0) throw ConfigError("eps would be degenerate (kappa = eps_noise = 0)");
  if (!std::isfinite(kappa) || !std::isfinite(u_action) || !beta_true.allFinite())
    throw ConfigError("NC parameters must be finite");
}

double nc_epsilon_shift(const NcDgpConfig& config) {
  // kappa*U + nu is centered Gaussian with variance kappa^2 + eps_noise^2.
  const double sd = std::hypot(config.kappa, config.eps_noise);
  return -normal_quantile(config.alpha) * sd;
}

NcDataset generate_nc_dataset(const NcDgpConfig& config) {
  config.validate();
  const double shift = nc_epsilon_shift(config);
  const double rho_c = std::sqrt(1.0 - config.rho * config.rho);

  Rng rng = make_rng(config.seed, Stream::Data);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  NcDataset out;
  out.alpha = config.alpha;
  out.meta = config;
  out.samples.reserve(config.n);
  out.eps.reserve(config.n);
  const Eigen::Vector4d& b = config.beta_true;
  for (std::size_t i = 0; i < config.n; ++i) {
    const double u_latent = normal(rng);
    const double g1 = normal(rng);
    const double g2 = normal(rng);
    const double nu = config.eps_noise * normal(rng);
    const double e_err = normal(rng);
    const double v_err = normal(rng);
    const double s_err = normal(rng);
    const double u = unif(rng);
    const bool a_prime = coin(rng);

    NcSample s;
    s.x1 = g1;
    s.x2 = config.rho * g1 + rho_c * g2;
    const double eps = config.kappa * u_latent + nu + shift;
    s.e = u_latent + config.e_noise * e_err;
    s.v = u_latent + config.v_noise * v_err;
    const double score = s.x1 + 0.5 * s.x2 + config.u_action * u_latent + s_err;
    s.a = u < sigmoid(score) ? 1 : 0;
    s.y = b(0) * s.x1 + b(1) * s.x2 + s.a * (b(2) * s.x1 + b(3) * s.x2) + eps;
    s.a_prime = a_prime ? 1 : 0;
    out.samples.push_back(s);
    out.eps.push_back(eps);
  }
  return out;
}

double structural_quantile(int a, const Eigen::Vector2d& x, const Eigen::Vector4d& beta) {
  return beta(0) * x(0) + beta(1) * x(1) + a * (beta(2) * x(0) + beta(3) * x(1));
}

int oracle_policy(const Eigen::Vector2d& x) { return 3.0 * x(0) + 2.0 * x(1) > 0.0 ? 1 : 0; }

void write_iv_csv(const IvDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "x1,x2,z,a,y\n";
  for (const auto& s : data.samples) {
    out << fmt17(s.x1) << ',' << fmt17(s.x2) << ',' << fmt17(s.z) << ',' << s.a << ',' << fmt17(s.y) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

void write_nc_csv(const NcDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "x1,x2,e,v,a,y,a_prime\n";
  for (const auto& s : data.samples) {
    out << fmt17(s.x1) << ',' << fmt17(s.x2) << ',' << fmt17(s.e) << ',' << fmt17(s.v) << ',' << s.a << ','
        << fmt17(s.y) << ',' << s.a_prime << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace qpl
