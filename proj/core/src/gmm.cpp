#include "lsa/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lsa/autoencoder.hpp"
#include "lsa/errors.hpp"

namespace lsa {
namespace {

constexpr double kPsdTolerance = 1e-9;

// Symmetric square root factor L (L L^T = cov) with tiny negative eigenvalues clamped.
DenseMatrix covariance_factor(const DenseMatrix& cov, std::size_t component) {
  const SymEig eig = sym_eig(cov);
  const double scale = std::max(1.0, std::abs(eig.values.front()));
  DenseMatrix factor = eig.vectors;
  for (std::size_t k = 0; k < eig.values.size(); ++k) {
    double lambda = eig.values[k];
    if (lambda < -kPsdTolerance * scale) {
      throw ContractError("gaussian mixture: covariance of component " + std::to_string(component) +
                          " is not positive semi-definite (eigenvalue " + std::to_string(lambda) + ")");
    }
    lambda = std::max(lambda, 0.0);
    const double root = std::sqrt(lambda);
    for (double& v : factor.col(k)) v *= root;
  }
  return factor;
}

double after_from_ratio(double c, double ratio) {
  const double g = (1.0 - ratio) / (1.0 + ratio);
  const double root = std::sqrt(c * c + 4.0);
  return (2.0 + g * root) / (2.0 * g + root);
}

void require_positive_c(double c, const char* who) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ContractError(std::string(who) + ": c must be positive");
}

// alpha^2 of the gradient-flow encoder for an initial eigenvalue lambda^k.
double trained_sq(double c_plus, std::size_t k) {
  const double x = std::pow(c_plus, 2.0 * static_cast<double>(k));
  if (!std::isfinite(x)) throw ContractError("corollary5_after: (c+7)^(2k) overflows");
  return 0.5 * x + std::hypot(1.0, 0.5 * x);
}

}  // namespace

std::size_t GaussianMixtureSpec::dim() const {
  return components.empty() ? 0 : components.front().mean.size();
}

void GaussianMixtureSpec::validate() const {
  if (components.empty()) throw ContractError("gaussian mixture: no components");
  const std::size_t d = dim();
  if (d == 0) throw ContractError("gaussian mixture: zero-dimensional means");
  for (std::size_t j = 0; j < components.size(); ++j) {
    const auto& comp = components[j];
    if (comp.mean.size() != d || comp.covariance.rows() != d || comp.covariance.cols() != d) {
      throw ContractError("gaussian mixture: component " + std::to_string(j) + " has inconsistent dimension");
    }
    if (!is_symmetric(comp.covariance, kPsdTolerance * std::max(1.0, max_abs(comp.covariance)))) {
      throw ContractError("gaussian mixture: covariance of component " + std::to_string(j) + " is not symmetric");
    }
    covariance_factor(comp.covariance, j);
  }
}

GaussianMixtureSpec Corollary2Setting::to_spec(std::size_t samples_per_component) const {
  require_positive_c(c, "Corollary2Setting");
  GaussianMixtureSpec spec;
  spec.samples_per_component = samples_per_component;
  spec.components.push_back({{1.0, 0.0}, DenseMatrix::from_rows({{c + 2.0, 1.0}, {1.0, 2.0}})});
  spec.components.push_back({{0.0, 1.0}, DenseMatrix::from_rows({{2.0, 1.0}, {1.0, c + 2.0}})});
  return spec;
}

DenseMatrix sample_mixture(const GaussianMixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t d = spec.dim();
  const std::size_t n = spec.samples_per_component;
  DenseMatrix out(d, spec.components.size() * n);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(d);
  for (std::size_t j = 0; j < spec.components.size(); ++j) {
    const auto& comp = spec.components[j];
    const DenseMatrix factor = covariance_factor(comp.covariance, j);
    for (std::size_t i = 0; i < n; ++i) {
      for (double& v : z) v = normal(rng);
      auto col = out.col(j * n + i);
      for (std::size_t r = 0; r < d; ++r) {
        double s = comp.mean[r];
        for (std::size_t k = 0; k < d; ++k) s += factor(r, k) * z[k];
        col[r] = s;
      }
    }
  }
  return out;
}

DenseMatrix expected_second_moment(const GaussianMixtureSpec& spec) {
  spec.validate();
  const std::size_t d = spec.dim();
  DenseMatrix out(d, d);
  for (const auto& comp : spec.components) {
    out += comp.covariance;
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < d; ++i) out(i, j) += comp.mean[i] * comp.mean[j];
  }
  return out;
}

CosinePair corollary2_cosines(double c, double alpha, double beta) {
  require_positive_c(c, "corollary2_cosines");
  const double a2 = alpha * alpha;
  const double b2 = beta * beta;
  if (!(b2 > 0.0) || !(a2 > b2)) {
    throw ContractError("corollary2_cosines: requires alpha^2 > beta^2 > 0");
  }
  return {2.0 / std::sqrt(4.0 + c * c), after_from_ratio(c, b2 / a2)};
}

double corollary3_after(double c, std::size_t k) {
  require_positive_c(c, "corollary3_after");
  if (k == 0) throw ContractError("corollary3_after: k must be >= 1");
  const double ratio = std::pow((c + 3.0) / (c + 7.0), 2.0 * static_cast<double>(k));
  return after_from_ratio(c, ratio);
}

double corollary5_after(double c, std::size_t k) {
  require_positive_c(c, "corollary5_after");
  if (k == 0 || k > 64) throw ContractError("corollary5_after: k must be in [1, 64]");
  const double alpha_sq = trained_sq(c + 7.0, k);
  const double beta_sq = trained_sq(c + 3.0, k);
  return after_from_ratio(c, beta_sq / alpha_sq);
}

std::pair<std::vector<double>, std::vector<double>> corollary2_major_axes(double c) {
  const auto spec = Corollary2Setting{c, 1}.to_spec(0);
  const SymEig e1 = sym_eig(spec.components[0].covariance);
  const SymEig e2 = sym_eig(spec.components[1].covariance);
  return {{e1.vectors(0, 0), e1.vectors(1, 0)}, {e2.vectors(0, 0), e2.vectors(1, 0)}};
}

std::vector<double> empirical_major_axis(const DenseMatrix& data) {
  if (data.cols() < 2) throw ContractError("empirical_major_axis: need at least 2 columns");
  const std::size_t d = data.rows();
  std::vector<double> mean(d, 0.0);
  for (std::size_t c = 0; c < data.cols(); ++c)
    for (std::size_t r = 0; r < d; ++r) mean[r] += data(r, c);
  for (double& m : mean) m /= static_cast<double>(data.cols());

  DenseMatrix centered = data;
  for (std::size_t c = 0; c < data.cols(); ++c)
    for (std::size_t r = 0; r < d; ++r) centered(r, c) -= mean[r];
  DenseMatrix cov = gram_rows(centered);
  cov *= 1.0 / static_cast<double>(data.cols() - 1);
  if (max_abs(cov) == 0.0) throw ContractError("empirical_major_axis: zero sample covariance");

  const SymEig eig = sym_eig(cov);
  std::vector<double> axis(eig.vectors.col(0).begin(), eig.vectors.col(0).end());
  apply_sign_convention(axis);
  return axis;
}

MonteCarloResult monte_carlo_alignment(const Corollary2Setting& setting, std::size_t samples_per_component,
                                       std::uint64_t seed, StretchKind kind) {
  if (setting.k == 0) throw ContractError("monte_carlo_alignment: k must be >= 1");
  if (samples_per_component < 2) throw ContractError("monte_carlo_alignment: need at least 2 samples");
  const auto spec = setting.to_spec(samples_per_component);
  const DenseMatrix x = sample_mixture(spec, seed);
  const std::size_t n = samples_per_component;

  MonteCarloResult out;
  if (kind == StretchKind::kPowerOfMoment) {
    DenseMatrix moment = gram_rows(x);
    moment *= 1.0 / static_cast<double>(n);
    std::vector<double> coeffs(setting.k + 1, 0.0);
    coeffs.back() = 1.0;
    out.stretch = matrix_polynomial(moment, coeffs);
  } else {
    const SpectralInit init = asymmetric_poly_init(x, setting.k, false, n);
    out.stretch = gradient_flow_solution(init).model.b;
  }

  const auto q1 = empirical_major_axis(x.col_block(0, n));
  const auto q2 = empirical_major_axis(x.col_block(n, n));
  out.before = cosine(q1, q2);
  out.after = cosine(out.stretch * std::span<const double>(q1), out.stretch * std::span<const double>(q2));
  return out;
}

}  // namespace lsa
