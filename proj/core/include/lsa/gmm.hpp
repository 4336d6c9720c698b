#pragma once

// Gaussian mixtures: sampling, the limiting second moment (1/n) X X^T, the
// closed-form alignment of the two-Gaussian major axes before and after
// stretching, and Monte-Carlo estimates of the same quantities.
//
// NOTE: second moments are normalized by the per-component sample count n,
// not by the total m * n columns. This matches the stretching results the
// closed forms are derived from; (1/n) X X^T of an m-component mixture is m
// times the usual sample second moment.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lsa/numkit.hpp"

namespace lsa {

struct GaussianComponent {
  std::vector<double> mean;
  DenseMatrix covariance;
};

struct GaussianMixtureSpec {
  std::vector<GaussianComponent> components;
  std::size_t samples_per_component = 0;

  std::size_t dim() const;
  /// Equal dimensions, symmetric PSD covariances (within 1e-9), at least one
  /// component. Throws ContractError naming the offending component.
  void validate() const;
};

/// Two Gaussians in R^2 with means e1, e2 and covariances
/// diag(c+1, 1) + J and diag(1, c+1) + J (J the all-ones matrix).
struct Corollary2Setting {
  double c = 1.0;
  std::size_t k = 1;

  GaussianMixtureSpec to_spec(std::size_t samples_per_component) const;
};

/// d x (m * n) matrix, columns grouped by component. Deterministic for a
/// fixed seed within one build (std::mt19937_64 + std::normal_distribution).
DenseMatrix sample_mixture(const GaussianMixtureSpec& spec, std::uint64_t seed);

/// sum_j (Sigma_j + mu_j mu_j^T): the almost-sure limit of (1/n) X X^T.
DenseMatrix expected_second_moment(const GaussianMixtureSpec& spec);

struct CosinePair {
  double before = 0.0;
  double after = 0.0;
};

/// Major-axis cosine for the two-Gaussian setting with stretch factors
/// alpha (along [1,1]) and beta (along [1,-1]):
///   before = 2 / sqrt(4 + c^2)
///   after  = (2 + g sqrt(c^2 + 4)) / (2 g + sqrt(c^2 + 4)),
///   g = (alpha^2 - beta^2) / (alpha^2 + beta^2).
/// Requires c > 0 and alpha^2 > beta^2 > 0.
CosinePair corollary2_cosines(double c, double alpha, double beta);

/// After-cosine for B = ((1/n) X X^T)^k: alpha = (c+7)^k, beta = (c+3)^k.
double corollary3_after(double c, std::size_t k);

/// After-cosine for the encoder of a linear autoencoder trained by gradient
/// flow from A0 = 0, B0 = ((1/n) X X^T)^k. Requires k <= 64.
double corollary5_after(double c, std::size_t k);

/// Analytic top eigenvectors of the two component covariances.
std::pair<std::vector<double>, std::vector<double>> corollary2_major_axes(double c);

/// Unit top eigenvector of the sample covariance (columns centered by their
/// mean), sign convention applied. Needs >= 2 columns and nonzero spread.
std::vector<double> empirical_major_axis(const DenseMatrix& data);

/// Which stretching map a Monte-Carlo run applies.
enum class StretchKind {
  kPowerOfMoment,   // B = ((1/n) X X^T)^k
  kTrainedEncoder,  // B = gradient-flow encoder from A0 = 0, B0 = ((1/n) X X^T)^k
};

struct MonteCarloResult {
  double before = 0.0;  // cos of the two empirical major axes
  double after = 0.0;   // cos of B applied to them
  DenseMatrix stretch;  // the B that was used
};

/// Samples the two-Gaussian setting with n points per component and measures
/// the empirical major-axis cosine before and after stretching.
MonteCarloResult monte_carlo_alignment(const Corollary2Setting& setting, std::size_t samples_per_component,
                                       std::uint64_t seed, StretchKind kind);

}  // namespace lsa
