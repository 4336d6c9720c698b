#pragma once

// One-hidden-layer autoencoders f(x) = A B x (linear) and f(x) = A relu(B x)
// (two-point ReLU setting): closed-form gradient-flow limits from spectral
// initializations, and plain full-batch gradient descent trainers used as
// brute-force oracles for those limits.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsa/numkit.hpp"

namespace lsa {

/// Directions whose data singular value is at most this fraction of the
/// largest one carry no loss and are left at their initialization.
inline constexpr double kActiveThreshold = 1e-10;

/// A0 = U diag(sigma_a0) U^T, B0 = U diag(sigma_b0) U^T with U the left
/// singular vectors of the training data.
struct SpectralInit {
  DenseMatrix u_x;
  std::vector<double> sigma_a0;
  std::vector<double> sigma_b0;
  /// Singular values of the training data aligned with the columns of u_x,
  /// zero padded to d. Decides which directions are active.
  std::vector<double> data_sigma;
  /// Provenance, filled in by asymmetric_poly_init.
  std::size_t degree = 0;
  bool plus_identity = false;

  std::size_t dim() const noexcept { return u_x.rows(); }
  DenseMatrix a0() const;
  DenseMatrix b0() const;
  /// Throws ContractError if shapes disagree, u_x is not orthonormal within
  /// 1e-9, or any diagonal entry is negative.
  void validate() const;
};

/// Builds and validates a SpectralInit; an empty `data_sigma` marks every
/// direction active.
SpectralInit make_spectral_init(DenseMatrix u_x, std::vector<double> sigma_a0, std::vector<double> sigma_b0,
                                std::vector<double> data_sigma = {});

struct LinearAutoencoder {
  DenseMatrix a;  // decoder, d x h
  DenseMatrix b;  // encoder, h x d

  std::size_t input_dim() const noexcept { return b.cols(); }
  std::size_t hidden_dim() const noexcept { return b.rows(); }
  void validate() const;
};

struct GradientFlowSolution {
  LinearAutoencoder model;
  std::vector<double> sigma_a;
  std::vector<double> sigma_b;
  std::vector<bool> active;

  std::size_t active_count() const;
};

/// Limit of sigma_b under gradient flow for one active direction:
/// sqrt(delta/2 + sqrt(1 + delta^2/4)), delta = sigma_b0^2 - sigma_a0^2.
/// The matching decoder value is its reciprocal.
double flow_limit_sigma_b(double sigma_a0, double sigma_b0);

/// Closed-form limit of gradient flow from a spectral initialization.
/// Inactive directions keep their initial values. Throws ContractError when
/// an active direction starts at the saddle sigma_a0 = sigma_b0 = 0.
GradientFlowSolution gradient_flow_solution(const SpectralInit& init, double active_threshold = kActiveThreshold);

/// A0 = 0 and B0 = ((1/n) X X^T + [plus_identity] I)^k written in spectral
/// form. `normalizer` is the n above and defaults to the column count of x;
/// mixtures pass the per-component sample count instead.
SpectralInit asymmetric_poly_init(const DenseMatrix& x, std::size_t k, bool plus_identity,
                                  std::optional<std::size_t> normalizer = std::nullopt);

struct GrowthReport {
  bool checked = false;
  bool holds = false;
  std::vector<double> sigma_b0;    // singular values of B0, nonincreasing
  std::vector<double> sigma_binf;  // singular values of B_inf, nonincreasing
  std::vector<std::size_t> violations;
  std::string note;
};

/// Verifies sigma_i(B_inf) >= sigma_i(B0) >= 1 using the SVD of both
/// matrices. Skipped (checked = false) unless the init was built with
/// plus_identity and a zero decoder.
GrowthReport singular_growth_check(const SpectralInit& init, const LinearAutoencoder& solution);

DenseMatrix encode(const LinearAutoencoder& ae, const DenseMatrix& x);
DenseMatrix decode(const LinearAutoencoder& ae, const DenseMatrix& z);

struct TrainOptions {
  double step = 1e-4;
  std::size_t max_steps = 5'000'000;
  double grad_tol = 1e-9;
  /// Loss is appended to loss_history every this many steps (and at the end).
  std::size_t record_every = 1000;
  /// Loss above this multiple of the initial loss counts as divergence.
  double divergence_factor = 10.0;
};

struct TrainTrace {
  std::size_t steps = 0;
  bool converged = false;
  double final_grad_norm = 0.0;
  std::vector<double> loss_history;
  /// Max over recorded steps of the drift of the conserved balancedness
  /// quantity (A^T A - B B^T for the linear net, a_i^2 - b_i^2 for ReLU).
  double conserved_drift = 0.0;
  /// Largest weight magnitude seen along the trajectory.
  double max_weight = 0.0;
  DenseMatrix a;
  DenseMatrix b;
};

struct LinearTrainTrace : TrainTrace {
  /// Only filled when a spectral basis is tracked.
  /// max_t of || offdiag(U^T W(t) U) ||_F / ||W(t)||_F over W in {A, B}.
  double offdiag_leakage = 0.0;
  /// max_t, i of |delta_i(t) - delta_i(0)| / max(1, |delta_i(0)|) with
  /// delta_i = (U^T B U)_ii^2 - (U^T A U)_ii^2.
  double balancedness_drift = 0.0;
};

/// Full-batch gradient descent on sum_i ||x_i - A B x_i||^2. Stops when the
/// Frobenius norm of the full gradient drops below grad_tol or after
/// max_steps. `track_basis` (d x d orthonormal) turns on the spectral
/// invariant measurements. Throws ConvergenceError on divergence.
LinearTrainTrace train_linear(const DenseMatrix& x, const DenseMatrix& a0, const DenseMatrix& b0,
                              const TrainOptions& options = {},
                              const std::optional<DenseMatrix>& track_basis = std::nullopt);

// ---------------------------------------------------------------------------
// Two-point ReLU autoencoder, training set {x, -x}, hidden width 2d.

/// [x x^T; -x x^T], the 2d x d encoder block.
DenseMatrix relu_block_init(std::span<const double> x);

struct ReluSolution {
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;   // ||x||^2
  DenseMatrix a_inf;  // alpha * block^T, d x 2d
  DenseMatrix b_inf;  // beta * block, 2d x d
  double stretch_sq = 0.0;  // ||B_inf x||^2
};

/// Gradient-flow limit from A0 = 0, B0 = block:
/// beta^2 = (sqrt(eta^4 + 4) / eta^2 + 1) / 2, alpha * beta = 1 / eta^2.
ReluSolution relu_closed_form(std::span<const double> x);

struct ReluTrainResult {
  TrainTrace trace;
  double eta = 0.0;
  double alpha = 0.0;  // A = alpha * x w^T at the end of training
  double beta = 0.0;   // B = beta * w x^T
  double alpha_beta = 0.0;
  /// a^T relu(b) at the end; 1/eta at equilibrium.
  double output_gain = 0.0;
};

/// Gradient descent on ||x - A relu(B x)||^2 + ||-x - A relu(-B x)||^2 from
/// A0 = alpha0 * x w^T, B0 = beta0 * w x^T, w = [x; -x].
ReluTrainResult train_relu_two_point(std::span<const double> x, double alpha0, double beta0,
                                     const TrainOptions& options = {});

// ---------------------------------------------------------------------------
// Leaky-ReLU comparison model. No closed form is claimed for it.

struct LeakyReluAutoencoder {
  DenseMatrix a;  // d x h
  DenseMatrix b;  // h x d
  double slope = 0.01;

  /// Pre-activation latent embedding B x.
  DenseMatrix encode(const DenseMatrix& x) const;
  DenseMatrix reconstruct(const DenseMatrix& x) const;
};

struct LeakyReluOptions {
  std::size_t hidden = 400;
  double slope = 0.01;
  double step = 0.1;
  double momentum = 0.9;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
};

struct LeakyReluTrace {
  LeakyReluAutoencoder model;
  /// Mean squared reconstruction error per column, one entry per epoch plus
  /// the initial value.
  std::vector<double> loss_history;
};

/// Full-batch heavy-ball descent on (1/n) sum_i ||x_i - A leaky(B x_i)||^2
/// with uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
LeakyReluTrace train_leaky_relu(const DenseMatrix& x, const LeakyReluOptions& options);

}  // namespace lsa
