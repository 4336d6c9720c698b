#include "lsa/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lsa/errors.hpp"
#include "lsa/format.hpp"

namespace lsa {
namespace {

// a * b^T
DenseMatrix times_transpose(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw ContractError("times_transpose: column mismatch");
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t k = 0; k < a.cols(); ++k) {
    auto ac = a.col(k);
    auto bc = b.col(k);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double bjk = bc[j];
      if (bjk == 0.0) continue;
      auto oc = out.col(j);
      for (std::size_t i = 0; i < a.rows(); ++i) oc[i] += ac[i] * bjk;
    }
  }
  return out;
}

DenseMatrix spectral_matrix(const DenseMatrix& u, std::span<const double> diag) {
  DenseMatrix scaled = u;
  for (std::size_t k = 0; k < diag.size(); ++k)
    for (double& v : scaled.col(k)) v *= diag[k];
  return times_transpose(scaled, u);
}

double offdiag_norm(const DenseMatrix& m) {
  double acc = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (i != j) acc += m(i, j) * m(i, j);
  return std::sqrt(acc);
}

void require_orthonormal(const DenseMatrix& u, const char* what) {
  const DenseMatrix gram = transpose_times(u, u);
  if (max_abs_difference(gram, DenseMatrix::identity(u.cols())) > 1e-9) {
    throw ContractError(std::string(what) + ": basis is not orthonormal within 1e-9");
  }
}

[[noreturn]] void diverged(const char* who, std::size_t step, double loss, double initial) {
  std::ostringstream msg;
  msg << who << ": diverged at step " << step << " (loss " << format_number(loss) << " vs initial "
      << format_number(initial) << "); try a smaller step size";
  throw ConvergenceError(msg.str(), loss);
}

}  // namespace

// ---------------------------------------------------------------------------
// Spectral initialization

DenseMatrix SpectralInit::a0() const { return spectral_matrix(u_x, sigma_a0); }
DenseMatrix SpectralInit::b0() const { return spectral_matrix(u_x, sigma_b0); }

void SpectralInit::validate() const {
  const std::size_t d = u_x.rows();
  if (d == 0 || !u_x.is_square()) throw ContractError("SpectralInit: u_x must be a nonempty square matrix");
  if (sigma_a0.size() != d || sigma_b0.size() != d || data_sigma.size() != d) {
    throw ContractError("SpectralInit: diagonal lengths must equal " + std::to_string(d));
  }
  require_orthonormal(u_x, "SpectralInit");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(sigma_a0[i] >= 0.0) || !(sigma_b0[i] >= 0.0) || !(data_sigma[i] >= 0.0) || !std::isfinite(sigma_a0[i]) ||
        !std::isfinite(sigma_b0[i]) || !std::isfinite(data_sigma[i])) {
      throw ContractError("SpectralInit: entry " + std::to_string(i) + " is negative or non-finite");
    }
  }
}

SpectralInit make_spectral_init(DenseMatrix u_x, std::vector<double> sigma_a0, std::vector<double> sigma_b0,
                                std::vector<double> data_sigma) {
  if (data_sigma.empty()) data_sigma.assign(u_x.rows(), 1.0);
  SpectralInit init{std::move(u_x), std::move(sigma_a0), std::move(sigma_b0), std::move(data_sigma)};
  init.validate();
  return init;
}

void LinearAutoencoder::validate() const {
  if (a.rows() != b.cols() || a.cols() != b.rows() || a.empty()) {
    throw ContractError("LinearAutoencoder: decoder/encoder shapes do not compose");
  }
}

std::size_t GradientFlowSolution::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

double flow_limit_sigma_b(double sigma_a0, double sigma_b0) {
  const double delta = sigma_b0 * sigma_b0 - sigma_a0 * sigma_a0;
  if (!std::isfinite(delta)) throw ContractError("flow_limit_sigma_b: initialization overflows");
  const double half = 0.5 * delta;
  // For delta < 0 the direct form cancels; use its reciprocal identity.
  const double sq = delta >= 0.0 ? half + std::hypot(1.0, half) : 1.0 / (-half + std::hypot(1.0, half));
  return std::sqrt(sq);
}

GradientFlowSolution gradient_flow_solution(const SpectralInit& init, double active_threshold) {
  init.validate();
  const std::size_t d = init.dim();
  const double top = *std::max_element(init.data_sigma.begin(), init.data_sigma.end());

  GradientFlowSolution out;
  out.sigma_a.resize(d);
  out.sigma_b.resize(d);
  out.active.assign(d, false);
  for (std::size_t i = 0; i < d; ++i) {
    const bool active = top > 0.0 && init.data_sigma[i] > active_threshold * top;
    out.active[i] = active;
    if (!active) {
      out.sigma_a[i] = init.sigma_a0[i];
      out.sigma_b[i] = init.sigma_b0[i];
      continue;
    }
    if (init.sigma_a0[i] + init.sigma_b0[i] <= 0.0) {
      throw ContractError("gradient_flow_solution: direction " + std::to_string(i) +
                          " starts at the saddle (sigma_a0 = sigma_b0 = 0)");
    }
    out.sigma_b[i] = flow_limit_sigma_b(init.sigma_a0[i], init.sigma_b0[i]);
    out.sigma_a[i] = 1.0 / out.sigma_b[i];
  }
  out.model.a = spectral_matrix(init.u_x, out.sigma_a);
  out.model.b = spectral_matrix(init.u_x, out.sigma_b);
  return out;
}

SpectralInit asymmetric_poly_init(const DenseMatrix& x, std::size_t k, bool plus_identity,
                                  std::optional<std::size_t> normalizer) {
  if (k == 0) throw ContractError("asymmetric_poly_init: degree k must be >= 1");
  if (x.empty()) throw ContractError("asymmetric_poly_init: empty data");
  const std::size_t n = normalizer.value_or(x.cols());
  if (n == 0) throw ContractError("asymmetric_poly_init: normalizer must be positive");

  const std::size_t d = x.rows();
  const SvdFactors f = svd(x);
  const std::size_t r = f.sigma.size();

  SpectralInit init;
  init.u_x = r == d ? f.u : complete_orthonormal_basis(f.u, std::vector<bool>(r, false));
  init.data_sigma.assign(d, 0.0);
  std::copy(f.sigma.begin(), f.sigma.end(), init.data_sigma.begin());
  init.sigma_a0.assign(d, 0.0);
  init.sigma_b0.resize(d);
  const double shift = plus_identity ? 1.0 : 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double base = init.data_sigma[i] * init.data_sigma[i] / static_cast<double>(n) + shift;
    init.sigma_b0[i] = std::pow(base, static_cast<double>(k));
    if (!std::isfinite(init.sigma_b0[i])) {
      throw ContractError("asymmetric_poly_init: degree " + std::to_string(k) + " overflows direction " +
                          std::to_string(i));
    }
  }
  init.degree = k;
  init.plus_identity = plus_identity;
  return init;
}

GrowthReport singular_growth_check(const SpectralInit& init, const LinearAutoencoder& solution) {
  GrowthReport report;
  if (!init.plus_identity) {
    report.note = "skipped: initialization was not built from (1/n)XX^T + I, so sigma_i(B0) >= 1 is not implied";
    return report;
  }
  if (std::any_of(init.sigma_a0.begin(), init.sigma_a0.end(), [](double v) { return v != 0.0; })) {
    report.note = "skipped: decoder initialization is not zero";
    return report;
  }
  report.checked = true;
  report.sigma_b0 = svd(init.b0()).sigma;
  report.sigma_binf = svd(solution.b).sigma;
  const std::size_t n = std::min(report.sigma_b0.size(), report.sigma_binf.size());
  constexpr double rel = 1e-10;
  for (std::size_t i = 0; i < n; ++i) {
    const double s0 = report.sigma_b0[i];
    const double sinf = report.sigma_binf[i];
    if (sinf < s0 * (1.0 - rel) || s0 < 1.0 - rel) report.violations.push_back(i);
  }
  report.holds = report.violations.empty();
  report.note = report.holds ? "sigma_i(B_inf) >= sigma_i(B0) >= 1 for all i"
                             : std::to_string(report.violations.size()) + " violation(s)";
  return report;
}

DenseMatrix encode(const LinearAutoencoder& ae, const DenseMatrix& x) {
  if (ae.b.cols() != x.rows()) {
    throw ContractError("encode: encoder expects dimension " + std::to_string(ae.b.cols()) + ", data has " +
                        std::to_string(x.rows()));
  }
  return ae.b * x;
}

DenseMatrix decode(const LinearAutoencoder& ae, const DenseMatrix& z) {
  if (ae.a.cols() != z.rows()) {
    throw ContractError("decode: decoder expects dimension " + std::to_string(ae.a.cols()) + ", latent has " +
                        std::to_string(z.rows()));
  }
  return ae.a * z;
}

// ---------------------------------------------------------------------------
// Linear trainer

LinearTrainTrace train_linear(const DenseMatrix& x, const DenseMatrix& a0, const DenseMatrix& b0,
                              const TrainOptions& options, const std::optional<DenseMatrix>& track_basis) {
  if (!(options.step > 0.0)) throw ContractError("train_linear: step must be positive");
  const std::size_t d = x.rows();
  if (a0.rows() != d || b0.cols() != d || a0.cols() != b0.rows()) {
    throw ContractError("train_linear: A must be d x h and B h x d for data of dimension " + std::to_string(d));
  }
  if (track_basis && (track_basis->rows() != d || !track_basis->is_square() || a0.cols() != d)) {
    throw ContractError("train_linear: tracked basis requires square d x d weights");
  }
  const std::size_t record_every = std::max<std::size_t>(1, options.record_every);

  const DenseMatrix s = gram_rows(x);
  const DenseMatrix eye = DenseMatrix::identity(d);
  DenseMatrix a = a0;
  DenseMatrix b = b0;
  const DenseMatrix conserved0 = transpose_times(a, a) - times_transpose(b, b);

  std::vector<double> delta0;
  auto spectral = [&](const DenseMatrix& w) { return transpose_times(*track_basis, w * *track_basis); };
  if (track_basis) {
    const DenseMatrix ma = spectral(a);
    const DenseMatrix mb = spectral(b);
    for (std::size_t i = 0; i < d; ++i) delta0.push_back(mb(i, i) * mb(i, i) - ma(i, i) * ma(i, i));
  }

  LinearTrainTrace trace;
  auto measure = [&] {
    trace.conserved_drift =
        std::max(trace.conserved_drift,
                 max_abs_difference(transpose_times(a, a) - times_transpose(b, b), conserved0));
    trace.max_weight = std::max({trace.max_weight, max_abs(a), max_abs(b)});
    if (!track_basis) return;
    const DenseMatrix ma = spectral(a);
    const DenseMatrix mb = spectral(b);
    const double na = frobenius_norm(a);
    const double nb = frobenius_norm(b);
    if (na > 0.0) trace.offdiag_leakage = std::max(trace.offdiag_leakage, offdiag_norm(ma) / na);
    if (nb > 0.0) trace.offdiag_leakage = std::max(trace.offdiag_leakage, offdiag_norm(mb) / nb);
    for (std::size_t i = 0; i < d; ++i) {
      const double delta = mb(i, i) * mb(i, i) - ma(i, i) * ma(i, i);
      trace.balancedness_drift =
          std::max(trace.balancedness_drift, std::abs(delta - delta0[i]) / std::max(1.0, std::abs(delta0[i])));
    }
  };

  double initial_loss = 0.0;
  for (std::size_t step = 0;; ++step) {
    const DenseMatrix e = eye - a * b;
    const DenseMatrix es = e * s;
    double loss = 0.0;
    for (std::size_t i = 0; i < es.size(); ++i) loss += es.data()[i] * e.data()[i];
    if (step == 0) initial_loss = loss;
    if (!std::isfinite(loss) || (initial_loss > 0.0 && loss > options.divergence_factor * initial_loss)) {
      diverged("train_linear", step, loss, initial_loss);
    }

    DenseMatrix grad_a = times_transpose(es, b);
    grad_a *= -2.0;
    DenseMatrix grad_b = transpose_times(a, es);
    grad_b *= -2.0;
    const double gnorm = std::hypot(frobenius_norm(grad_a), frobenius_norm(grad_b));

    const bool done = gnorm < options.grad_tol || step == options.max_steps;
    if (step % record_every == 0 || done) {
      trace.loss_history.push_back(loss);
      measure();
    }
    if (done) {
      trace.steps = step;
      trace.converged = gnorm < options.grad_tol;
      trace.final_grad_norm = gnorm;
      break;
    }
    grad_a *= options.step;
    grad_b *= options.step;
    a -= grad_a;
    b -= grad_b;
  }
  trace.a = std::move(a);
  trace.b = std::move(b);
  return trace;
}

// ---------------------------------------------------------------------------
// Two-point ReLU

DenseMatrix relu_block_init(std::span<const double> x) {
  const std::size_t d = x.size();
  DenseMatrix block(2 * d, d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      block(i, j) = x[i] * x[j];
      block(d + i, j) = -x[i] * x[j];
    }
  }
  return block;
}

ReluSolution relu_closed_form(std::span<const double> x) {
  const double n = norm2(x);
  if (n == 0.0) throw ContractError("relu_closed_form: x must be nonzero");
  ReluSolution sol;
  sol.eta = n * n;
  const double eta2 = sol.eta * sol.eta;
  const double beta_sq = 0.5 * (std::sqrt(eta2 * eta2 + 4.0) / eta2 + 1.0);
  sol.beta = std::sqrt(beta_sq);
  sol.alpha = 1.0 / (eta2 * sol.beta);
  const DenseMatrix block = relu_block_init(x);
  sol.b_inf = sol.beta * block;
  sol.a_inf = sol.alpha * block.transpose();
  const auto bx = sol.b_inf * x;
  sol.stretch_sq = dot(bx, bx);
  return sol;
}

ReluTrainResult train_relu_two_point(std::span<const double> x, double alpha0, double beta0,
                                     const TrainOptions& options) {
  const double xn = norm2(x);
  if (xn == 0.0) throw ContractError("train_relu_two_point: x must be nonzero");
  if (!(options.step > 0.0)) throw ContractError("train_relu_two_point: step must be positive");
  const std::size_t d = x.size();
  const std::size_t h = 2 * d;
  const double eta = xn * xn;
  const std::size_t record_every = std::max<std::size_t>(1, options.record_every);

  std::vector<double> w(h);
  for (std::size_t i = 0; i < d; ++i) {
    w[i] = x[i];
    w[d + i] = -x[i];
  }
  // A = alpha0 x w^T (d x h), B = beta0 w x^T (h x d)
  DenseMatrix a(d, h);
  DenseMatrix b(h, d);
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < d; ++i) a(i, j) = alpha0 * x[i] * w[j];
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < h; ++i) b(i, j) = beta0 * w[i] * x[j];

  // Per-unit coordinates: A = x a^T, B = b x^T, so a = A^T x / eta and b = B x / eta.
  std::vector<double> av(h), bv(h);
  auto coordinates = [&] {
    for (std::size_t j = 0; j < h; ++j) {
      double sa = 0.0;
      for (std::size_t i = 0; i < d; ++i) sa += a(i, j) * x[i];
      av[j] = sa / eta;
    }
    for (std::size_t i = 0; i < h; ++i) {
      double sb = 0.0;
      for (std::size_t j = 0; j < d; ++j) sb += b(i, j) * x[j];
      bv[i] = sb / eta;
    }
  };
  coordinates();
  std::vector<double> conserved0(h);
  for (std::size_t i = 0; i < h; ++i) conserved0[i] = av[i] * av[i] - bv[i] * bv[i];

  ReluTrainResult result;
  TrainTrace& trace = result.trace;
  DenseMatrix grad_a(d, h);
  DenseMatrix grad_b(h, d);
  std::vector<double> pre(h), act(h), resid(d), back(h);

  double initial_loss = 0.0;
  for (std::size_t step = 0;; ++step) {
    coordinates();
    for (std::size_t i = 0; i < h; ++i) {
      trace.conserved_drift =
          std::max(trace.conserved_drift, std::abs(av[i] * av[i] - bv[i] * bv[i] - conserved0[i]));
      trace.max_weight = std::max({trace.max_weight, std::abs(av[i]), std::abs(bv[i])});
    }

    std::fill(grad_a.data().begin(), grad_a.data().end(), 0.0);
    std::fill(grad_b.data().begin(), grad_b.data().end(), 0.0);
    double loss = 0.0;
    for (double sign : {1.0, -1.0}) {
      for (std::size_t i = 0; i < h; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += b(i, j) * sign * x[j];
        pre[i] = s;
        act[i] = s > 0.0 ? s : 0.0;
      }
      for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < h; ++j) s += a(i, j) * act[j];
        resid[i] = s - sign * x[i];
        loss += resid[i] * resid[i];
      }
      for (std::size_t j = 0; j < h; ++j) {
        if (act[j] == 0.0) continue;
        for (std::size_t i = 0; i < d; ++i) grad_a(i, j) += 2.0 * resid[i] * act[j];
      }
      for (std::size_t j = 0; j < h; ++j) {
        double s = 0.0;
        if (pre[j] > 0.0)
          for (std::size_t i = 0; i < d; ++i) s += a(i, j) * resid[i];
        back[j] = 2.0 * s;
      }
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < h; ++i) grad_b(i, j) += back[i] * sign * x[j];
    }
    if (step == 0) initial_loss = loss;
    if (!std::isfinite(loss) || (initial_loss > 0.0 && loss > options.divergence_factor * initial_loss)) {
      diverged("train_relu_two_point", step, loss, initial_loss);
    }

    const double gnorm = std::hypot(frobenius_norm(grad_a), frobenius_norm(grad_b));
    const bool done = gnorm < options.grad_tol || step == options.max_steps;
    if (step % record_every == 0 || done) trace.loss_history.push_back(loss);
    if (done) {
      trace.steps = step;
      trace.converged = gnorm < options.grad_tol;
      trace.final_grad_norm = gnorm;
      break;
    }
    for (std::size_t i = 0; i < grad_a.size(); ++i) a.data()[i] -= options.step * grad_a.data()[i];
    for (std::size_t i = 0; i < grad_b.size(); ++i) b.data()[i] -= options.step * grad_b.data()[i];
  }

  coordinates();
  const double ww = 2.0 * eta;
  result.eta = eta;
  result.alpha = dot(av, w) / ww;
  result.beta = dot(bv, w) / ww;
  result.alpha_beta = result.alpha * result.beta;
  double gain = 0.0;
  for (std::size_t i = 0; i < h; ++i) gain += av[i] * std::max(bv[i], 0.0);
  result.output_gain = gain;
  trace.a = std::move(a);
  trace.b = std::move(b);
  return result;
}

// ---------------------------------------------------------------------------
// Leaky ReLU

DenseMatrix LeakyReluAutoencoder::encode(const DenseMatrix& x) const { return b * x; }

DenseMatrix LeakyReluAutoencoder::reconstruct(const DenseMatrix& x) const {
  DenseMatrix z = b * x;
  for (double& v : z.data())
    if (v < 0.0) v *= slope;
  return a * z;
}

LeakyReluTrace train_leaky_relu(const DenseMatrix& x, const LeakyReluOptions& options) {
  if (x.empty()) throw ContractError("train_leaky_relu: empty data");
  if (options.hidden == 0) throw ContractError("train_leaky_relu: hidden width must be positive");
  if (!(options.step > 0.0) || options.momentum < 0.0 || options.momentum >= 1.0) {
    throw ContractError("train_leaky_relu: need step > 0 and momentum in [0, 1)");
  }
  const std::size_t d = x.rows();
  const std::size_t h = options.hidden;
  const double n = static_cast<double>(x.cols());

  std::mt19937_64 rng(options.seed);
  auto uniform_fill = [&rng](DenseMatrix& m, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : m.data()) v = dist(rng);
  };
  LeakyReluTrace out;
  out.model.slope = options.slope;
  out.model.b = DenseMatrix(h, d);
  out.model.a = DenseMatrix(d, h);
  uniform_fill(out.model.b, 1.0 / std::sqrt(static_cast<double>(d)));
  uniform_fill(out.model.a, 1.0 / std::sqrt(static_cast<double>(h)));

  DenseMatrix vel_a(d, h);
  DenseMatrix vel_b(h, d);
  auto& a = out.model.a;
  auto& b = out.model.b;
  for (std::size_t epoch = 0; epoch <= options.epochs; ++epoch) {
    const DenseMatrix pre = b * x;
    DenseMatrix act = pre;
    for (double& v : act.data())
      if (v < 0.0) v *= options.slope;
    DenseMatrix resid = a * act - x;
    out.loss_history.push_back(frobenius_norm(resid) * frobenius_norm(resid) / n);
    if (!std::isfinite(out.loss_history.back())) {
      diverged("train_leaky_relu", epoch, out.loss_history.back(), out.loss_history.front());
    }
    if (epoch == options.epochs) break;

    DenseMatrix grad_a = times_transpose(resid, act);
    grad_a *= 2.0 / n;
    DenseMatrix back = transpose_times(a, resid);
    for (std::size_t i = 0; i < back.size(); ++i)
      if (pre.data()[i] < 0.0) back.data()[i] *= options.slope;
    DenseMatrix grad_b = times_transpose(back, x);
    grad_b *= 2.0 / n;

    vel_a *= options.momentum;
    vel_a += grad_a;
    vel_b *= options.momentum;
    vel_b += grad_b;
    a -= options.step * vel_a;
    b -= options.step * vel_b;
  }
  return out;
}

}  // namespace lsa
