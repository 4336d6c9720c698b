#pragma once

// Subcommands of the `lsa` tool as plain functions so that tests can drive
// them without spawning processes. Each writes data to `out`, diagnostics to
// `err`, and returns the process exit code.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lsa/autoencoder.hpp"

namespace lsa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCheckFailed = 3;

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out;  // empty: stdout

  // gmm-demo
  std::vector<double> c_values{1.0, 2.0, 4.0};
  std::size_t k_min = 1;
  std::size_t k_max = 3;
  std::size_t samples = 100'000;  // per component
  double tolerance = 0.01;

  // fit
  std::filesystem::path input;
  std::string input_format = "vectors";  // or "matrix": one sample per line
  std::size_t limit = 0;
  std::size_t k = 1;
  bool plus_identity = false;
  std::filesystem::path model;  // fit: output; eval/signatures/mds: encoder

  // verify
  std::size_t linear_runs = 5;
  std::size_t linear_dim = 4;
  std::size_t linear_samples = 32;
  double data_scale = 0.3;
  double step = 1e-4;
  double grad_tol = 1e-9;
  std::vector<double> etas{0.5, 1.0, 2.0};
  std::size_t relu_dim = 5;
  double relu_step = 2e-6;
  double verify_tol = 1e-3;
  double balance_tol = 1e-5;   // linear, relative
  double leakage_tol = 1e-6;   // linear, relative
  double drift_tol = 1e-6;     // ReLU conservation, scaled

  // eval
  std::filesystem::path analogy;
  std::filesystem::path similarity;
  bool accuracy = true;

  // mds
  std::vector<std::string> words;
  std::size_t mds_dim = 2;
};

int cmd_gmm_demo(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_signatures(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_mds(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// One random spectral initialization on random data, solved in closed form
/// and by gradient descent.
struct LinearOracleCase {
  double rel_deviation = 0.0;   // max over A, B of ||W_gd - W_inf||_F / ||W_inf||_F
  double product_error = 0.0;   // max_i |sigma_a_inf,i * sigma_b_inf,i - 1| over active i
  double balancedness_drift = 0.0;
  double offdiag_leakage = 0.0;
  std::size_t steps = 0;
  bool converged = false;
};

/// X has i.i.d. N(0, data_scale^2 / samples) entries, so its squared singular
/// values sit near data_scale^2.
LinearOracleCase linear_oracle_case(std::uint64_t seed, std::size_t dim, std::size_t samples, double data_scale,
                                    const TrainOptions& options);

struct ReluOracleCase {
  double eta = 0.0;
  double beta_sq = 0.0;          // trained
  double beta_sq_closed = 0.0;   // closed form
  double alpha_beta = 0.0;       // trained
  double conservation_drift = 0.0;  // relative to max(1, |a_i^2 - b_i^2| at t = 0)
  std::size_t steps = 0;
  bool converged = false;
};

/// x is a random direction in R^dim scaled to ||x||^2 = eta.
ReluOracleCase relu_oracle_case(double eta, std::size_t dim, std::uint64_t seed, const TrainOptions& options);

}  // namespace lsa::cli
