#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lsa/alignment.hpp"
#include "lsa/embeddings.hpp"
#include "lsa/errors.hpp"
#include "lsa/format.hpp"
#include "lsa/gmm.hpp"
#include "lsa/model_io.hpp"

namespace lsa::cli {
namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs `body` against cfg.out (or `out` when unset) and maps library errors
// to exit codes.
int run(const char* name, const RunConfig& cfg, std::ostream& out, std::ostream& err,
        const std::function<int(std::ostream&)>& body) {
  try {
    if (cfg.out.empty()) return body(out);
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) throw IoError("cannot open " + cfg.out.string() + " for writing");
    const int code = body(file);
    file.flush();
    if (!file) throw IoError("write to " + cfg.out.string() + " failed");
    return code;
  } catch (const UsageError& e) {
    err << name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << name << ": " << e.what() << '\n';
    return kExitError;
  }
}

Json metric(const MetricResult& m) { return Json::parse(metric_json(m)); }

DenseMatrix load_matrix_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t count = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r')) ++p;
      if (p == end) break;
      if (*p == '+') ++p;
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || !std::isfinite(v)) throw FormatError(path.string() + ": not a number", line_no);
      row.push_back(v);
      p = next;
    }
    if (row.empty()) continue;
    if (dim == 0) dim = row.size();
    if (row.size() != dim) {
      throw FormatError(path.string() + ": expected " + std::to_string(dim) + " values, got " +
                            std::to_string(row.size()),
                        line_no);
    }
    values.insert(values.end(), row.begin(), row.end());
    ++count;
  }
  if (count == 0) throw FormatError(path.string() + ": no samples");
  return DenseMatrix(dim, count, std::move(values));
}

std::optional<DenseMatrix> load_encoder(const RunConfig& cfg, std::size_t dim) {
  if (cfg.model.empty()) return std::nullopt;
  LinearAutoencoder ae = load_autoencoder(cfg.model);
  if (ae.input_dim() != dim) {
    throw ContractError("encoder " + cfg.model.string() + " expects dimension " + std::to_string(ae.input_dim()) +
                        ", data has " + std::to_string(dim));
  }
  return std::move(ae.b);
}

std::vector<double> top_descending(std::vector<double> v, std::size_t count) {
  std::sort(v.begin(), v.end(), std::greater<>());
  if (v.size() > count) v.resize(count);
  return v;
}

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void write_summary(std::ostream& out, const char* label, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto above = std::count_if(values.begin(), values.end(), [](double v) { return v > 0.5; });
  const double frac = values.empty() ? std::nan("") : static_cast<double>(above) / static_cast<double>(values.size());
  out << "# " << label << " min=" << format_number(quantile(values, 0.0)) << " q25=" << format_number(quantile(values, 0.25))
      << " median=" << format_number(quantile(values, 0.5)) << " q75=" << format_number(quantile(values, 0.75))
      << " max=" << format_number(quantile(values, 1.0)) << " frac_above_0.5=" << format_number(frac) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_gmm_demo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run("gmm-demo", cfg, out, err, [&](std::ostream& os) {
    if (cfg.c_values.empty()) throw UsageError("no c values");
    if (cfg.k_min == 0 || cfg.k_max < cfg.k_min) throw UsageError("need 1 <= k-min <= k-max");
    if (cfg.samples < 2) throw UsageError("samples must be at least 2");

    os << "c,k,before,after_cor3,after_cor5,after_monte_carlo,abs_gap\n";
    std::vector<std::string> failures;
    std::uint64_t cell = 0;
    for (const double c : cfg.c_values) {
      for (std::size_t k = cfg.k_min; k <= cfg.k_max; ++k, ++cell) {
        const CosinePair closed = corollary2_cosines(c, c + 7.0, c + 3.0);
        const double cor3 = corollary3_after(c, k);
        const double cor5 = k <= 64 ? corollary5_after(c, k) : std::nan("");
        const MonteCarloResult mc =
            monte_carlo_alignment({c, k}, cfg.samples, cfg.seed + cell, StretchKind::kPowerOfMoment);
        const double gap = std::abs(mc.after - cor3);
        std::ostringstream row;
        row << format_number(c) << ',' << k << ',' << format_number(closed.before) << ',' << format_number(cor3) << ','
            << format_number(cor5) << ',' << format_number(mc.after) << ',' << format_number(gap);
        os << row.str() << '\n';
        if (!(gap <= cfg.tolerance)) failures.push_back(row.str());
      }
    }
    if (!failures.empty()) {
      err << "gmm-demo: " << failures.size() << " row(s) exceed tolerance " << format_number(cfg.tolerance) << ":\n";
      for (const auto& f : failures) err << "  " << f << '\n';
      return kExitCheckFailed;
    }
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run("fit", cfg, out, err, [&](std::ostream& os) {
    if (cfg.input.empty()) throw UsageError("--input is required");
    if (cfg.k == 0) throw UsageError("k must be >= 1");
    DenseMatrix x;
    if (cfg.input_format == "vectors") {
      LoadedTable loaded = load_vectors(cfg.input, cfg.limit);
      if (loaded.skipped_lines + loaded.duplicate_words > 0) {
        err << "fit: skipped " << loaded.skipped_lines << " malformed line(s), " << loaded.duplicate_words
            << " duplicate word(s)\n";
      }
      x = loaded.table.vectors();
    } else if (cfg.input_format == "matrix") {
      x = load_matrix_samples(cfg.input);
    } else {
      throw UsageError("input format must be 'vectors' or 'matrix'");
    }

    SpectralInit init;
    GradientFlowSolution solution;
    try {
      init = asymmetric_poly_init(x, cfg.k, cfg.plus_identity);
      solution = gradient_flow_solution(init);
    } catch (const ContractError& e) {
      throw ContractError("fitting " + cfg.input.string() + " (" + std::to_string(x.rows()) + " x " +
                          std::to_string(x.cols()) + ", k=" + std::to_string(cfg.k) + "): " + e.what());
    }
    if (!cfg.model.empty()) save_autoencoder(cfg.model, solution.model);

    Json report;
    report["k"] = cfg.k;
    report["plus_identity"] = cfg.plus_identity;
    report["dim"] = x.rows();
    report["samples"] = x.cols();
    report["active_directions"] = solution.active_count();
    report["sigma_b_inf"] = top_descending(solution.sigma_b, 10);
    report["sigma_a_inf"] = top_descending(solution.sigma_a, 10);
    if (cfg.plus_identity) {
      const GrowthReport growth = singular_growth_check(init, solution.model);
      report["growth_check"] = {{"checked", growth.checked}, {"holds", growth.holds}, {"violations", growth.violations}};
      if (!growth.note.empty()) report["growth_check"]["note"] = growth.note;
    }
    if (!cfg.model.empty()) report["model"] = cfg.model.string();
    os << report.dump(2) << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

LinearOracleCase linear_oracle_case(std::uint64_t seed, std::size_t dim, std::size_t samples, double data_scale,
                                    const TrainOptions& options) {
  if (dim == 0 || samples < dim) throw ContractError("linear_oracle_case: need samples >= dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> init_dist(0.2, 1.5);

  DenseMatrix x(dim, samples);
  const double entry_scale = data_scale / std::sqrt(static_cast<double>(samples));
  for (double& v : x.data()) v = entry_scale * normal(rng);
  const SvdFactors f = svd(x);
  std::vector<double> sa(dim), sb(dim), data_sigma(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    sa[i] = init_dist(rng);
    sb[i] = init_dist(rng);
    data_sigma[i] = i < f.sigma.size() ? f.sigma[i] : 0.0;
  }
  const SpectralInit init = make_spectral_init(f.u, sa, sb, data_sigma);
  const GradientFlowSolution closed = gradient_flow_solution(init);
  const LinearTrainTrace trace = train_linear(x, init.a0(), init.b0(), options, init.u_x);

  LinearOracleCase out;
  out.rel_deviation = std::max(frobenius_norm(trace.a - closed.model.a) / frobenius_norm(closed.model.a),
                               frobenius_norm(trace.b - closed.model.b) / frobenius_norm(closed.model.b));
  for (std::size_t i = 0; i < dim; ++i) {
    if (closed.active[i]) {
      out.product_error = std::max(out.product_error, std::abs(closed.sigma_a[i] * closed.sigma_b[i] - 1.0));
    }
  }
  out.balancedness_drift = trace.balancedness_drift;
  out.offdiag_leakage = trace.offdiag_leakage;
  out.steps = trace.steps;
  out.converged = trace.converged;
  return out;
}

ReluOracleCase relu_oracle_case(double eta, std::size_t dim, std::uint64_t seed, const TrainOptions& options) {
  if (!(eta > 0.0)) throw ContractError("relu_oracle_case: eta must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(dim);
  for (double& v : x) v = normal(rng);
  const std::vector<double> unit = normalized(x);
  double largest_sq = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    x[i] = unit[i] * std::sqrt(eta);
    largest_sq = std::max(largest_sq, x[i] * x[i]);
  }

  const ReluSolution closed = relu_closed_form(x);
  const ReluTrainResult trained = train_relu_two_point(x, 0.0, 1.0, options);

  ReluOracleCase out;
  out.eta = eta;
  out.beta_sq = trained.beta * trained.beta;
  out.beta_sq_closed = closed.beta * closed.beta;
  out.alpha_beta = trained.alpha_beta;
  // At t = 0, a_i^2 - b_i^2 = -w_i^2 and the largest |w_i|^2 is the largest x_i^2.
  out.conservation_drift = trained.trace.conserved_drift / std::max(1.0, largest_sq);
  out.steps = trained.trace.steps;
  out.converged = trained.trace.converged;
  return out;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run("verify", cfg, out, err, [&](std::ostream& os) {
    if (cfg.linear_runs == 0 && cfg.etas.empty()) throw UsageError("nothing to verify");

    TrainOptions linear_opts;
    linear_opts.step = cfg.step;
    linear_opts.grad_tol = cfg.grad_tol;
    TrainOptions relu_opts;
    relu_opts.step = cfg.relu_step;
    relu_opts.grad_tol = cfg.grad_tol;
    relu_opts.max_steps = 50'000'000;

    bool pass = true;
    Json report;
    report["seed"] = cfg.seed;

    Json linear;
    linear["runs"] = cfg.linear_runs;
    linear["dim"] = cfg.linear_dim;
    linear["samples"] = cfg.linear_samples;
    linear["data_scale"] = cfg.data_scale;
    double dev = 0.0, prod = 0.0, bal = 0.0, leak = 0.0;
    bool all_converged = true;
    for (std::size_t r = 0; r < cfg.linear_runs; ++r) {
      const auto c = linear_oracle_case(cfg.seed + r, cfg.linear_dim, cfg.linear_samples, cfg.data_scale, linear_opts);
      dev = std::max(dev, c.rel_deviation);
      prod = std::max(prod, c.product_error);
      bal = std::max(bal, c.balancedness_drift);
      leak = std::max(leak, c.offdiag_leakage);
      all_converged = all_converged && c.converged;
    }
    linear["max_rel_deviation"] = dev;
    linear["max_product_error"] = prod;
    linear["max_balancedness_drift"] = bal;
    linear["max_offdiag_leakage"] = leak;
    linear["all_converged"] = all_converged;
    const bool linear_ok = all_converged && dev <= cfg.verify_tol && bal <= cfg.balance_tol && leak <= cfg.leakage_tol;
    linear["pass"] = linear_ok;
    pass = pass && linear_ok;
    report["linear"] = linear;

    Json relu = Json::array();
    double err_sq_eta = 0.0, err_eta = 0.0;
    for (std::size_t i = 0; i < cfg.etas.size(); ++i) {
      const double eta = cfg.etas[i];
      const auto c = relu_oracle_case(eta, cfg.relu_dim, cfg.seed + 1000 + i, relu_opts);
      const double beta_err = std::abs(c.beta_sq - c.beta_sq_closed);
      const bool ok = c.converged && beta_err <= cfg.verify_tol && c.conservation_drift <= cfg.drift_tol;
      pass = pass && ok;
      err_sq_eta = std::max(err_sq_eta, std::abs(c.alpha_beta - 1.0 / (eta * eta)));
      err_eta = std::max(err_eta, std::abs(c.alpha_beta - 1.0 / eta));
      relu.push_back({{"eta", eta},
                      {"beta_sq", c.beta_sq},
                      {"beta_sq_closed_form", c.beta_sq_closed},
                      {"abs_error", beta_err},
                      {"alpha_beta", c.alpha_beta},
                      {"inv_eta", 1.0 / eta},
                      {"inv_eta_sq", 1.0 / (eta * eta)},
                      {"conservation_drift", c.conservation_drift},
                      {"steps", c.steps},
                      {"converged", c.converged},
                      {"pass", ok}});
    }
    report["relu"] = relu;
    if (!cfg.etas.empty()) {
      report["alpha_beta_max_error"] = {{"vs_inv_eta", err_eta}, {"vs_inv_eta_sq", err_sq_eta}};
      report["alpha_beta_matches"] = err_sq_eta <= err_eta ? "1/eta^2" : "1/eta";
    }
    report["tolerance"] = cfg.verify_tol;
    report["balancedness_tolerance"] = cfg.balance_tol;
    report["leakage_tolerance"] = cfg.leakage_tol;
    report["drift_tolerance"] = cfg.drift_tol;
    report["pass"] = pass;
    os << report.dump(2) << '\n';
    if (!pass) {
      err << "verify: closed form and gradient descent disagree beyond tolerance\n";
      return kExitCheckFailed;
    }
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

namespace {

Json evaluate_space(const EmbeddingTable& table, const std::vector<AnalogyTuple>& tuples,
                    const std::vector<SimilarityPair>& pairs, bool accuracy, std::ostream& err) {
  Json out = Json::object();
  const auto guarded = [&](const char* name, const std::function<MetricResult()>& f) {
    try {
      out[name] = metric(f());
    } catch (const ContractError& e) {
      err << "eval: " << name << ": " << e.what() << '\n';
      out[name] = nullptr;
    }
  };
  if (!tuples.empty()) {
    guarded("analogy", [&] { return analogy_score(table, tuples); });
    if (accuracy) guarded("analogy_accuracy", [&] { return analogy_accuracy(table, tuples); });
  }
  if (!pairs.empty()) {
    guarded("wsim", [&] { return wsim(table, pairs, zero_reference(table)); });
    guarded("wsim_reference", [&] { return wsim(table, pairs, reference_point(table)); });
  }
  return out;
}

}  // namespace

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run("eval", cfg, out, err, [&](std::ostream& os) {
    if (cfg.input.empty()) throw UsageError("--input (embedding file) is required");
    if (cfg.analogy.empty() && cfg.similarity.empty()) {
      throw UsageError("at least one of --analogy or --similarity is required");
    }
    const LoadedTable loaded = load_vectors(cfg.input, cfg.limit);
    const EmbeddingTable& table = loaded.table;
    std::vector<AnalogyTuple> tuples;
    if (!cfg.analogy.empty()) {
      const auto groups = load_analogy_dataset(cfg.analogy);
      tuples = combine_relationship_pairs(groups);
    }
    std::vector<SimilarityPair> pairs;
    if (!cfg.similarity.empty()) pairs = load_word_similarity(cfg.similarity);
    const auto encoder = load_encoder(cfg, table.dim());

    Json report;
    report["vocab"] = table.size();
    report["dim"] = table.dim();
    report["skipped_lines"] = loaded.skipped_lines;
    report["duplicate_words"] = loaded.duplicate_words;
    report["analogy_tuples"] = tuples.size();
    report["similarity_pairs"] = pairs.size();
    report["original"] = evaluate_space(table, tuples, pairs, cfg.accuracy, err);
    if (encoder) report["encoded"] = evaluate_space(table.encoded(*encoder), tuples, pairs, cfg.accuracy, err);
    os << report.dump(2) << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

int cmd_signatures(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run("signatures", cfg, out, err, [&](std::ostream& os) {
    if (cfg.input.empty()) throw UsageError("--input (signature CSV) is required");
    const SignatureSet sigs = load_signatures(cfg.input);
    if (sigs.incomplete > 0) {
      err << "signatures: " << sigs.incomplete << " entr(ies) lack a control or treated profile\n";
    }
    const auto encoder = load_encoder(cfg, sigs.dim);
    const SignatureAlignment before = signature_alignment(sigs);
    std::optional<SignatureAlignment> after;
    if (encoder) after = signature_alignment(sigs, &*encoder);
    if (before.degenerate > 0) err << "signatures: " << before.degenerate << " zero signature(s) skipped\n";

    // Ids degenerate after encoding (null space) get NaN in the after column.
    std::map<std::string, double> after_by_id;
    if (after) {
      for (const auto& c : after->cosines) after_by_id.emplace(c.perturbation_id, c.cos);
    }
    os << "perturbation_id," << (after ? "cos_before,cos_after" : "cos_before") << '\n';
    std::vector<double> b, a;
    for (const auto& c : before.cosines) {
      os << csv_field(c.perturbation_id) << ',' << format_number(c.cos);
      b.push_back(c.cos);
      if (after) {
        const auto it = after_by_id.find(c.perturbation_id);
        const double v = it == after_by_id.end() ? std::nan("") : it->second;
        os << ',' << format_number(v);
        if (std::isfinite(v)) a.push_back(v);
      }
      os << '\n';
    }
    write_summary(os, "before", b);
    if (after) write_summary(os, "after", a);
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

int cmd_mds(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run("mds", cfg, out, err, [&](std::ostream& os) {
    if (cfg.input.empty()) throw UsageError("--input (embedding file) is required");
    if (cfg.words.empty()) throw UsageError("--words is required");
    if (cfg.mds_dim != 2 && cfg.mds_dim != 3) throw UsageError("--dim must be 2 or 3");
    const LoadedTable loaded = load_vectors(cfg.input, cfg.limit);
    const auto encoder = load_encoder(cfg, loaded.table.dim());

    os << "space,word";
    for (std::size_t j = 0; j < cfg.mds_dim; ++j) os << ",x" << (j + 1);
    os << '\n';
    const auto emit = [&](const char* space, const EmbeddingTable& table) {
      const DenseMatrix coords = mds_export(table, cfg.words, cfg.mds_dim);
      for (std::size_t i = 0; i < cfg.words.size(); ++i) {
        os << space << ',' << csv_field(cfg.words[i]);
        for (std::size_t j = 0; j < cfg.mds_dim; ++j) os << ',' << format_number(coords(i, j));
        os << '\n';
      }
    };
    emit("original", loaded.table);
    if (encoder) emit("encoded", loaded.table.encoded(*encoder));
    return kExitOk;
  });
}

}  // namespace lsa::cli
