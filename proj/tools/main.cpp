#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using lsa::cli::RunConfig;

// Options shared by every subcommand. --config names a flat key=value file
// whose keys are that subcommand's long option names.
void add_common(CLI::App* sub, RunConfig& cfg, std::string& config) {
  sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  sub->add_option("--out", cfg.out, "Output file (default: stdout)");
  sub->add_option("--config", config, "key=value file; command-line flags take precedence");
}

void build(CLI::App& app, RunConfig& cfg, std::string& config) {
  app.require_subcommand(1);

  auto* gmm = app.add_subcommand("gmm-demo", "Two-Gaussian major-axis alignment: closed forms vs Monte Carlo");
  add_common(gmm, cfg, config);
  gmm->add_option("--c", cfg.c_values, "Covariance stretch values c > 0")->capture_default_str()->delimiter(',');
  gmm->add_option("--k-min", cfg.k_min, "Smallest polynomial degree")->capture_default_str();
  gmm->add_option("--k-max", cfg.k_max, "Largest polynomial degree")->capture_default_str();
  gmm->add_option("--samples", cfg.samples, "Samples per component")->capture_default_str();
  gmm->add_option("--tolerance", cfg.tolerance, "Allowed |Monte Carlo - closed form|")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "Closed-form autoencoder from an asymmetric polynomial initialization");
  add_common(fit, cfg, config);
  fit->add_option("--input", cfg.input, "Embedding file or sample matrix");
  fit->add_option("--input-format", cfg.input_format, "vectors | matrix")
      ->capture_default_str()
      ->check(CLI::IsMember({"vectors", "matrix"}));
  fit->add_option("--limit", cfg.limit, "Load at most this many words (0 = all)")->capture_default_str();
  fit->add_option("--k", cfg.k, "Polynomial degree")->capture_default_str();
  fit->add_flag("--plus-identity", cfg.plus_identity, "Use ((1/n) X X^T + I)^k");
  fit->add_option("--model", cfg.model, "Where to save the autoencoder");

  auto* verify = app.add_subcommand("verify", "Closed-form limits vs gradient descent");
  add_common(verify, cfg, config);
  verify->add_option("--linear-runs", cfg.linear_runs)->capture_default_str();
  verify->add_option("--linear-dim", cfg.linear_dim)->capture_default_str();
  verify->add_option("--linear-samples", cfg.linear_samples)->capture_default_str();
  verify->add_option("--data-scale", cfg.data_scale, "Typical singular value of the linear data")->capture_default_str();
  verify->add_option("--step", cfg.step, "Linear gradient-descent step")->capture_default_str();
  verify->add_option("--grad-tol", cfg.grad_tol)->capture_default_str();
  verify->add_option("--eta", cfg.etas, "ReLU ||x||^2 grid")->capture_default_str()->delimiter(',');
  verify->add_option("--relu-dim", cfg.relu_dim)->capture_default_str();
  verify->add_option("--relu-step", cfg.relu_step)->capture_default_str();
  verify->add_option("--tolerance", cfg.verify_tol)->capture_default_str();
  verify->add_option("--balance-tol", cfg.balance_tol)->capture_default_str();
  verify->add_option("--leakage-tol", cfg.leakage_tol)->capture_default_str();
  verify->add_option("--drift-tol", cfg.drift_tol)->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Analogy and word-similarity metrics, optionally after an encoder");
  add_common(eval, cfg, config);
  eval->add_option("--input", cfg.input, "Embedding file");
  eval->add_option("--limit", cfg.limit, "Load at most this many words (0 = all)")->capture_default_str();
  eval->add_option("--analogy", cfg.analogy, "Analogy dataset");
  eval->add_option("--similarity", cfg.similarity, "Word-similarity pairs");
  eval->add_option("--model", cfg.model, "Autoencoder whose encoder is applied");
  eval->add_flag("!--no-accuracy", cfg.accuracy, "Skip the argmax analogy accuracy");

  auto* sigs = app.add_subcommand("signatures", "Per-perturbation signature cosines across two groups");
  add_common(sigs, cfg, config);
  sigs->add_option("--input", cfg.input, "Signature CSV");
  sigs->add_option("--model", cfg.model, "Autoencoder whose encoder is applied");

  auto* mds = app.add_subcommand("mds", "Classical MDS coordinates of selected words");
  add_common(mds, cfg, config);
  mds->add_option("--input", cfg.input, "Embedding file");
  mds->add_option("--limit", cfg.limit, "Load at most this many words (0 = all)")->capture_default_str();
  mds->add_option("--words", cfg.words, "Words to place")->delimiter(',');
  mds->add_option("--dim", cfg.mds_dim, "2 or 3")->capture_default_str();
  mds->add_option("--model", cfg.model, "Autoencoder whose encoder is applied");
}

// Turns the entries of `config` that the command line left unset into
// `--key=value` arguments placed ahead of the user's own.
std::vector<std::string> config_arguments(const CLI::App& sub, const std::string& config) {
  std::vector<std::string> args;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(config)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub.get_name())) {
      throw CLI::ValidationError(config, "section [" + item.parents[0] + "] does not belong to " + sub.get_name());
    }
    const CLI::Option* opt = sub.get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") {
      throw CLI::ValidationError(config, "unknown key '" + item.name + "' for " + sub.get_name());
    }
    if (opt->count() > 0) continue;
    std::string value;
    for (const auto& input : item.inputs) value += (value.empty() ? "" : ",") + input;
    args.push_back("--" + item.name + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> given(argv + 1, argv + argc);
  RunConfig cfg;
  std::string config;
  CLI::App app{"Latent-space alignment toolkit"};
  build(app, cfg, config);

  try {
    app.parse(std::vector<std::string>(given.rbegin(), given.rend()));
    if (!config.empty()) {
      const CLI::App* sub = app.get_subcommands().front();
      std::vector<std::string> args{sub->get_name()};
      for (auto& a : config_arguments(*sub, config)) args.push_back(std::move(a));
      args.insert(args.end(), given.begin() + 1, given.end());
      cfg = RunConfig{};
      config.clear();
      app.clear();
      app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lsa::cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "lsa: " << e.what() << '\n';
    return lsa::cli::kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "gmm-demo") return lsa::cli::cmd_gmm_demo(cfg, std::cout, std::cerr);
  if (name == "fit") return lsa::cli::cmd_fit(cfg, std::cout, std::cerr);
  if (name == "verify") return lsa::cli::cmd_verify(cfg, std::cout, std::cerr);
  if (name == "eval") return lsa::cli::cmd_eval(cfg, std::cout, std::cerr);
  if (name == "signatures") return lsa::cli::cmd_signatures(cfg, std::cout, std::cerr);
  return lsa::cli::cmd_mds(cfg, std::cout, std::cerr);
}
