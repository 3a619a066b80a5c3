#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "roma/cli.hpp"

namespace {

void add_common(CLI::App* cmd, roma::cli::RunConfig& config, bool repeatable_epsilon) {
  cmd->add_option("--model", config.model, "Model: http://host:port or a builtin spec (e.g. hic-normal:mu=0.5)")
      ->envname("ROMA_MODEL_URL");
  cmd->add_option("--dataset", config.dataset, "JSON Lines dataset")->required();
  cmd->add_option("--delta", config.delta, "Distinct-misclassification confidence threshold")
      ->capture_default_str();
  auto* eps = cmd->add_option("--epsilon", config.epsilons, "L-infinity perturbation radius");
  if (repeatable_epsilon) {
    eps->description("L-infinity perturbation radius (repeat for each sweep point)");
  } else {
    eps->expected(1);
  }
  eps->required();
  cmd->add_option("--n", config.n, "Perturbed samples per point")->capture_default_str();
  cmd->add_option("--seed", config.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", config.out, "Output file (default: stdout)");
  cmd->add_option("--workers", config.workers, "Parallel evaluation workers")->capture_default_str();
  cmd->add_flag("--retry-on-fail", config.retry_on_fail, "Retry once with 2n samples when Box-Cox fails");
  cmd->add_option("--domain-min", config.domain_min, "Lower clip bound of input features")->capture_default_str();
  cmd->add_option("--domain-max", config.domain_max, "Upper clip bound of input features")->capture_default_str();
  cmd->add_option("--max-requests", config.max_concurrent_requests, "Concurrent batch requests per model")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic local robustness measurement for black-box classifiers"};
  app.require_subcommand(1);

  roma::cli::RunConfig config;

  auto* eval = app.add_subcommand("eval", "Compute plr for every dataset point and write a JSON report");
  add_common(eval, config, false);

  auto* sweep = app.add_subcommand("sweep", "Mean plr and success rate per epsilon as CSV");
  add_common(sweep, config, true);

  auto* hist = app.add_subcommand("histogram", "hic histogram of one point (raw and Box-Cox stages) as CSV");
  add_common(hist, config, false);
  hist->add_option("--point", config.point_id, "Point id from the dataset")->required();
  hist->add_option("--bins", config.bins, "Number of equal-width bins")->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Welch t-test and binomial test between two categories");
  compare->add_option("--cat-a", config.cat_a, "First category")->required();
  compare->add_option("--cat-b", config.cat_b, "Second category")->required();
  compare->add_option("--report", config.report, "Existing eval report (skips evaluation)");
  compare->add_option("--model", config.model, "Model address")->envname("ROMA_MODEL_URL");
  compare->add_option("--dataset", config.dataset, "JSON Lines dataset");
  compare->add_option("--delta", config.delta, "Threshold")->capture_default_str();
  compare->add_option("--epsilon", config.epsilons, "Perturbation radius")->expected(1);
  compare->add_option("--n", config.n, "Perturbed samples per point")->capture_default_str();
  compare->add_option("--seed", config.seed, "Master seed")->capture_default_str();
  compare->add_option("--out", config.out, "Output file (default: stdout)");
  compare->add_option("--workers", config.workers, "Parallel evaluation workers")->capture_default_str();
  compare->add_flag("--retry-on-fail", config.retry_on_fail, "Retry once with 2n samples when Box-Cox fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : roma::cli::kExitError;
  }

  if (eval->parsed()) return roma::cli::cmd_eval(config);
  if (sweep->parsed()) return roma::cli::cmd_sweep(config);
  if (hist->parsed()) return roma::cli::cmd_histogram(config);
  return roma::cli::cmd_compare(config);
}
