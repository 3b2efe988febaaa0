#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "tabsa/errors.hpp"
#include "tabsa/pipeline.hpp"
#include "tabsa/selfcheck.hpp"

namespace {

struct CliFlags {
  std::string config_path;
  std::string glove;
  std::string data;
  std::string synthetic;
  std::string out;
  std::string refined;
  std::size_t dim = 0;
  std::size_t c = 0;
  double alpha = 0.0, beta = 0.0, lambda = 0.0, lr = 0.0;
  std::size_t max_iters = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::size_t seeds = 0;
  bool json = false;
};

// Shared option set; every subcommand takes the same run configuration.
void add_common_options(CLI::App* cmd, CliFlags& f) {
  cmd->add_option("--config", f.config_path, "run config JSON (flags override it)");
  cmd->add_option("--glove", f.glove, "GloVe text embedding file");
  cmd->add_option("--dim", f.dim, "embedding dimension (with --glove)");
  cmd->add_option("--data", f.data, "SentiHood JSON file or directory");
  cmd->add_option("--synthetic", f.synthetic,
                  "synthetic corpus config file, or 'default'");
  cmd->add_option("--c", f.c, "sparsity stop threshold");
  cmd->add_option("--alpha", f.alpha, "aspect context weight");
  cmd->add_option("--beta", f.beta, "irrelevant-target repulsion weight");
  cmd->add_option("--lambda", f.lambda, "sparsity penalty weight");
  cmd->add_option("--lr", f.lr, "refiner learning rate");
  cmd->add_option("--max-iters", f.max_iters, "refiner iteration budget");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--workers", f.workers, "parallel map width (0 = all cores)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--json", f.json, "machine-readable output");
}

tabsa::RunConfig resolve_config(const CLI::App* cmd, const CliFlags& f) {
  tabsa::RunConfig cfg;
  if (cmd->count("--config")) cfg = tabsa::RunConfig::from_json_file(f.config_path);

  if (cmd->count("--glove")) cfg.glove_path = f.glove;
  if (cmd->count("--dim")) cfg.dim = f.dim;
  if (cmd->count("--data")) {
    cfg.sentihood_path = f.data;
    cfg.synthetic.reset();
  }
  if (cmd->count("--synthetic")) {
    cfg.synthetic = f.synthetic == "default"
                        ? tabsa::SyntheticConfig::defaults()
                        : tabsa::parse_synthetic_config(f.synthetic);
    cfg.sentihood_path.clear();
  }
  if (cmd->count("--c")) cfg.refiner.c = f.c;
  if (cmd->count("--alpha")) cfg.refiner.alpha = f.alpha;
  if (cmd->count("--beta")) cfg.refiner.beta = f.beta;
  if (cmd->count("--lambda")) cfg.refiner.lambda = f.lambda;
  if (cmd->count("--lr")) cfg.refiner.learning_rate = f.lr;
  if (cmd->count("--max-iters")) cfg.refiner.max_iters = f.max_iters;
  if (cmd->count("--seed")) cfg.seed = f.seed;
  if (cmd->count("--workers")) cfg.workers = f.workers;
  if (cmd->count("--out")) cfg.out_dir = f.out;
  cfg.json_output = f.json;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"context-aware target/aspect embedding refinement for TABSA"};
  app.require_subcommand(1);

  CliFlags flags;

  CLI::App* refine = app.add_subcommand("refine", "refine the corpus, write JSONL records");
  add_common_options(refine, flags);

  CLI::App* eval = app.add_subcommand("eval", "train + evaluate raw vs refined");
  add_common_options(eval, flags);
  eval->add_option("--refined", flags.refined, "consume an existing refined.jsonl");
  eval->add_option("--seeds", flags.seeds, "seed sweep width (mean/stddev reported)");
  bool emit_csv = false;
  eval->add_flag("--csv", emit_csv, "emit per-aspect vectors as CSV");

  CLI::App* inspect = app.add_subcommand("inspect", "trace one (sentence, target, aspect)");
  add_common_options(inspect, flags);
  std::string sentence_id, target_id, aspect;
  inspect->add_option("sentence_id", sentence_id)->required();
  inspect->add_option("target", target_id)->required();
  inspect->add_option("aspect", aspect)->required();

  CLI::App* selfcheck = app.add_subcommand("selfcheck", "run the invariant suites");
  selfcheck->add_flag("--json", flags.json, "machine-readable output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (refine->parsed()) {
      tabsa::RunConfig cfg = resolve_config(refine, flags);
      tabsa::RefineOutcome out = tabsa::cmd_refine(cfg);
      if (cfg.json_output) {
        std::cout << out.summary_json;
      } else {
        std::printf("refined %zu records -> %s\n", out.summary.records,
                    out.refined_path.c_str());
        std::printf("convergence %.1f%%, mean iterations %.1f, mean k %.2f\n",
                    100.0 * out.summary.convergence_rate, out.summary.mean_iterations,
                    out.summary.mean_nonzero);
      }
    } else if (eval->parsed()) {
      tabsa::RunConfig cfg = resolve_config(eval, flags);
      if (eval->count("--refined")) cfg.refined_path = flags.refined;
      if (eval->count("--seeds")) cfg.n_seeds = flags.seeds;
      cfg.emit_csv = cfg.emit_csv || emit_csv;
      tabsa::EvalOutcome out = tabsa::cmd_eval(cfg);
      std::cout << (cfg.json_output ? out.report_json : out.report_text);
    } else if (inspect->parsed()) {
      tabsa::RunConfig cfg = resolve_config(inspect, flags);
      tabsa::InspectOutcome out = tabsa::cmd_inspect(cfg, sentence_id, target_id, aspect);
      std::cout << (cfg.json_output ? out.json : out.text);
    } else if (selfcheck->parsed()) {
      bool all_pass = true;
      std::vector<tabsa::CheckResult> results = tabsa::run_all_selfchecks();
      for (const tabsa::CheckResult& r : results) {
        all_pass = all_pass && r.pass;
        if (!flags.json) {
          std::printf("%-20s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                      r.details.c_str());
        }
      }
      if (flags.json) {
        std::string sep;
        std::cout << "[";
        for (const tabsa::CheckResult& r : results) {
          std::cout << sep << "{\"name\":\"" << r.name << "\",\"pass\":"
                    << (r.pass ? "true" : "false") << "}";
          sep = ",";
        }
        std::cout << "]\n";
      }
      if (!all_pass) return 1;
    }
  } catch (const tabsa::UnboundedObjectiveError& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return tabsa::kExitNumericalDivergence;
  } catch (const tabsa::NumericalDivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return tabsa::kExitNumericalDivergence;
  } catch (const tabsa::UndefinedMetricError& e) {
    std::cerr << "undefined metric: " << e.what() << '\n';
    return tabsa::kExitUndefinedMetric;
  } catch (const tabsa::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return tabsa::kExitInputError;
  }
  return tabsa::kExitOk;
}
