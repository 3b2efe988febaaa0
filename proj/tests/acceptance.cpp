// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tabsa/corpus.hpp"
#include "tabsa/pipeline.hpp"
#include "tabsa/selfcheck.hpp"

using namespace tabsa;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& details) {
  std::printf("%-24s %s  %s\n", name.c_str(), pass ? "PASS" : "FAIL", details.c_str());
  if (!pass) ++failures;
}

void report_skip(const std::string& name, const std::string& why) {
  std::printf("%-24s SKIP  %s\n", name.c_str(), why.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string locate_sentihood() {
  if (const char* env = std::getenv("SENTIHOOD_DIR")) {
    if (fs::exists(env)) return env;
  }
  if (const char* env = std::getenv("SENTIHOOD_JSON")) {
    if (fs::exists(env)) return env;
  }
  for (const char* candidate : {"data/sentihood", "../data/sentihood"}) {
    if (fs::exists(fs::path(candidate) / "sentihood-train.json")) return candidate;
  }
  return "";
}

// Criterion: full SentiHood loads with exactly 5215 / 3862 / 1353 sentences
// in under 10 seconds. Skipped when the dataset is not present.
void check_dataset_fidelity() {
  std::string path = locate_sentihood();
  if (path.empty()) {
    report_skip("dataset-fidelity", "SentiHood dataset not present "
                "(set SENTIHOOD_DIR or SENTIHOOD_JSON)");
    return;
  }
  auto start = std::chrono::steady_clock::now();
  CorpusLoadReport load;
  load_sentihood(path, &load);
  double elapsed = seconds_since(start);

  std::ostringstream os;
  os << "sentences " << load.loaded << " (single " << load.single_target << ", two "
     << load.two_target << ") in " << elapsed << " s";
  bool pass = load.loaded == 5215 && load.single_target == 3862 &&
              load.two_target == 1353 && elapsed < 10.0;
  report("dataset-fidelity", pass, os.str());
}

void check_suite(const CheckResult& r, double limit_s, double elapsed) {
  std::ostringstream os;
  os << r.details;
  if (limit_s > 0) os << " in " << elapsed << " s";
  report(r.name, r.pass && (limit_s <= 0 || elapsed < limit_s), os.str());
}

struct SweepResult {
  std::vector<SeedOutcome> outcomes;
  double elapsed = 0.0;
};

// Shared by the directional and separation criteria: default synthetic corpus
// (500 sentences, 4 aspects), 10 seeds.
SweepResult run_sweep() {
  RunConfig cfg;
  cfg.synthetic = SyntheticConfig::defaults();
  cfg.seed = 1;
  cfg.out_dir = (fs::temp_directory_path() / "tabsa_acceptance_sweep").string();

  auto start = std::chrono::steady_clock::now();
  Corpus corpus = load_corpus(cfg);
  SweepResult sweep;
  for (std::uint64_t s = 0; s < 10; ++s) {
    sweep.outcomes.push_back(run_eval_seed(corpus, cfg, cfg.seed + s));
  }
  sweep.elapsed = seconds_since(start);
  return sweep;
}

void check_directional(const SweepResult& sweep) {
  double delta_sum = 0.0;
  std::size_t n = 0;
  for (const SeedOutcome& s : sweep.outcomes) {
    if (s.raw.aspect_macro_f1 && s.refined.aspect_macro_f1) {
      delta_sum += *s.refined.aspect_macro_f1 - *s.raw.aspect_macro_f1;
      ++n;
    }
  }
  double mean_delta = n ? delta_sum / static_cast<double>(n) : 0.0;
  std::ostringstream os;
  os << "mean refined-raw macro-F1 delta " << mean_delta * 100.0 << " points over " << n
     << " seeds in " << sweep.elapsed << " s (threshold +1.0)";
  report("directional-f1", n == 10 && mean_delta >= 0.01 && sweep.elapsed < 300.0,
         os.str());
}

void check_separation(const SweepResult& sweep) {
  std::size_t better = 0, n = 0;
  for (const SeedOutcome& s : sweep.outcomes) {
    if (s.separation_raw && s.separation_refined) {
      ++n;
      if (*s.separation_refined > *s.separation_raw) ++better;
    }
  }
  std::ostringstream os;
  os << "refined separation exceeds unrefined on " << better << " of " << n
     << " seeds (threshold 8/10)";
  report("separation", n == 10 && better >= 8, os.str());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Criterion: identical resolved configs give byte-identical EvalReports
// regardless of the worker count.
void check_determinism() {
  RunConfig cfg;
  cfg.synthetic = SyntheticConfig::defaults();
  cfg.synthetic->count = 120;
  cfg.seed = 2;
  cfg.workers = 1;
  cfg.out_dir = (fs::temp_directory_path() / "tabsa_acceptance_det1").string();
  fs::remove_all(cfg.out_dir);
  cmd_eval(cfg);
  std::string first = slurp(cfg.out_dir + "/eval_report.json");

  RunConfig cfg2 = cfg;
  cfg2.workers = 8;
  cfg2.out_dir = (fs::temp_directory_path() / "tabsa_acceptance_det2").string();
  fs::remove_all(cfg2.out_dir);
  cmd_eval(cfg2);
  std::string second = slurp(cfg2.out_dir + "/eval_report.json");

  std::ostringstream os;
  os << first.size() << " bytes, workers 1 vs 8";
  report("determinism", !first.empty() && first == second, os.str());
}

}  // namespace

int main() {
  check_dataset_fidelity();

  auto start = std::chrono::steady_clock::now();
  CheckResult gradient = run_gradient_suite(100);
  check_suite(gradient, 30.0, seconds_since(start));

  start = std::chrono::steady_clock::now();
  CheckResult descent = run_descent_suite(100);
  check_suite(descent, 0.0, 0.0);

  CheckResult step = run_step_function_suite(1000);
  check_suite(step, 0.0, 0.0);

  CheckResult metrics = run_metrics_oracle_suite(200);
  check_suite(metrics, 0.0, 0.0);

  SweepResult sweep = run_sweep();
  check_directional(sweep);
  check_separation(sweep);

  check_determinism();

  if (failures) {
    std::printf("\n%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("\nall acceptance criteria satisfied\n");
  return 0;
}
