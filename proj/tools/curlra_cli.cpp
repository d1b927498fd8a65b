#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "curlra/bench.hpp"
#include "curlra/errors.hpp"
#include "curlra/io.hpp"
#include "curlra/linalg.hpp"
#include "curlra/skeleton.hpp"

using namespace curlra;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string config;
  std::string out;
  std::string format = "table";
  bool paper_scale = false;
  std::vector<std::string> sets;  // key=value
};

void add_common(CLI::App* app, Common& c, bool with_trials) {
  app->add_option("--seed", c.seed, "Base seed");
  if (with_trials) app->add_option("--trials", c.trials, "Trials per experiment");
  app->add_option("--out", c.out, "Output path (stdout when empty)");
  app->add_option("--format", c.format, "csv or table")->check(CLI::IsMember({"csv", "table"}));
  app->add_flag("--paper-scale", c.paper_scale, "Paper-sized parameters (long running)");
}

// First experiment of --config, then --set key=value in order.
ExperimentConfig single_config(const Common& c) {
  ExperimentConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config).front();
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + kv + "'");
    set_config_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.trials) cfg.trials = *c.trials;
  return cfg;
}

template <class Write>
void emit(const std::string& path, Write write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  write(f);
  if (!f) throw IoError("write failed for '" + path + "'");
}

MatrixFormat parse_matrix_format(const std::string& s) {
  if (s == "mm") return MatrixFormat::mm_array;
  if (s == "mm_coordinate") return MatrixFormat::mm_coordinate;
  if (s == "binary") return MatrixFormat::binary;
  throw ArgumentError("matrix format: expected mm, mm_coordinate or binary");
}

int cmd_gen(const Common& c, const std::string& matrix_format) {
  if (c.out.empty()) throw ArgumentError("gen: --out is required");
  ExperimentConfig cfg = single_config(c);
  cfg.resolve();
  Rng rng = Rng(cfg.seed).split(1);
  const AnyMatrix W = generate(cfg.generator, rng);
  const auto fmt = parse_matrix_format(matrix_format);
  std::visit([&](const auto& M) { save_matrix(c.out, M, fmt); }, W);
  std::visit([&](const auto& M) { std::cout << "wrote " << M.rows() << " x " << M.cols() << " to " << c.out << '\n'; },
             W);
  return 0;
}

template <Scalar T>
int run_cur(const ExperimentConfig& cfg, const Matrix<T>& W, const std::string& cur_out) {
  EntrySource<T> src(W);
  Rng rng = Rng(cfg.seed).split(2);
  PipelineStats stats;
  const auto cur = run_pipeline(cfg.pipeline, src, rng, &stats);
  const auto spec = dense_error(W, cur, NormKind::spectral);
  const auto frob = dense_error(W, cur, NormKind::frobenius);
  std::cout << "variant           " << cfg.pipeline.variant << '\n'
            << "size              " << W.rows() << " x " << W.cols() << '\n'
            << "generator         " << cur.I.size() << " x " << cur.J.size() << ", rank " << cur.r << '\n'
            << "relative spectral " << spec.relative << '\n'
            << "relative frobenius " << frob.relative << '\n'
            << "entries touched   " << src.touched() + src.dense_touched() << " of " << W.size() << '\n'
            << "attempts          " << stats.attempts << '\n';
  if (!cur_out.empty()) emit(cur_out, [&](std::ostream& o) { write_cur(o, cur); });
  return 0;
}

int cmd_cur(const Common& c, const std::string& input) {
  ExperimentConfig cfg = single_config(c);
  cfg.resolve();
  AnyMatrix W;
  if (!input.empty()) {
    W = load_matrix(input);
  } else {
    Rng rng = Rng(cfg.seed).split(1);
    W = generate(cfg.generator, rng);
  }
  return std::visit([&](const auto& M) { return run_cur(cfg, M, c.out); }, W);
}

int cmd_bench(const Common& c, const std::string& suite) {
  std::vector<ExperimentConfig> cfgs;
  if (!suite.empty()) {
    if (suite != "table1") throw ArgumentError("bench: unknown suite '" + suite + "'");
    cfgs = table1_suite(c.paper_scale, c.seed.value_or(1));
  } else {
    if (c.config.empty()) throw ArgumentError("bench: need --config or --suite");
    cfgs = load_config(c.config);
  }
  std::vector<ExperimentReport> reps;
  for (auto& cfg : cfgs) {
    if (c.seed && suite.empty()) cfg.seed = *c.seed;
    if (c.trials) cfg.trials = *c.trials;
    if (c.paper_scale) {
      if (!c.trials) cfg.trials = 1000;
      cfg.memory_budget = std::max<std::size_t>(cfg.memory_budget, kMaxEntries);
    }
    std::cerr << "running " << cfg.name << " (" << cfg.trials << " trials)\n";
    reps.push_back(run_experiment(cfg));
    if (!cfg.report.empty()) report_write({reps.back()}, cfg.report, ReportFormat::csv);
  }
  const auto fmt = parse_report_format(c.format);
  if (c.out.empty())
    report_write(reps, std::cout, fmt);
  else
    report_write(reps, c.out, fmt);
  return 0;
}

int cmd_ks(const Common& c, std::size_t n, std::vector<std::size_t> T_list) {
  std::size_t trials = c.trials.value_or(100);
  if (c.paper_scale) {
    n = 1024;
    if (!c.trials) trials = 1000;
  }
  const auto rep = run_ks_suite(n, T_list, trials, c.seed.value_or(1));
  emit(c.out, [&](std::ostream& o) { ks_write(rep, o, parse_report_format(c.format)); });
  return 0;
}

int cmd_norms(const Common& c, NormSuiteConfig nc) {
  std::size_t trials = c.trials.value_or(200);
  if (c.paper_scale && !c.trials) trials = 1000;
  const auto rep = run_norm_suite(trials, c.seed.value_or(1), nc);
  emit(c.out, [&](std::ostream& o) { norms_write(rep, o, parse_report_format(c.format)); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CUR low-rank approximation toolkit"};
  app.require_subcommand(1);

  Common gen_c, cur_c, bench_c, ks_c, norms_c;

  auto* gen = app.add_subcommand("gen", "Generate a matrix and write it to a file");
  add_common(gen, gen_c, false);
  gen->add_option("--config", gen_c.config, "Config file (first experiment is used)");
  gen->add_option("--set", gen_c.sets, "Config field as key=value, repeatable");
  std::string matrix_format = "mm";
  gen->add_option("--matrix-format", matrix_format, "mm, mm_coordinate or binary");

  auto* cur = app.add_subcommand("cur", "Run one pipeline and print its error report");
  add_common(cur, cur_c, false);
  cur->add_option("--config", cur_c.config, "Config file (first experiment is used)");
  cur->add_option("--set", cur_c.sets, "Config field as key=value, repeatable");
  std::string input;
  cur->add_option("--input", input, "Matrix file; the configured generator otherwise");

  auto* bench = app.add_subcommand("bench", "Run an experiment suite");
  add_common(bench, bench_c, true);
  bench->add_option("--config", bench_c.config, "Config file");
  std::string suite;
  bench->add_option("--suite", suite, "Built-in suite: table1");

  auto* ks = app.add_subcommand("ks", "Normality of quasi-Gaussian products");
  add_common(ks, ks_c, true);
  std::size_t ks_n = 256;
  std::vector<std::size_t> ks_T = {1, 2, 5, 10, 20};
  ks->add_option("--n", ks_n, "Matrix size, a power of two");
  ks->add_option("--T", ks_T, "Factor counts")->delimiter(',');

  auto* norms = app.add_subcommand("norms", "Gaussian and sparse Gaussian norm corridors");
  add_common(norms, norms_c, true);
  NormSuiteConfig nc;
  norms->add_option("--p", nc.p, "Rows of the Gaussian matrix");
  norms->add_option("--q", nc.q, "Columns of the Gaussian matrix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gen_c, matrix_format);
    if (*cur) return cmd_cur(cur_c, input);
    if (*bench) return cmd_bench(bench_c, suite);
    if (*ks) return cmd_ks(ks_c, ks_n, ks_T);
    if (*norms) return cmd_norms(norms_c, nc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
