#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "curlra/generators.hpp"
#include "curlra/pipelines.hpp"
#include "curlra/preprocess.hpp"

namespace curlra {

// Multiplier settings read from "preprocess.*" keys. For the ordinary pipeline
// variants the input is replaced by W H before the run. For multiplier_pinv and
// gaussian_sampling the spec is the algorithm's own multiplier instead.
struct PreprocessConfig {
  MultiplierKind kind = MultiplierKind::quasi_gaussian;
  std::size_t d = 1, T = 20, l = 0, u = 0;
  bool nonsingular = true;
  PadPolicy pad = PadPolicy::zero_pad;
};

struct ExperimentConfig {
  std::string name = "experiment";
  GeneratorSpec generator{};
  // Besides the run_pipeline variants: multiplier_pinv and gaussian_sampling
  // (l_bar taken from pipeline.s).
  PipelineSpec pipeline{};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::optional<std::size_t> m, n, r, k, l;  // overrides
  std::string report;                        // output path, empty for none
  std::size_t memory_budget = std::size_t{1} << 26;  // max entries of W
  std::optional<PreprocessConfig> preprocess;

  // Applies the overrides and checks trials and the budget (ArgumentError).
  void resolve();
};

// Flat "key = value" lines; '#' starts a comment. Keys before the first
// "[name]" header are shared defaults, each header starts an experiment.
// Errors are ParseError with the field path and line.
std::vector<ExperimentConfig> parse_config(std::istream& in);
std::vector<ExperimentConfig> load_config(const std::string& path);
// One key for an existing config (same error rules, line 0).
void set_config_field(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void write_config(std::ostream& out, const ExperimentConfig& cfg);

struct TrialResult {
  std::size_t trial = 0;
  bool ok = false;
  std::string failure;        // exception text of a failed trial
  double error = 0;           // relative spectral error of the CUR of the (pre-processed) input
  double error_original = 0;  // against the original via H^+, with a pre-processing step only
  std::size_t touched = 0;    // sublinear reads of the pipeline input
  std::size_t dense_touched = 0;
  double seconds = 0;
};

struct ExperimentReport {
  std::string name;
  std::size_t m = 0, n = 0, r = 0, k = 0, l = 0;
  std::size_t trials = 0;
  std::vector<TrialResult> per_trial;  // in trial order
  bool back_mapped = false;
  // Over successful trials only.
  double mean = 0, std = 0;
  double mean_original = 0, std_original = 0;
  std::size_t failures = 0;
  std::size_t entries_touched = 0;  // largest per-trial count, dense reads included
  double seconds = 0;

  std::vector<double> errors() const;
  std::vector<double> errors_original() const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

// Tests 1-4 on perturbed factor-Gaussian inputs: n = 256, r = 8 at desk
// scale; the n in {256, 512, 1024} x r in {8, 16, 32} grid with 1000 trials otherwise.
std::vector<ExperimentConfig> table1_suite(bool paper_scale, std::uint64_t seed);

struct KsRow {
  std::size_t T = 0;
  double mean_statistic = 0, std_statistic = 0;
  double pass_rate = 0;
  std::vector<double> statistics;
};

struct KsSuiteReport {
  std::size_t n = 0, trials = 0;
  double alpha = 0.01;
  std::vector<KsRow> rows;
};

KsSuiteReport run_ks_suite(std::size_t n, const std::vector<std::size_t>& T_list, std::size_t trials,
                           std::uint64_t seed, double alpha = 0.01);

struct NormSuiteConfig {
  std::size_t p = 32, q = 8;
  std::size_t nz_p = 16, nz_q = 8, nz = 48;
  std::vector<double> x = {0.1, 0.01};
};

struct TailRow {
  double x = 0;
  double frequency = 0;  // fraction of trials with ||W^+|| >= 1/x
  double bound = 0;      // sqrt(2q / pi) x
};

struct NormSuiteReport {
  NormSuiteConfig config;
  std::size_t trials = 0;
  double mean_norm = 0, bound_norm = 0;            // ||G||, sqrt(p) + sqrt(q)
  double mean_pinv_norm = 0, bound_pinv_norm = 0;  // ||G^+||, e sqrt(p) / (p - q)
  std::size_t nz_rank_deficient = 0;               // counted as tail events
  std::vector<TailRow> tails;
};

NormSuiteReport run_norm_suite(std::size_t trials, std::uint64_t seed, const NormSuiteConfig& config = {});

enum class ReportFormat { csv, table };
ReportFormat parse_report_format(const std::string& s);

// One output line. Experiments with a pre-processing step give two rows, the
// second named "<name>/original" with the back-mapped errors.
struct ReportRow {
  std::string experiment;
  std::size_t m = 0, n = 0, r = 0, k = 0, l = 0, trials = 0;
  double mean = 0, std = 0;
  std::size_t failures = 0, entries_touched = 0;
  double seconds = 0;
};

inline constexpr const char* kReportHeader = "experiment,m,n,r,k,l,trials,mean,std,failures,entries_touched,seconds";

std::vector<ReportRow> report_rows(const std::vector<ExperimentReport>& reports);
void report_write(const std::vector<ExperimentReport>& reports, std::ostream& out, ReportFormat format);
// IoError names the path.
void report_write(const std::vector<ExperimentReport>& reports, const std::string& path, ReportFormat format);
std::vector<ReportRow> read_report_csv(std::istream& in);

void ks_write(const KsSuiteReport& report, std::ostream& out, ReportFormat format);
void norms_write(const NormSuiteReport& report, std::ostream& out, ReportFormat format);

}  // namespace curlra
