#include "curlra/bench.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "curlra/entry_source.hpp"
#include "curlra/errors.hpp"
#include "curlra/io.hpp"
#include "curlra/linalg.hpp"
#include "curlra/skeleton.hpp"
#include "curlra/stats.hpp"

namespace curlra {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class Int>
Int parse_int(const std::string& v) {
  Int x{};
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ArgumentError("expected an integer, got '" + v + "'");
  return x;
}

double parse_double(const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ArgumentError("expected a number, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ArgumentError("expected true or false, got '" + v + "'");
}

Sampler parse_sampler(const std::string& v) {
  if (v == "exactly_l") return Sampler::exactly_l;
  if (v == "expected_l") return Sampler::expected_l;
  throw ArgumentError("unknown sampler '" + v + "'");
}
std::string to_string(Sampler s) { return s == Sampler::exactly_l ? "exactly_l" : "expected_l"; }

ScoreMode parse_scores(const std::string& v) {
  if (v == "svd_based") return ScoreMode::svd_based;
  if (v == "uniform") return ScoreMode::uniform;
  throw ArgumentError("unknown score mode '" + v + "'");
}
std::string to_string(ScoreMode s) { return s == ScoreMode::svd_based ? "svd_based" : "uniform"; }

SvdCurMode parse_svd_mode(const std::string& v) {
  if (v == "deterministic") return SvdCurMode::deterministic;
  if (v == "sampled") return SvdCurMode::sampled;
  throw ArgumentError("unknown svd mode '" + v + "'");
}
std::string to_string(SvdCurMode s) { return s == SvdCurMode::deterministic ? "deterministic" : "sampled"; }

PadPolicy parse_pad(const std::string& v) {
  if (v == "zero_pad") return PadPolicy::zero_pad;
  if (v == "error") return PadPolicy::error;
  throw ArgumentError("unknown pad policy '" + v + "'");
}
std::string to_string(PadPolicy p) { return p == PadPolicy::zero_pad ? "zero_pad" : "error"; }

std::size_t to_size(const std::string& v) { return parse_int<std::size_t>(v); }

PreprocessConfig& pre(ExperimentConfig& c) {
  if (!c.preprocess) c.preprocess.emplace();
  return *c.preprocess;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"name", [](auto& c, auto& v) { c.name = v; }},
      {"trials", [](auto& c, auto& v) { c.trials = to_size(v); }},
      {"seed", [](auto& c, auto& v) { c.seed = parse_int<std::uint64_t>(v); }},
      {"report", [](auto& c, auto& v) { c.report = v; }},
      {"memory_budget", [](auto& c, auto& v) { c.memory_budget = to_size(v); }},
      {"m", [](auto& c, auto& v) { c.m = to_size(v); }},
      {"n", [](auto& c, auto& v) { c.n = to_size(v); }},
      {"r", [](auto& c, auto& v) { c.r = to_size(v); }},
      {"k", [](auto& c, auto& v) { c.k = to_size(v); }},
      {"l", [](auto& c, auto& v) { c.l = to_size(v); }},
      {"generator.variant", [](auto& c, auto& v) { c.generator.variant = v; }},
      {"generator.m", [](auto& c, auto& v) { c.generator.m = to_size(v); }},
      {"generator.n", [](auto& c, auto& v) { c.generator.n = to_size(v); }},
      {"generator.r", [](auto& c, auto& v) { c.generator.r = to_size(v); }},
      {"generator.nz", [](auto& c, auto& v) { c.generator.nz = to_size(v); }},
      {"generator.kind", [](auto& c, auto& v) { c.generator.kind = parse_factor_kind(v); }},
      {"generator.sigma", [](auto& c, auto& v) { c.generator.sigma = parse_double(v); }},
      {"generator.rho", [](auto& c, auto& v) { c.generator.rho = parse_double(v); }},
      {"generator.max_ratio", [](auto& c, auto& v) { c.generator.max_ratio = parse_double(v); }},
      {"generator.eps", [](auto& c, auto& v) { c.generator.eps = parse_double(v); }},
      {"generator.i", [](auto& c, auto& v) { c.generator.i = to_size(v); }},
      {"generator.j", [](auto& c, auto& v) { c.generator.j = to_size(v); }},
      {"generator.sign", [](auto& c, auto& v) { c.generator.sign = parse_int<int>(v); }},
      {"generator.path", [](auto& c, auto& v) { c.generator.path = v; }},
      {"pipeline.variant", [](auto& c, auto& v) { c.pipeline.variant = v; }},
      {"pipeline.r", [](auto& c, auto& v) { c.pipeline.r = to_size(v); }},
      {"pipeline.k", [](auto& c, auto& v) { c.pipeline.k = to_size(v); }},
      {"pipeline.l", [](auto& c, auto& v) { c.pipeline.l = to_size(v); }},
      {"pipeline.q", [](auto& c, auto& v) { c.pipeline.q = to_size(v); }},
      {"pipeline.s", [](auto& c, auto& v) { c.pipeline.s = to_size(v); }},
      {"pipeline.loops", [](auto& c, auto& v) { c.pipeline.loops = to_size(v); }},
      {"pipeline.subalg", [](auto& c, auto& v) { c.pipeline.subalg = parse_subalg(v); }},
      {"pipeline.sampler", [](auto& c, auto& v) { c.pipeline.sampler = parse_sampler(v); }},
      {"pipeline.scores", [](auto& c, auto& v) { c.pipeline.scores = parse_scores(v); }},
      {"pipeline.beta", [](auto& c, auto& v) { c.pipeline.beta = parse_double(v); }},
      {"pipeline.beta_bar", [](auto& c, auto& v) { c.pipeline.beta_bar = parse_double(v); }},
      {"pipeline.simple_nucleus", [](auto& c, auto& v) { c.pipeline.simple_nucleus = parse_bool(v); }},
      {"pipeline.svd_mode", [](auto& c, auto& v) { c.pipeline.svd_mode = parse_svd_mode(v); }},
      {"pipeline.max_attempts", [](auto& c, auto& v) { c.pipeline.max_attempts = parse_int<int>(v); }},
      {"preprocess.kind",
       [](auto& c, auto& v) {
         if (v == "none") {
           c.preprocess.reset();
         } else {
           pre(c).kind = parse_multiplier_kind(v);
         }
       }},
      {"preprocess.d", [](auto& c, auto& v) { pre(c).d = to_size(v); }},
      {"preprocess.T", [](auto& c, auto& v) { pre(c).T = to_size(v); }},
      {"preprocess.l", [](auto& c, auto& v) { pre(c).l = to_size(v); }},
      {"preprocess.u", [](auto& c, auto& v) { pre(c).u = to_size(v); }},
      {"preprocess.nonsingular", [](auto& c, auto& v) { pre(c).nonsingular = parse_bool(v); }},
      {"preprocess.pad", [](auto& c, auto& v) { pre(c).pad = parse_pad(v); }},
  };
  return table;
}

void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value, const std::string& path,
               std::size_t line) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ParseError(path + ": unknown field", line);
  try {
    it->second(cfg, value);
  } catch (const ArgumentError& e) {
    throw ParseError(path + ": " + e.what(), line);
  }
}

bool fixed_input(const GeneratorSpec& g) {
  return g.variant == "laplacian" || g.variant == "plus_minus_delta" || g.variant == "from_file";
}

std::pair<std::size_t, std::size_t> dims_of(const AnyMatrix& A) {
  return std::visit([](const auto& M) { return std::pair{M.rows(), M.cols()}; }, A);
}

bool fourier(MultiplierKind k) { return k == MultiplierKind::srft || k == MultiplierKind::arft; }

MultiplierSpec multiplier_spec(const PreprocessConfig& p, std::size_t n) {
  MultiplierSpec s;
  s.kind = p.kind;
  s.n = n;
  s.u = p.u ? p.u : n;
  s.l = p.l;
  s.d = p.d;
  s.T = p.T;
  s.nonsingular = p.nonsingular;
  s.pad = p.pad;
  return s;
}

template <Scalar T>
double relative_spectral(const Matrix<T>& W, const Matrix<T>& approx) {
  const double e = norm(W - approx, NormKind::spectral);
  const double w = norm(W, NormKind::spectral);
  if (w == 0) return e == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return e / w;
}

template <Scalar T>
void run_on(const ExperimentConfig& cfg, const Matrix<T>& W, Rng& rng, TrialResult& out) {
  const std::string& v = cfg.pipeline.variant;
  PipelineSpec p = cfg.pipeline;
  if (v == "multiplier_pinv" || v == "gaussian_sampling") {
    p.variant = "primitive";  // resolve() only reads the sizes
    p.resolve(W.rows(), W.cols());
    EntrySource<T> src(W);
    Rng alg = rng.split(2);
    if (v == "multiplier_pinv") {
      PreprocessConfig pc = cfg.preprocess.value_or(PreprocessConfig{MultiplierKind::arht});
      MultiplierCurOptions o;
      o.k = cfg.pipeline.k;
      o.l = cfg.pipeline.l;
      o.leverage.max_attempts = p.max_attempts;
      o.leverage.subalg = p.subalg;
      const auto sc = cur_with_multiplier_and_pinv(src, p.r, multiplier_spec(pc, 0), alg, o);
      out.error = relative_spectral(W, sc.reconstruct());
    } else {
      GaussianSamplingOptions o;
      if (cfg.preprocess) o.multiplier = multiplier_spec(*cfg.preprocess, W.cols());
      o.subalg = p.subalg == SubAlg::dmm08 ? SubAlg::qr : p.subalg;
      o.max_attempts = p.max_attempts;
      const auto cur = cur_with_gaussian_sampling(src, p.r, p.k, p.l, p.s, alg, o);
      out.error = relative_spectral(W, reconstruct(cur, W));
    }
    out.touched = src.touched();
    out.dense_touched = src.dense_touched();
    return;
  }
  if (cfg.preprocess) {
    Rng mult = rng.split(3);
    const auto H = build_multiplier<T>(multiplier_spec(*cfg.preprocess, W.cols()), mult);
    const Matrix<T> S = H.right_multiply(W);
    EntrySource<T> src(S);
    Rng alg = rng.split(2);
    const auto cur = run_pipeline(p, src, alg);
    out.touched = src.touched();
    out.dense_touched = src.dense_touched();
    out.error = relative_spectral(S, reconstruct(cur, S));
    out.error_original = relative_spectral(W, back_map(S, cur, H).reconstruct());
    return;
  }
  EntrySource<T> src(W);
  Rng alg = rng.split(2);
  const auto cur = run_pipeline(p, src, alg);
  out.touched = src.touched();
  out.dense_touched = src.dense_touched();
  out.error = relative_spectral(W, reconstruct(cur, W));
}

bool wants_complex(const ExperimentConfig& cfg) { return cfg.preprocess && fourier(cfg.preprocess->kind); }

void run_trial(const ExperimentConfig& cfg, const AnyMatrix* fixed, std::size_t t, TrialResult& out) {
  Rng rng(cfg.seed, t);
  AnyMatrix W;
  if (fixed) {
    W = *fixed;
  } else {
    Rng gen = rng.split(1);
    W = generate(cfg.generator, gen);
  }
  if (wants_complex(cfg) && std::holds_alternative<Mat>(W)) W = to_complex(std::get<Mat>(W));
  std::visit([&](const auto& M) { run_on(cfg, M, rng, out); }, W);
}

double mean_of(const std::vector<double>& x) { return x.empty() ? 0.0 : mean_std(x).mean; }
double std_of(const std::vector<double>& x) { return x.empty() ? 0.0 : mean_std(x).std; }

}  // namespace

void ExperimentConfig::resolve() {
  if (trials < 1) throw ArgumentError("trials: must be >= 1");
  if (m) generator.m = *m;
  if (n) generator.n = *n;
  if (r) {
    generator.r = *r;
    pipeline.r = *r;
  }
  if (k) pipeline.k = *k;
  if (l) pipeline.l = *l;
  if (generator.variant == "laplacian") generator.m = generator.n;
  if (generator.variant != "from_file" && generator.m * generator.n > memory_budget)
    throw ArgumentError("memory_budget: " + std::to_string(generator.m) + " x " + std::to_string(generator.n) +
                        " exceeds " + std::to_string(memory_budget) + " entries");
}

void set_config_field(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  set_field(cfg, key, value, key, 0);
}

std::vector<ExperimentConfig> parse_config(std::istream& in) {
  ExperimentConfig base;
  std::vector<ExperimentConfig> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ParseError("malformed section header '" + line + "'", no);
      out.push_back(base);
      out.back().name = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value', got '" + line + "'", no);
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    ExperimentConfig& target = out.empty() ? base : out.back();
    const std::string path = out.empty() ? key : out.back().name + "." + key;
    set_field(target, key, value, path, no);
  }
  if (out.empty()) out.push_back(base);
  return out;
}

std::vector<ExperimentConfig> load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config '" + path + "'");
  return parse_config(f);
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  auto opt = [&](const char* key, const std::optional<std::size_t>& v) {
    if (v) out << key << " = " << *v << '\n';
  };
  out << std::setprecision(17);
  out << "name = " << c.name << '\n'
      << "trials = " << c.trials << '\n'
      << "seed = " << c.seed << '\n'
      << "memory_budget = " << c.memory_budget << '\n';
  if (!c.report.empty()) out << "report = " << c.report << '\n';
  opt("m", c.m);
  opt("n", c.n);
  opt("r", c.r);
  opt("k", c.k);
  opt("l", c.l);
  const auto& g = c.generator;
  out << "generator.variant = " << g.variant << '\n'
      << "generator.m = " << g.m << '\n'
      << "generator.n = " << g.n << '\n'
      << "generator.r = " << g.r << '\n'
      << "generator.nz = " << g.nz << '\n'
      << "generator.kind = " << to_string(g.kind) << '\n'
      << "generator.sigma = " << g.sigma << '\n'
      << "generator.rho = " << g.rho << '\n'
      << "generator.max_ratio = " << g.max_ratio << '\n'
      << "generator.eps = " << g.eps << '\n'
      << "generator.i = " << g.i << '\n'
      << "generator.j = " << g.j << '\n'
      << "generator.sign = " << g.sign << '\n';
  if (!g.path.empty()) out << "generator.path = " << g.path << '\n';
  const auto& p = c.pipeline;
  out << "pipeline.variant = " << p.variant << '\n'
      << "pipeline.r = " << p.r << '\n'
      << "pipeline.k = " << p.k << '\n'
      << "pipeline.l = " << p.l << '\n'
      << "pipeline.q = " << p.q << '\n'
      << "pipeline.s = " << p.s << '\n'
      << "pipeline.loops = " << p.loops << '\n'
      << "pipeline.subalg = " << to_string(p.subalg) << '\n'
      << "pipeline.sampler = " << to_string(p.sampler) << '\n'
      << "pipeline.scores = " << to_string(p.scores) << '\n'
      << "pipeline.beta = " << p.beta << '\n'
      << "pipeline.beta_bar = " << p.beta_bar << '\n'
      << "pipeline.simple_nucleus = " << (p.simple_nucleus ? "true" : "false") << '\n'
      << "pipeline.svd_mode = " << to_string(p.svd_mode) << '\n'
      << "pipeline.max_attempts = " << p.max_attempts << '\n';
  if (const auto& pp = c.preprocess) {
    out << "preprocess.kind = " << to_string(pp->kind) << '\n'
        << "preprocess.d = " << pp->d << '\n'
        << "preprocess.T = " << pp->T << '\n'
        << "preprocess.l = " << pp->l << '\n'
        << "preprocess.u = " << pp->u << '\n'
        << "preprocess.nonsingular = " << (pp->nonsingular ? "true" : "false") << '\n'
        << "preprocess.pad = " << to_string(pp->pad) << '\n';
  }
}

std::vector<double> ExperimentReport::errors() const {
  std::vector<double> e;
  for (const auto& t : per_trial)
    if (t.ok) e.push_back(t.error);
  return e;
}

std::vector<double> ExperimentReport::errors_original() const {
  std::vector<double> e;
  for (const auto& t : per_trial)
    if (t.ok) e.push_back(t.error_original);
  return e;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.resolve();
  const auto start = std::chrono::steady_clock::now();

  std::optional<AnyMatrix> fixed;
  std::size_t m = cfg.generator.m, n = cfg.generator.n;
  if (fixed_input(cfg.generator)) {
    Rng gen = Rng(cfg.seed).split(1);
    fixed = generate(cfg.generator, gen);
    std::tie(m, n) = dims_of(*fixed);
    if (m * n > cfg.memory_budget) throw ArgumentError("memory_budget: input exceeds the budget");
  }

  ExperimentReport rep;
  rep.name = cfg.name;
  rep.m = m;
  rep.n = n;
  {
    const bool sized = cfg.preprocess && cfg.pipeline.variant != "multiplier_pinv" &&
                       cfg.pipeline.variant != "gaussian_sampling";
    PipelineSpec p = cfg.pipeline;
    p.variant = "primitive";
    // A padded transform widens the processed input; report the sizes the pipeline sees.
    std::size_t cols = n;
    if (sized && cfg.preprocess->kind == MultiplierKind::gaussian && cfg.preprocess->u) cols = cfg.preprocess->u;
    if (sized && cfg.preprocess->l) cols = cfg.preprocess->l;
    p.resolve(m, cols);
    rep.r = p.r;
    rep.k = p.k;
    rep.l = p.l;
  }
  rep.trials = cfg.trials;
  rep.back_mapped = cfg.preprocess && cfg.pipeline.variant != "multiplier_pinv" &&
                    cfg.pipeline.variant != "gaussian_sampling";
  rep.per_trial.resize(cfg.trials);

  std::vector<std::exception_ptr> fatal(cfg.trials);
  const AnyMatrix* fixed_ptr = fixed ? &*fixed : nullptr;
  const long count = static_cast<long>(cfg.trials);
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < count; ++t) {
    auto& res = rep.per_trial[t];
    res.trial = static_cast<std::size_t>(t);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run_trial(cfg, fixed_ptr, res.trial, res);
      res.ok = true;
    } catch (const NumericalFailure& e) {
      res.failure = e.what();
    } catch (const RankMismatch& e) {
      res.failure = e.what();
    } catch (...) {
      fatal[t] = std::current_exception();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  for (const auto& e : fatal)
    if (e) std::rethrow_exception(e);

  for (const auto& t : rep.per_trial) {
    if (!t.ok) ++rep.failures;
    rep.entries_touched = std::max(rep.entries_touched, t.touched + t.dense_touched);
  }
  const auto e = rep.errors();
  rep.mean = mean_of(e);
  rep.std = std_of(e);
  if (rep.back_mapped) {
    const auto eo = rep.errors_original();
    rep.mean_original = mean_of(eo);
    rep.std_original = std_of(eo);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::vector<ExperimentConfig> table1_suite(bool paper_scale, std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> grid = {{256, 8}};
  if (paper_scale) {
    grid.clear();
    for (std::size_t n : {256, 512, 1024})
      for (std::size_t r : {8, 16, 32}) grid.emplace_back(n, r);
  }
  std::vector<ExperimentConfig> out;
  for (const auto& [n, r] : grid) {
    for (int test = 1; test <= 4; ++test) {
      ExperimentConfig c;
      c.name = "tests" + std::to_string(test) + "_n" + std::to_string(n) + "_r" + std::to_string(r);
      c.trials = paper_scale ? 1000 : 100;
      c.seed = seed + 1000 * static_cast<std::uint64_t>(test);
      c.generator.variant = "factor_gaussian";
      c.generator.m = c.generator.n = n;
      c.generator.r = r;
      c.generator.kind = FactorKind::scaled;  // G_1 G_2 + eps G_3
      c.generator.eps = 1e-10;
      c.pipeline.r = r;
      c.pipeline.variant = test == 1 ? "primitive" : test == 2 ? "cross_approx" : test == 3 ? "cynical" : "cynical_ca";
      c.pipeline.loops = 5;
      c.pipeline.q = c.pipeline.s = 4 * r;
      out.push_back(c);
    }
  }
  return out;
}

KsSuiteReport run_ks_suite(std::size_t n, const std::vector<std::size_t>& T_list, std::size_t trials,
                           std::uint64_t seed, double alpha) {
  if (n < 2 || (n & (n - 1)) != 0) throw ArgumentError("run_ks_suite: n must be a power of two");
  if (trials < 1) throw ArgumentError("run_ks_suite: trials must be >= 1");
  KsSuiteReport rep;
  rep.n = n;
  rep.trials = trials;
  rep.alpha = alpha;
  for (const std::size_t T : T_list) {
    if (T < 1) throw ArgumentError("run_ks_suite: T must be >= 1");
    KsRow row;
    row.T = T;
    row.statistics.assign(trials, 0.0);
    std::vector<char> pass(trials, 0);
    const long count = static_cast<long>(trials);
#pragma omp parallel for schedule(dynamic)
    for (long t = 0; t < count; ++t) {
      Rng rng = Rng(seed, T).split(static_cast<std::uint64_t>(t));
      const auto ks = quasi_gaussian_ks(n, T, rng);
      row.statistics[t] = ks.statistic;
      pass[t] = ks.passes(alpha);
    }
    const auto ms = mean_std(row.statistics);
    row.mean_statistic = ms.mean;
    row.std_statistic = ms.std;
    std::size_t passed = 0;
    for (char c : pass) passed += c;
    row.pass_rate = static_cast<double>(passed) / static_cast<double>(trials);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

NormSuiteReport run_norm_suite(std::size_t trials, std::uint64_t seed, const NormSuiteConfig& config) {
  if (trials < 1) throw ArgumentError("run_norm_suite: trials must be >= 1");
  const auto& c = config;
  if (c.p == c.q || c.q < 2) throw ArgumentError("run_norm_suite: need p != q and q > 1");
  NormSuiteReport rep;
  rep.config = c;
  rep.trials = trials;
  const double p = static_cast<double>(c.p), q = static_cast<double>(c.q);
  rep.bound_norm = std::sqrt(p) + std::sqrt(q);
  rep.bound_pinv_norm = std::numbers::e * std::sqrt(p) / std::abs(p - q);

  std::vector<double> norms(trials), pinvs(trials), nz_pinv(trials);
  std::vector<char> deficient(trials, 0);
  const long count = static_cast<long>(trials);
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < count; ++t) {
    Rng rng(seed, static_cast<std::uint64_t>(t));
    Rng g1 = rng.split(1), g2 = rng.split(2);
    const auto sg = singular_values(gen_gaussian(c.p, c.q, g1));
    norms[t] = sg.front();
    pinvs[t] = 1.0 / sg.back();
    const auto sw = singular_values(gen_nz_gaussian(c.nz_p, c.nz_q, c.nz, g2));
    const std::size_t rank_q = std::min(c.nz_p, c.nz_q);
    if (sw.size() < rank_q || sw[rank_q - 1] <= 1e-13 * sw.front()) {
      deficient[t] = 1;
      nz_pinv[t] = std::numeric_limits<double>::infinity();
    } else {
      nz_pinv[t] = 1.0 / sw[rank_q - 1];
    }
  }
  rep.mean_norm = mean_std(norms).mean;
  rep.mean_pinv_norm = mean_std(pinvs).mean;
  for (char d : deficient) rep.nz_rank_deficient += d;
  const double nq = static_cast<double>(std::min(c.nz_p, c.nz_q));
  for (const double x : c.x) {
    TailRow row;
    row.x = x;
    std::size_t hits = 0;
    for (double v : nz_pinv) hits += v >= 1.0 / x;
    row.frequency = static_cast<double>(hits) / static_cast<double>(trials);
    row.bound = std::sqrt(2 * nq / std::numbers::pi) * x;
    rep.tails.push_back(row);
  }
  return rep;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "table") return ReportFormat::table;
  throw ArgumentError("format: expected csv or table, got '" + s + "'");
}

std::vector<ReportRow> report_rows(const std::vector<ExperimentReport>& reports) {
  std::vector<ReportRow> rows;
  for (const auto& r : reports) {
    ReportRow row{r.name, r.m, r.n, r.r, r.k, r.l, r.trials, r.mean, r.std, r.failures, r.entries_touched, r.seconds};
    rows.push_back(row);
    if (r.back_mapped) {
      row.experiment = r.name + "/original";
      row.mean = r.mean_original;
      row.std = r.std_original;
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

std::string secs(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

void write_table(std::ostream& out, const std::vector<std::string>& head,
                 const std::vector<std::vector<std::string>>& body) {
  std::vector<std::size_t> w(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    w[c] = head[c].size();
    for (const auto& row : body) w[c] = std::max(w[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out << (c ? "  " : "");
      if (c == 0)
        out << std::left << std::setw(static_cast<int>(w[c])) << cells[c];
      else
        out << std::right << std::setw(static_cast<int>(w[c])) << cells[c];
    }
    out << '\n';
  };
  line(head);
  std::size_t total = 0;
  for (auto x : w) total += x;
  out << std::string(total + 2 * (w.size() - 1), '-') << '\n';
  for (const auto& row : body) line(row);
}

}  // namespace

void report_write(const std::vector<ExperimentReport>& reports, std::ostream& out, ReportFormat format) {
  const auto rows = report_rows(reports);
  if (format == ReportFormat::csv) {
    out << kReportHeader << '\n';
    for (const auto& r : rows) {
      out << csv_field(r.experiment) << ',' << r.m << ',' << r.n << ',' << r.r << ',' << r.k << ',' << r.l << ','
          << r.trials << ',' << num(r.mean) << ',' << num(r.std) << ',' << r.failures << ',' << r.entries_touched
          << ',' << secs(r.seconds) << '\n';
    }
    return;
  }
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    body.push_back({r.experiment, std::to_string(r.m), std::to_string(r.n), std::to_string(r.r), std::to_string(r.k),
                    std::to_string(r.l), std::to_string(r.trials), short_num(r.mean), short_num(r.std),
                    std::to_string(r.failures), std::to_string(r.entries_touched), secs(r.seconds)});
  }
  write_table(out,
              {"experiment", "m", "n", "r", "k", "l", "trials", "mean", "std", "failures", "entries_touched",
               "seconds"},
              body);
}

void report_write(const std::vector<ExperimentReport>& reports, const std::string& path, ReportFormat format) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open report '" + path + "' for writing");
  report_write(reports, f, format);
  f.flush();
  if (!f) throw IoError("write failed for report '" + path + "'");
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kReportHeader) throw ParseError("report: missing header", 1);
  std::vector<ReportRow> rows;
  std::size_t no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 12) throw ParseError("report: expected 12 fields", no);
    try {
      ReportRow r;
      r.experiment = f[0];
      r.m = to_size(f[1]);
      r.n = to_size(f[2]);
      r.r = to_size(f[3]);
      r.k = to_size(f[4]);
      r.l = to_size(f[5]);
      r.trials = to_size(f[6]);
      r.mean = parse_double(f[7]);
      r.std = parse_double(f[8]);
      r.failures = to_size(f[9]);
      r.entries_touched = to_size(f[10]);
      r.seconds = parse_double(f[11]);
      rows.push_back(r);
    } catch (const ArgumentError& e) {
      throw ParseError(std::string("report: ") + e.what(), no);
    }
  }
  return rows;
}

void ks_write(const KsSuiteReport& rep, std::ostream& out, ReportFormat format) {
  if (format == ReportFormat::csv) {
    out << "n,T,trials,mean_statistic,std_statistic,pass_rate\n";
    for (const auto& r : rep.rows)
      out << rep.n << ',' << r.T << ',' << rep.trials << ',' << num(r.mean_statistic) << ',' << num(r.std_statistic)
          << ',' << num(r.pass_rate) << '\n';
    return;
  }
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rep.rows)
    body.push_back({std::to_string(rep.n), std::to_string(r.T), std::to_string(rep.trials),
                    short_num(r.mean_statistic), short_num(r.std_statistic), secs(r.pass_rate)});
  write_table(out, {"n", "T", "trials", "mean_statistic", "std_statistic", "pass_rate"}, body);
}

void norms_write(const NormSuiteReport& rep, std::ostream& out, ReportFormat format) {
  const auto& c = rep.config;
  std::vector<std::vector<std::string>> body;
  const std::string pq = std::to_string(c.p) + "x" + std::to_string(c.q);
  const std::string nz = std::to_string(c.nz_p) + "x" + std::to_string(c.nz_q) + "/nz" + std::to_string(c.nz);
  body.push_back({"gaussian_norm", pq, "", num(rep.mean_norm), num(rep.bound_norm)});
  body.push_back({"gaussian_pinv_norm", pq, "", num(rep.mean_pinv_norm), num(rep.bound_pinv_norm)});
  for (const auto& t : rep.tails) body.push_back({"nz_pinv_tail", nz, num(t.x), num(t.frequency), num(t.bound)});
  if (format == ReportFormat::csv) {
    out << "quantity,shape,x,empirical,bound\n";
    for (const auto& row : body) out << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << ',' << row[4] << '\n';
    return;
  }
  for (auto& row : body) {
    row[3] = short_num(std::stod(row[3]));
    row[4] = short_num(std::stod(row[4]));
  }
  write_table(out, {"quantity", "shape", "x", "empirical", "bound"}, body);
}

}  // namespace curlra
