#include "curlra/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "curlra/errors.hpp"

namespace curlra {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_survival(double x) {
  if (x <= 0) return 1.0;
  if (x < 1.0) {
    // Theta-function form, converges fast for small x.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0;
    for (int k = 1; k <= 20; ++k) {
      const double t = double(2 * k - 1);
      s += std::exp(-t * t * pi2 / (8 * x * x));
    }
    return 1.0 - std::sqrt(2 * std::numbers::pi) / x * s;
  }
  double s = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2 * s, 0.0, 1.0);
}

KsResult ks_test_normal(std::vector<double> x) {
  if (x.empty()) throw ArgumentError("ks_test_normal: empty sample");
  std::sort(x.begin(), x.end());
  const double n = double(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = normal_cdf(x[i]);
    d = std::max({d, double(i + 1) / n - F, F - double(i) / n});
  }
  KsResult r;
  r.statistic = d;
  r.n = x.size();
  r.p_value = kolmogorov_survival(std::sqrt(n) * d);
  return r;
}

void standardize(std::vector<double>& x) {
  if (x.empty()) return;
  double mean = 0;
  for (double v : x) mean += v;
  mean /= double(x.size());
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= double(x.size());
  const double sd = std::sqrt(var);
  if (sd == 0) throw NumericalFailure("standardize: constant sample");
  for (double& v : x) v = (v - mean) / sd;
}

MeanStd mean_std(const std::vector<double>& x) {
  MeanStd r;
  if (x.empty()) return r;
  for (double v : x) r.mean += v;
  r.mean /= double(x.size());
  if (x.size() < 2) return r;
  double ss = 0;
  for (double v : x) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / double(x.size() - 1));
  return r;
}

}  // namespace curlra
