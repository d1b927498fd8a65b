#pragma once

#include <cstddef>
#include <vector>

namespace curlra {

double normal_cdf(double x);

// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

struct KsResult {
  double statistic = 0;  // sup |F_n - Phi|
  double p_value = 1;    // asymptotic, from sqrt(n) * statistic
  std::size_t n = 0;
  bool passes(double alpha) const { return p_value > alpha; }
};

// One-sample test of the data against N(0, 1).
KsResult ks_test_normal(std::vector<double> x);

// In place: subtract the mean and divide by the (population) standard deviation.
void standardize(std::vector<double>& x);

struct MeanStd {
  double mean = 0, std = 0;  // std with the n - 1 denominator, 0 for n < 2
};
MeanStd mean_std(const std::vector<double>& x);

}  // namespace curlra
