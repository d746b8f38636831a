#pragma once

#include <vector>

namespace biotac {

/// Regularized incomplete beta function I_x(a, b), evaluated with the
/// Lentz continued fraction, accurate to ~1e-10.
double incomplete_beta(double a, double b, double x);

/// P(T_df <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

/// Mean absolute error over equally shaped matrices, restricted to the
/// given channel subset (column indices).
double mae_subset(const std::vector<std::vector<double>>& y,
                  const std::vector<std::vector<double>>& yhat,
                  const std::vector<int>& subset);

/// Constant per-channel training-mean predictor.
struct NaiveBaseline {
  std::vector<double> channel_means;

  static NaiveBaseline fit(const std::vector<std::vector<double>>& targets);
  std::vector<double> predict() const { return channel_means; }
};

/// Nadeau-Bengio corrected resampled t-test over k paired fold
/// differences: t = dbar / sqrt((1/k + n_test/n_train) * s^2), df = k-1,
/// left-tailed p-value.
struct TTestReport {
  double mean_diff = 0.0;
  double t_statistic = 0.0;
  double df = 0.0;
  double p_value = 0.0;
  int k = 0;
  double n_train = 0.0;
  double n_test = 0.0;
};

TTestReport corrected_ttest(const std::vector<double>& diffs, double n_train,
                            double n_test);

}  // namespace biotac
