#include "biotac/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace biotac {

namespace {

double betacf(double a, double b, double x) {
  const double kFpMin = 1e-300;
  const double kEps = 1e-14;
  const int kMaxIter = 500;

  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (df <= 0.0) throw std::invalid_argument("student_t_cdf: df must be > 0");
  double x = df / (df + t * t);
  double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
  return t <= 0.0 ? tail : 1.0 - tail;
}

double mae_subset(const std::vector<std::vector<double>>& y,
                  const std::vector<std::vector<double>>& yhat,
                  const std::vector<int>& subset) {
  if (y.size() != yhat.size() || y.empty())
    throw std::invalid_argument("mae: shape mismatch or empty input");
  if (subset.empty()) throw std::invalid_argument("mae: empty channel subset");
  double sum = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    if (y[r].size() != yhat[r].size())
      throw std::invalid_argument("mae: shape mismatch");
    for (int c : subset)
      sum += std::fabs(y[r][static_cast<std::size_t>(c)] -
                       yhat[r][static_cast<std::size_t>(c)]);
  }
  return sum / (static_cast<double>(y.size()) * static_cast<double>(subset.size()));
}

NaiveBaseline NaiveBaseline::fit(const std::vector<std::vector<double>>& targets) {
  if (targets.empty()) throw std::invalid_argument("naive baseline: empty fit data");
  NaiveBaseline nb;
  nb.channel_means.assign(targets[0].size(), 0.0);
  for (const auto& r : targets)
    for (std::size_t i = 0; i < r.size(); ++i) nb.channel_means[i] += r[i];
  for (double& m : nb.channel_means) m /= static_cast<double>(targets.size());
  return nb;
}

TTestReport corrected_ttest(const std::vector<double>& diffs, double n_train,
                            double n_test) {
  int k = static_cast<int>(diffs.size());
  if (k < 2) throw std::invalid_argument("corrected_ttest: need k >= 2 folds");
  if (n_train <= 0.0 || n_test <= 0.0)
    throw std::invalid_argument("corrected_ttest: sample counts must be > 0");

  TTestReport rep;
  rep.k = k;
  rep.n_train = n_train;
  rep.n_test = n_test;
  rep.df = static_cast<double>(k - 1);
  double sum = 0.0;
  for (double d : diffs) sum += d;
  rep.mean_diff = sum / k;
  double ss = 0.0;
  for (double d : diffs) ss += (d - rep.mean_diff) * (d - rep.mean_diff);
  double var = ss / (k - 1);  // unbiased sample variance

  if (var == 0.0) {
    // Degenerate spread: the sign of the mean decides outright.
    rep.t_statistic = rep.mean_diff < 0.0   ? -INFINITY
                      : rep.mean_diff > 0.0 ? INFINITY
                                            : 0.0;
    rep.p_value = rep.mean_diff < 0.0 ? 0.0 : rep.mean_diff > 0.0 ? 1.0 : 0.5;
    return rep;
  }
  double correction = 1.0 / k + n_test / n_train;
  rep.t_statistic = rep.mean_diff / std::sqrt(correction * var);
  rep.p_value = student_t_cdf(rep.t_statistic, rep.df);
  return rep;
}

}  // namespace biotac
