#include "pauc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pauc/errors.hpp"

namespace pauc {

namespace {

void check_finite(const ScorePair& sp) {
  for (double v : sp.pos)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite positive score");
  for (double v : sp.neg)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite negative score");
}

// Negative scores sorted descending; equal scores keep ascending sample
// index. This is the one ranking rule shared with the structured solver.
std::vector<double> ranked_neg_scores(const std::vector<double>& neg) {
  std::vector<double> t(neg);
  std::sort(t.begin(), t.end(), std::greater<double>());
  return t;
}

}  // namespace

void PaucRange::validate() const {
  if (!(alpha >= 0.0) || !(beta <= 1.0) || !(alpha < beta))
    throw DegenerateRangeError("FPR range must satisfy 0 <= alpha < beta <= 1, got [" +
                               std::to_string(alpha) + ", " +
                               std::to_string(beta) + "]");
}

int PaucRange::j_alpha(int n) const {
  return static_cast<int>(std::ceil(n * alpha));
}

int PaucRange::j_beta(int n) const {
  return static_cast<int>(std::floor(n * beta));
}

std::vector<double> PaucRange::window_coefficients(int n) const {
  validate();
  if (n < 1) throw InvalidArgument("need at least one negative");
  const double lo = n * alpha;
  const double hi = n * beta;
  std::vector<double> kappa(n, 0.0);
  for (int j = 1; j <= n; ++j) {
    const double c = std::min<double>(j, hi) - std::max<double>(j - 1, lo);
    if (c > 0.0) kappa[j - 1] = c;
  }
  return kappa;
}

int PaucRange::min_negatives() const {
  validate();
  return static_cast<int>(std::ceil(1.0 / (beta - alpha)));
}

std::vector<std::pair<double, double>> roc_points(const ScorePair& sp) {
  check_finite(sp);
  const int m = static_cast<int>(sp.pos.size());
  const int n = static_cast<int>(sp.neg.size());
  if (m < 1 || n < 1) throw InvalidArgument("scores for both classes required");

  std::vector<double> pos(sp.pos), neg(sp.neg);
  std::sort(pos.begin(), pos.end(), std::greater<double>());
  std::sort(neg.begin(), neg.end(), std::greater<double>());

  std::vector<double> thresholds;
  thresholds.reserve(m + n);
  std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(),
             std::back_inserter(thresholds), std::greater<double>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<std::pair<double, double>> pts;
  pts.emplace_back(0.0, 0.0);
  std::size_t ip = 0, in = 0;
  for (double th : thresholds) {
    while (ip < pos.size() && pos[ip] > th) ++ip;
    while (in < neg.size() && neg[in] > th) ++in;
    pts.emplace_back(static_cast<double>(in) / n, static_cast<double>(ip) / m);
  }
  pts.emplace_back(1.0, 1.0);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double auc(const ScorePair& sp) {
  check_finite(sp);
  const int m = static_cast<int>(sp.pos.size());
  const int n = static_cast<int>(sp.neg.size());
  if (m < 1 || n < 1) throw InvalidArgument("scores for both classes required");

  // Count correctly ordered pairs against the sorted negatives.
  std::vector<double> t = ranked_neg_scores(sp.neg);
  long long correct = 0;
  for (double s : sp.pos) {
    // number of negatives with score strictly below s
    auto it = std::upper_bound(t.begin(), t.end(), s, std::greater<double>());
    correct += static_cast<long long>(t.end() - it);
  }
  return static_cast<double>(correct) /
         (static_cast<double>(m) * static_cast<double>(n));
}

double pauc(const ScorePair& sp, const PaucRange& range) {
  check_finite(sp);
  const int m = static_cast<int>(sp.pos.size());
  const int n = static_cast<int>(sp.neg.size());
  if (m < 1 || n < 1) throw InvalidArgument("scores for both classes required");

  const std::vector<double> kappa = range.window_coefficients(n);
  // Credit for beating the negative ranked j is the kappa tail from j.
  std::vector<double> tail(n + 1, 0.0);
  for (int j = n; j >= 1; --j) tail[j - 1] = tail[j] + kappa[j - 1];

  const std::vector<double> t = ranked_neg_scores(sp.neg);
  double total = 0.0;
  for (double s : sp.pos) {
    // negatives scoring >= s outrank the positive (strict '>' credit)
    const auto it =
        std::upper_bound(t.begin(), t.end(), s, std::greater<double>());
    total += tail[it - t.begin()];
  }
  return total / range.normalizer(m, n);
}

double pauc_loss(const std::vector<std::vector<char>>& ranked_rows,
                 const PaucRange& range) {
  const int m = static_cast<int>(ranked_rows.size());
  if (m < 1) throw InvalidArgument("need at least one positive row");
  const int n = static_cast<int>(ranked_rows.front().size());

  const std::vector<double> kappa = range.window_coefficients(n);
  double total = 0.0;
  for (const auto& row : ranked_rows) {
    if (static_cast<int>(row.size()) != n)
      throw DimensionError("ordering rows must share one length");
    for (int j = 0; j < n; ++j)
      if (row[j]) total += kappa[j];
  }
  return total / range.normalizer(m, n);
}

PaucReport pauc_complement_report(const ScorePair& sp,
                                  const PaucRange& range) {
  const double p = pauc(sp, range);
  return {p, 1.0 - p};
}

}  // namespace pauc
