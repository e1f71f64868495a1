#ifndef PAUC_METRICS_HPP
#define PAUC_METRICS_HPP

#include <span>
#include <utility>
#include <vector>

namespace pauc {

struct ScorePair {
  std::vector<double> pos;  // f(x_i+), length m
  std::vector<double> neg;  // f(x_j-), length n
};

// False-positive-rate window [alpha, beta], 0 <= alpha < beta <= 1.
struct PaucRange {
  double alpha = 0.0;
  double beta = 1.0;

  void validate() const;           // throws DegenerateRangeError
  int j_alpha(int n) const;        // ceil(n*alpha)
  int j_beta(int n) const;         // floor(n*beta)
  // Loss/credit carried by the negative ranked j (descending score,
  // 1-based): the overlap of the FPR step [j-1, j] with [n*alpha, n*beta].
  // Sums to n*(beta-alpha) over j = 1..n, which keeps the windowed loss in
  // [0, 1] even when ceil(n*alpha) > floor(n*beta).
  std::vector<double> window_coefficients(int n) const;
  double normalizer(int m, int n) const {  // m*n*(beta-alpha)
    return static_cast<double>(m) * static_cast<double>(n) * (beta - alpha);
  }
  // Smallest n for which the window spans at least one full negative rank.
  int min_negatives() const;
};

// Row/column sums of an ordering matrix plus its windowed loss. Entry (i,j)
// of the matrix is 1 when positive i is ranked below negative j, so
// r_pos[i] counts negatives above positive i and r_neg[j] counts positives
// below negative j. These sums are all the structured solver ever reads.
struct OrderingSummary {
  std::vector<int> r_pos;
  std::vector<int> r_neg;
  double in_window_loss = 0.0;
};

// ROC staircase swept over the union of scores, fpr ascending. Ties at a
// threshold move fpr and tpr together.
std::vector<std::pair<double, double>> roc_points(const ScorePair& sp);

// Fraction of correctly ordered positive-negative pairs; ties count 0.
double auc(const ScorePair& sp);

// Normalized partial AUC over [alpha, beta]; equals auc() at [0, 1].
double pauc(const ScorePair& sp, const PaucRange& range);

// Windowed ordering loss. ranked_rows[i][j-1] holds the matrix entry of
// positive i against the negative ranked j (descending score, ties by
// ascending index), for j = 1..n; only ranks with nonzero coefficient are
// read. Returns a value in [0, 1].
double pauc_loss(const std::vector<std::vector<char>>& ranked_rows,
                 const PaucRange& range);

struct PaucReport {
  double pauc = 0.0;
  double one_minus_pauc = 0.0;
};

// Both orientations of the score, for miss-rate style tables.
PaucReport pauc_complement_report(const ScorePair& sp, const PaucRange& range);

}  // namespace pauc

#endif  // PAUC_METRICS_HPP
