#ifndef PAUC_STRUCT_SVM_HPP
#define PAUC_STRUCT_SVM_HPP

#include <span>
#include <vector>

#include "pauc/metrics.hpp"

namespace pauc {

// Outputs of k weak learners on all samples, one row per learner,
// positives first. Entries are strictly -1 or +1.
struct ResponseMatrix {
  int num_pos = 0;
  int num_neg = 0;
  std::vector<std::vector<signed char>> rows;

  int k() const { return static_cast<int>(rows.size()); }
  int size() const { return num_pos + num_neg; }
  void append_row(std::vector<signed char> row);

  // w . column scores split by class.
  void scores(std::span<const double> w, std::vector<double>& pos_out,
              std::vector<double>& neg_out) const;
};

// One working-set constraint: the ordering's row/column sums and loss,
// plus the cached feature-map difference phi(H, correct) - phi(H, pi).
// The cache is recomputable from the summary whenever k grows.
struct ConstraintRecord {
  OrderingSummary summary;
  std::vector<double> phi_delta;
};

// phi_delta from the summary:
//   phi_delta[t] = (sum_i r_pos[i]*h_t(x_i+) - sum_j r_neg[j]*h_t(x_j-))
//                  / (m*n*(beta-alpha)).
std::vector<double> feature_diff(const ResponseMatrix& H,
                                 const OrderingSummary& summary,
                                 const PaucRange& range);

struct ViolationResult {
  ConstraintRecord record;
  double q = 0.0;  // loss minus margin at the maximizing ordering
};

// Most violated constraint over orderings whose negatives follow the
// descending-score order (ties by ascending index). Each positive's optimal
// cutoff is found independently; a monotone-argmax divide and conquer keeps
// the whole search O((m+n) log(m+n)).
ViolationResult most_violated(const ResponseMatrix& H,
                              std::span<const double> w,
                              const PaucRange& range);

// Cutting-plane solver state for one training session.
struct SolverState {
  std::vector<ConstraintRecord> working_set;
  std::vector<double> lambda;  // >= 0, sum <= nu
  std::vector<double> w;       // length k, equals sum lambda * phi_delta
  double xi = 0.0;
  double nu = 1.0;
  double epsilon = 1e-3;
  PaucRange range;
  int num_pos = 0;
  int num_neg = 0;

  // cached Gram matrix of the phi_delta vectors (row-major, p*p), valid
  // for gram_k weak learners
  std::vector<double> gram;
  int gram_k = -1;
};

// Maximizes sum lambda*loss - 0.5*||sum lambda*phi_delta||^2 over
// lambda >= 0, sum lambda <= nu (restricted to the working set), then
// recovers w = sum lambda*phi_delta and xi = max(0, max violation).
// Refreshes stale phi_delta caches first, so it is safe to call after the
// response matrix has grown.
void solve_restricted_qp(SolverState& state, const ResponseMatrix& H);

// Alternates solve_restricted_qp with most_violated until no ordering is
// violated by more than xi + epsilon. State may carry a warm-start working
// set from a previous, smaller response matrix.
void cutting_plane_solve(const ResponseMatrix& H, SolverState& state);

SolverState cutting_plane(const ResponseMatrix& H, const PaucRange& range,
                          double nu, double epsilon);

// Per-sample weights from the dual solution: for positives the
// lambda-weighted count of negatives ranked above, for negatives the
// lambda-weighted count of positives ranked below. All-zero when the
// working set is empty or every lambda is zero.
std::vector<double> sample_weights_from_duals(const SolverState& state);

}  // namespace pauc

#endif  // PAUC_STRUCT_SVM_HPP
