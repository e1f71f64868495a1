#ifndef PAUC_WEAK_LEARNERS_HPP
#define PAUC_WEAK_LEARNERS_HPP

#include <span>
#include <variant>
#include <vector>

#include "pauc/dataset.hpp"

namespace pauc {

// Single-feature threshold classifier. Predicts
// polarity * sign(x[feature] - threshold) with sign(0) = -1, so the
// positive side is strictly above the threshold.
struct Stump {
  int feature = 0;
  double threshold = 0.0;
  int polarity = +1;

  bool operator==(const Stump&) const = default;
};

// Linear halfspace classifier: sign(direction . x + offset), sign(0) = -1.
struct LinearWeak {
  std::vector<double> direction;
  double offset = 0.0;

  bool operator==(const LinearWeak&) const = default;
};

using WeakLearner = std::variant<Stump, LinearWeak>;

// Nonnegative per-sample weights, positives first (length m+n).
using SampleWeights = std::vector<double>;

int predict_weak(const WeakLearner& learner, std::span<const double> x);

struct StumpSearchResult {
  Stump stump;
  double edge = 0.0;  // sum_l u_l y_l h(x_l), >= 0 by negation closure
};

// Exhaustive search over (feature, threshold, polarity); thresholds at
// midpoints of consecutive distinct values plus -inf/+inf sentinels. Ties
// break toward lower feature, lower threshold, polarity +1.
StumpSearchResult best_stump(const Dataset& ds, const SampleWeights& u);

// Weighted LDA direction (ridge-regularized pooled covariance) with the
// offset picked by a 1-D threshold search along the projection.
LinearWeak train_wlda(const Dataset& ds, const SampleWeights& u);

double weak_edge(const WeakLearner& learner, const Dataset& ds,
                 const SampleWeights& u);

}  // namespace pauc

#endif  // PAUC_WEAK_LEARNERS_HPP
