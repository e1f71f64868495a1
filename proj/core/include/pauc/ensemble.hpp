#ifndef PAUC_ENSEMBLE_HPP
#define PAUC_ENSEMBLE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pauc/dataset.hpp"
#include "pauc/metrics.hpp"
#include "pauc/weak_learners.hpp"

namespace pauc {

enum class TrainerTag { kPaucEns, kAdaBoost };
enum class WeakKind { kStump, kWlda };

struct ExitPoint {
  int learner_count = 0;
  double threshold = 0.0;
};

struct EnsembleModel {
  std::vector<WeakLearner> learners;
  std::vector<double> coefficients;
  double alpha = 0.0;
  double beta = 1.0;
  std::vector<ExitPoint> exits;  // strictly increasing learner counts
  TrainerTag trainer = TrainerTag::kPaucEns;
  int feature_dim = 0;

  int k() const { return static_cast<int>(learners.size()); }
};

double score(const EnsembleModel& model, std::span<const double> x);
// True when every exit's prefix score clears its threshold (>=).
bool passes_exits(const EnsembleModel& model, std::span<const double> x);
ScorePair score_dataset(const EnsembleModel& model, const Dataset& ds);

struct TrainConfig {
  int t_max = 100;
  double nu = 1.0;
  double alpha = 0.0;
  double beta = 1.0;
  double epsilon = 1e-3;
  WeakKind weak_kind = WeakKind::kStump;
  std::uint64_t seed = 0;
  bool warm_start = true;  // keep the working set across boosting rounds

  void validate() const;
};

struct RoundStats {
  int round = 0;          // 1-based
  double edge = 0.0;      // edge of the weak learner picked this round
  double xi = 0.0;        // slack after the structured solve
  int working_set_size = 0;
};

// Called after each completed round with the model as trained so far.
using RoundCallback =
    std::function<void(const RoundStats&, const EnsembleModel&)>;

// Column-generation trainer directly optimizing pAUC over
// [config.alpha, config.beta]: pick the maximal-edge weak learner under the
// current sample weights, re-solve the structured problem over all
// responses, refresh the weights from the duals, repeat.
EnsembleModel train_paucens(const Dataset& ds, const TrainConfig& config,
                            const RoundCallback& on_round = {});

// Discrete AdaBoost baseline sharing the same weak learner search.
EnsembleModel train_adaboost(const Dataset& ds, int rounds,
                             WeakKind weak_kind = WeakKind::kStump,
                             const RoundCallback& on_round = {});

// Largest b keeping the fraction of validation positives with
// score >= b at or above the target rate.
double calibrate_threshold(const EnsembleModel& model, const Dataset& validation,
                           double target_detection_rate);

// Calibrates one threshold per requested prefix length.
EnsembleModel attach_exits(const EnsembleModel& model,
                           std::span<const int> exit_counts,
                           const Dataset& validation,
                           double target_detection_rate);

struct CascadeNode {
  EnsembleModel model;
  double threshold = 0.0;
};

// Conjunction of nodes; a sample must clear every threshold in order.
struct CascadeModel {
  std::vector<CascadeNode> nodes;
};

bool cascade_accepts(const CascadeModel& cascade, std::span<const double> x);

struct CascadeConfig {
  int max_nodes = 5;
  TrainConfig node;  // alpha/beta are overridden with the node range
  double target_detection_rate = 0.995;
};

// Trains nodes over the FPR window [0.49, 0.51]: each node sees all training
// positives plus the negatives surviving earlier nodes, gets its threshold
// calibrated on the surviving validation samples, and drops the negatives it
// rejects. Stops when negatives run out or max_nodes is reached.
CascadeModel train_cascade(const Dataset& train, const Dataset& validation,
                           const CascadeConfig& config);

// Versioned human-readable model file; numeric fields round-trip bit-exact.
void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

std::string model_to_string(const EnsembleModel& model);
EnsembleModel model_from_string(const std::string& text);

}  // namespace pauc

#endif  // PAUC_ENSEMBLE_HPP
