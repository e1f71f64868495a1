#ifndef PAUC_DATASET_HPP
#define PAUC_DATASET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pauc {

// Labeled sample bank, positives first. Features are stored per-feature
// contiguous so threshold searches run as sorted scans; the per-feature
// sort order is computed once at construction. Immutable afterwards and
// safe to read from any number of threads.
class Dataset {
 public:
  Dataset(std::vector<std::vector<double>> positives,
          std::vector<std::vector<double>> negatives,
          std::vector<std::string> ids = {});

  int num_pos() const { return m_; }
  int num_neg() const { return n_; }
  int size() const { return m_ + n_; }
  int dim() const { return d_; }

  // Samples are indexed 0..m-1 (positives) then m..m+n-1 (negatives).
  int label(int sample) const { return sample < m_ ? +1 : -1; }
  double value(int sample, int feature) const {
    return columns_[static_cast<std::size_t>(feature) * (m_ + n_) + sample];
  }
  std::span<const double> column(int feature) const {
    return {columns_.data() + static_cast<std::size_t>(feature) * (m_ + n_),
            static_cast<std::size_t>(m_ + n_)};
  }
  // Sample indices ordered by ascending feature value (ties by index).
  std::span<const std::int32_t> sorted_by_feature(int feature) const {
    return {order_.data() + static_cast<std::size_t>(feature) * (m_ + n_),
            static_cast<std::size_t>(m_ + n_)};
  }
  std::vector<double> row(int sample) const;
  const std::vector<std::string>& ids() const { return ids_; }

  // New dataset holding the given samples (indices into this one).
  Dataset subset(std::span<const int> samples) const;

 private:
  int m_ = 0, n_ = 0, d_ = 0;
  std::vector<double> columns_;       // d blocks of m+n values
  std::vector<std::int32_t> order_;   // d blocks of m+n sample indices
  std::vector<std::string> ids_;
};

enum class DatasetFormat { kDelimited, kSparse };

// Delimited: one sample per line, label first, ',' or whitespace separated,
// '#' starts a comment line. Sparse: "label idx:val ..." with 1-based
// ascending indices; absent entries are zero. Labels are normalized to
// {+1,-1}; 0 counts as -1.
Dataset load_dataset(const std::string& path, DatasetFormat format);
void save_dataset(const Dataset& ds, const std::string& path,
                  DatasetFormat format);

enum class ToyPattern { kRing, kTwoGaussian };

struct ToySpec {
  int n_pos = 0;
  int n_neg = 0;
  double noise_scale = 0.35;
  ToyPattern pattern = ToyPattern::kRing;
  std::uint64_t seed = 0;
};

// Deterministic 2-D synthetic data. "ring": positives on a radius-2 annulus
// concentrated around the four diagonal directions, negatives a central
// Gaussian blob. "two-gaussian": unit-separated overlapping blobs.
Dataset gen_toy(const ToySpec& spec);

// Class-stratified K-fold assignment; a pure function of (seed, K, m, n).
struct CvSplit {
  std::vector<int> fold_of;  // per sample, in [0, k)
  int k = 0;
  std::uint64_t seed = 0;

  std::vector<int> fold_indices(int fold) const;
  std::vector<int> complement_indices(int fold) const;
};

CvSplit make_folds(const Dataset& ds, int k, std::uint64_t seed);

}  // namespace pauc

#endif  // PAUC_DATASET_HPP
