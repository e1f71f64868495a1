#include "pauc/weak_learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pauc/errors.hpp"

namespace pauc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_weights(const Dataset& ds, const SampleWeights& u) {
  if (static_cast<int>(u.size()) != ds.size())
    throw DimensionError("weight vector length " + std::to_string(u.size()) +
                         " does not match sample count " +
                         std::to_string(ds.size()));
  double total = 0.0;
  for (double w : u) {
    if (!(w >= 0.0)) throw InvalidArgument("sample weights must be >= 0");
    total += w;
  }
  if (total <= 0.0) throw InvalidArgument("sample weights are all zero");
}

// Midpoint that provably keeps lo on the "<= threshold" side and hi above.
double split_point(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return (mid >= lo && mid < hi) ? mid : lo;
}

struct ScanResult {
  double threshold = -kInf;
  int polarity = +1;
  double edge = -kInf;
};

// One pass over a column in ascending order. Considers the rule
// "+1 iff value > threshold" (and, when both_polarities, its negation) at
// every distinct-value boundary; returns the candidate with the largest
// edge, breaking ties toward lower threshold, then polarity +1.
template <typename ValueAt, typename LabelAt>
ScanResult scan_thresholds(int count, ValueAt value_at, LabelAt label_at,
                           const SampleWeights& u,
                           std::span<const std::int32_t> order,
                           bool both_polarities) {
  double signed_total = 0.0;
  for (int l = 0; l < count; ++l) signed_total += u[l] * label_at(l);

  ScanResult best;
  auto consider = [&](double threshold, double edge_pos) {
    // candidate with polarity +1, then its negation
    for (int polarity : {+1, -1}) {
      if (polarity < 0 && !both_polarities) break;
      const double e = polarity > 0 ? edge_pos : -edge_pos;
      if (e > best.edge ||
          (e == best.edge && (threshold < best.threshold ||
                              (threshold == best.threshold &&
                               polarity > best.polarity)))) {
        best = {threshold, polarity, e};
      }
    }
  };

  consider(-kInf, signed_total);  // everything predicted +1
  double below = 0.0;             // sum of u*y over values <= threshold
  int i = 0;
  while (i < count) {
    const double v = value_at(order[i]);
    do {
      below += u[order[i]] * label_at(order[i]);
      ++i;
    } while (i < count && value_at(order[i]) == v);
    const double edge_pos = signed_total - 2.0 * below;
    if (i < count)
      consider(split_point(v, value_at(order[i])), edge_pos);
    else
      consider(kInf, edge_pos);  // everything predicted -1
  }
  return best;
}

}  // namespace

int predict_weak(const WeakLearner& learner, std::span<const double> x) {
  if (const auto* s = std::get_if<Stump>(&learner)) {
    if (s->feature < 0 || s->feature >= static_cast<int>(x.size()))
      throw DimensionError("stump feature index out of range");
    const int raw = x[s->feature] > s->threshold ? +1 : -1;
    return s->polarity > 0 ? raw : -raw;
  }
  const auto& lin = std::get<LinearWeak>(learner);
  if (lin.direction.size() != x.size())
    throw DimensionError("linear weak learner dimension mismatch");
  // accumulate the projection first so the comparison against -offset is
  // bit-identical with the threshold search that produced it
  double z = 0.0;
  for (std::size_t f = 0; f < x.size(); ++f) z += lin.direction[f] * x[f];
  return z + lin.offset > 0.0 ? +1 : -1;
}

StumpSearchResult best_stump(const Dataset& ds, const SampleWeights& u) {
  check_weights(ds, u);

  StumpSearchResult best;
  best.edge = -kInf;
  for (int f = 0; f < ds.dim(); ++f) {
    const auto col = ds.column(f);
    const auto r = scan_thresholds(
        ds.size(), [&](int l) { return col[l]; },
        [&](int l) { return ds.label(l); }, u, ds.sorted_by_feature(f),
        /*both_polarities=*/true);
    if (r.edge > best.edge) best = {{f, r.threshold, r.polarity}, r.edge};
  }
  return best;
}

LinearWeak train_wlda(const Dataset& ds, const SampleWeights& u) {
  check_weights(ds, u);
  const int d = ds.dim();
  const int m = ds.num_pos();
  const int total = ds.size();

  double wpos = 0.0, wneg = 0.0;
  for (int l = 0; l < total; ++l) (l < m ? wpos : wneg) += u[l];
  if (wpos <= 0.0 || wneg <= 0.0)
    throw InvalidArgument("weighted LDA needs positive weight in both classes");

  std::vector<double> mu_pos(d, 0.0), mu_neg(d, 0.0);
  for (int l = 0; l < total; ++l) {
    auto& mu = l < m ? mu_pos : mu_neg;
    for (int f = 0; f < d; ++f) mu[f] += u[l] * ds.value(l, f);
  }
  for (int f = 0; f < d; ++f) {
    mu_pos[f] /= wpos;
    mu_neg[f] /= wneg;
  }

  // Weight-normalized pooled covariance; scale-free in u.
  const double wsum = wpos + wneg;
  std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<double> centered(d);
  for (int l = 0; l < total; ++l) {
    const auto& mu = l < m ? mu_pos : mu_neg;
    for (int f = 0; f < d; ++f) centered[f] = ds.value(l, f) - mu[f];
    const double w = u[l] / wsum;
    if (w == 0.0) continue;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b)
        cov[static_cast<std::size_t>(a) * d + b] += w * centered[a] * centered[b];
  }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < a; ++b)
      cov[static_cast<std::size_t>(a) * d + b] =
          cov[static_cast<std::size_t>(b) * d + a];

  double trace = 0.0;
  for (int a = 0; a < d; ++a) trace += cov[static_cast<std::size_t>(a) * d + a];
  double ridge = 1e-6 * trace / d;
  if (!(ridge > 0.0)) ridge = 1e-12;

  // Cholesky solve of (cov + ridge I) dir = mu_pos - mu_neg, escalating the
  // ridge if the factorization hits a non-positive pivot.
  std::vector<double> dir(d);
  for (int attempt = 0;; ++attempt) {
    std::vector<double> chol(cov);
    for (int a = 0; a < d; ++a)
      chol[static_cast<std::size_t>(a) * d + a] += ridge;
    bool ok = true;
    for (int a = 0; a < d && ok; ++a) {
      for (int b = 0; b <= a; ++b) {
        double s = chol[static_cast<std::size_t>(a) * d + b];
        for (int k = 0; k < b; ++k)
          s -= chol[static_cast<std::size_t>(a) * d + k] *
               chol[static_cast<std::size_t>(b) * d + k];
        if (a == b) {
          if (!(s > 0.0)) {
            ok = false;
            break;
          }
          chol[static_cast<std::size_t>(a) * d + a] = std::sqrt(s);
        } else {
          chol[static_cast<std::size_t>(a) * d + b] =
              s / chol[static_cast<std::size_t>(b) * d + b];
        }
      }
    }
    if (ok) {
      for (int f = 0; f < d; ++f) dir[f] = mu_pos[f] - mu_neg[f];
      for (int a = 0; a < d; ++a) {  // forward
        for (int k = 0; k < a; ++k)
          dir[a] -= chol[static_cast<std::size_t>(a) * d + k] * dir[k];
        dir[a] /= chol[static_cast<std::size_t>(a) * d + a];
      }
      for (int a = d - 1; a >= 0; --a) {  // backward
        for (int k = a + 1; k < d; ++k)
          dir[a] -= chol[static_cast<std::size_t>(k) * d + a] * dir[k];
        dir[a] /= chol[static_cast<std::size_t>(a) * d + a];
      }
      break;
    }
    if (attempt >= 40)
      throw SolverError("weighted LDA covariance solve failed", ridge, attempt);
    ridge = ridge > 0.0 ? ridge * 10.0 : 1e-12;
  }

  // Offset search along +dir and -dir with the strict ">" rule only; the
  // flipped direction covers the complementary partitions, so sign(0) = -1
  // semantics stay exact on both sides.
  std::vector<double> proj(total, 0.0);
  for (int l = 0; l < total; ++l) {
    double v = 0.0;
    for (int f = 0; f < d; ++f) v += dir[f] * ds.value(l, f);
    proj[l] = v;
  }
  std::vector<double> z(total, 0.0);
  std::vector<std::int32_t> order(total);
  LinearWeak best_learner;
  double best_edge = -kInf;
  for (int side : {+1, -1}) {
    for (int l = 0; l < total; ++l) z[l] = side > 0 ? proj[l] : -proj[l];
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
      return z[a] != z[b] ? z[a] < z[b] : a < b;
    });
    const auto r = scan_thresholds(
        total, [&](int l) { return z[l]; }, [&](int l) { return ds.label(l); },
        u, order, /*both_polarities=*/false);
    if (r.edge > best_edge) {
      best_edge = r.edge;
      best_learner.direction.assign(d, 0.0);
      for (int f = 0; f < d; ++f)
        best_learner.direction[f] = side > 0 ? dir[f] : -dir[f];
      best_learner.offset = -r.threshold;
    }
  }
  return best_learner;
}

double weak_edge(const WeakLearner& learner, const Dataset& ds,
                 const SampleWeights& u) {
  check_weights(ds, u);
  double edge = 0.0;
  std::vector<double> x(ds.dim());
  for (int l = 0; l < ds.size(); ++l) {
    for (int f = 0; f < ds.dim(); ++f) x[f] = ds.value(l, f);
    edge += u[l] * ds.label(l) * predict_weak(learner, x);
  }
  return edge;
}

}  // namespace pauc
