#include "pauc/struct_svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "pauc/errors.hpp"

namespace pauc {

namespace {

constexpr int kMaxCuttingPlaneIters = 1000;
constexpr long kMaxQpIters = 2'000'000;

}  // namespace

void ResponseMatrix::append_row(std::vector<signed char> row) {
  if (static_cast<int>(row.size()) != size())
    throw DimensionError("response row length " + std::to_string(row.size()) +
                         " does not match sample count " +
                         std::to_string(size()));
  for (signed char v : row)
    if (v != 1 && v != -1)
      throw InvalidArgument("response entries must be -1 or +1");
  rows.push_back(std::move(row));
}

void ResponseMatrix::scores(std::span<const double> w,
                            std::vector<double>& pos_out,
                            std::vector<double>& neg_out) const {
  if (static_cast<int>(w.size()) != k())
    throw DimensionError("coefficient vector length does not match k");
  pos_out.assign(num_pos, 0.0);
  neg_out.assign(num_neg, 0.0);
  for (int t = 0; t < k(); ++t) {
    const double wt = w[t];
    if (wt == 0.0) continue;
    const auto& row = rows[t];
    for (int i = 0; i < num_pos; ++i) pos_out[i] += wt * row[i];
    for (int j = 0; j < num_neg; ++j) neg_out[j] += wt * row[num_pos + j];
  }
}

std::vector<double> feature_diff(const ResponseMatrix& H,
                                 const OrderingSummary& summary,
                                 const PaucRange& range) {
  const int m = H.num_pos;
  const int n = H.num_neg;
  if (static_cast<int>(summary.r_pos.size()) != m ||
      static_cast<int>(summary.r_neg.size()) != n)
    throw DimensionError("ordering summary does not match response matrix");

  const double norm = range.normalizer(m, n);
  std::vector<double> out(H.k(), 0.0);
  for (int t = 0; t < H.k(); ++t) {
    const auto& row = H.rows[t];
    // integer-exact accumulation: r counts times +-1 responses
    std::int64_t acc = 0;
    for (int i = 0; i < m; ++i)
      acc += row[i] > 0 ? summary.r_pos[i] : -summary.r_pos[i];
    for (int j = 0; j < n; ++j)
      acc -= row[m + j] > 0 ? summary.r_neg[j] : -summary.r_neg[j];
    out[t] = static_cast<double>(acc) / norm;
  }
  return out;
}

namespace {

// Finds, for every positive, the cutoff c maximizing gain[c] - c*score
// (smallest c on ties). The smallest argmax is nonincreasing in the score,
// which the divide and conquer exploits.
class CutoffSearch {
 public:
  CutoffSearch(const std::vector<double>& gain,
               const std::vector<double>& pos_scores,
               const std::vector<int>& order_by_score)
      : gain_(gain), s_(pos_scores), order_(order_by_score),
        cutoff_(pos_scores.size(), 0) {}

  std::vector<int> run() {
    recurse(0, static_cast<int>(order_.size()), 0,
            static_cast<int>(gain_.size()) - 1);
    return std::move(cutoff_);
  }

 private:
  void recurse(int lo, int hi, int c_lo, int c_hi) {
    if (lo >= hi) return;
    const int mid = lo + (hi - lo) / 2;
    const int i = order_[mid];
    const double s = s_[i];
    int best_c = c_lo;
    double best_v = gain_[c_lo] - static_cast<double>(c_lo) * s;
    for (int c = c_lo + 1; c <= c_hi; ++c) {
      const double v = gain_[c] - static_cast<double>(c) * s;
      if (v > best_v) {
        best_v = v;
        best_c = c;
      }
    }
    cutoff_[i] = best_c;
    recurse(lo, mid, best_c, c_hi);      // lower scores: cutoffs >= best_c
    recurse(mid + 1, hi, c_lo, best_c);  // higher scores: cutoffs <= best_c
  }

  const std::vector<double>& gain_;
  const std::vector<double>& s_;
  const std::vector<int>& order_;
  std::vector<int> cutoff_;
};

}  // namespace

ViolationResult most_violated(const ResponseMatrix& H,
                              std::span<const double> w,
                              const PaucRange& range) {
  range.validate();
  const int m = H.num_pos;
  const int n = H.num_neg;
  if (m < 1 || n < 1)
    throw InvalidArgument("response matrix needs samples of both classes");

  std::vector<double> s, t;
  H.scores(w, s, t);

  // negatives in descending score order, ties by ascending index
  std::vector<int> neg_order(n);
  std::iota(neg_order.begin(), neg_order.end(), 0);
  std::sort(neg_order.begin(), neg_order.end(), [&](int a, int b) {
    return t[a] != t[b] ? t[a] > t[b] : a < b;
  });

  // gain[c]: loss coefficients plus negative-score mass of the top-c prefix
  const std::vector<double> kappa = range.window_coefficients(n);
  std::vector<double> loss_prefix(n + 1, 0.0), gain(n + 1, 0.0);
  for (int c = 1; c <= n; ++c) {
    loss_prefix[c] = loss_prefix[c - 1] + kappa[c - 1];
    gain[c] = gain[c - 1] + kappa[c - 1] + t[neg_order[c - 1]];
  }

  std::vector<int> pos_order(m);
  std::iota(pos_order.begin(), pos_order.end(), 0);
  std::sort(pos_order.begin(), pos_order.end(), [&](int a, int b) {
    return s[a] != s[b] ? s[a] < s[b] : a < b;
  });

  const std::vector<int> cutoff = CutoffSearch(gain, s, pos_order).run();

  ViolationResult out;
  auto& summary = out.record.summary;
  summary.r_pos = cutoff;
  summary.r_neg.assign(n, 0);
  // r_neg via suffix counts of the cutoff histogram
  std::vector<int> at_least(n + 2, 0);
  for (int c : cutoff) ++at_least[c];
  for (int r = n; r >= 1; --r) at_least[r] += at_least[r + 1];
  for (int r = 1; r <= n; ++r) summary.r_neg[neg_order[r - 1]] = at_least[r];

  double q_num = 0.0, loss_num = 0.0;
  for (int i = 0; i < m; ++i) {
    const int c = cutoff[i];
    q_num += gain[c] - static_cast<double>(c) * s[i];
    loss_num += loss_prefix[c];
  }
  const double norm = range.normalizer(m, n);
  summary.in_window_loss = loss_num / norm;
  out.q = q_num / norm;
  out.record.phi_delta = feature_diff(H, summary, range);
  return out;
}

namespace {

double gram_at(const SolverState& st, int a, int b) {
  return st.gram[static_cast<std::size_t>(a) * st.working_set.size() + b];
}

// Rebuilds phi_delta caches and the Gram matrix if the response matrix has
// grown since they were computed.
void refresh_caches(SolverState& st, const ResponseMatrix& H) {
  const int k = H.k();
  const std::size_t p = st.working_set.size();
  bool stale = st.gram_k != k || st.gram.size() != p * p;
  for (auto& rec : st.working_set)
    if (static_cast<int>(rec.phi_delta.size()) != k) {
      rec.phi_delta = feature_diff(H, rec.summary, st.range);
      stale = true;
    }
  if (!stale) return;
  st.gram.assign(p * p, 0.0);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      const auto& fa = st.working_set[a].phi_delta;
      const auto& fb = st.working_set[b].phi_delta;
      double dot = 0.0;
      for (int tt = 0; tt < k; ++tt) dot += fa[tt] * fb[tt];
      st.gram[a * p + b] = dot;
      st.gram[b * p + a] = dot;
    }
  }
  st.gram_k = k;
}

// Appends one constraint, extending the Gram matrix in place.
void add_constraint(SolverState& st, ConstraintRecord rec) {
  const std::size_t p = st.working_set.size();
  std::vector<double> grown((p + 1) * (p + 1), 0.0);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      grown[a * (p + 1) + b] = st.gram[a * p + b];
  for (std::size_t a = 0; a < p; ++a) {
    double dot = 0.0;
    for (std::size_t tt = 0; tt < rec.phi_delta.size(); ++tt)
      dot += rec.phi_delta[tt] * st.working_set[a].phi_delta[tt];
    grown[a * (p + 1) + p] = dot;
    grown[p * (p + 1) + a] = dot;
  }
  double self = 0.0;
  for (double v : rec.phi_delta) self += v * v;
  grown[p * (p + 1) + p] = self;

  st.gram = std::move(grown);
  st.working_set.push_back(std::move(rec));
  st.lambda.push_back(0.0);
}

}  // namespace

void solve_restricted_qp(SolverState& state, const ResponseMatrix& H) {
  if (!(state.nu > 0.0)) throw InvalidArgument("nu must be positive");
  refresh_caches(state, H);

  const int p = static_cast<int>(state.working_set.size());
  const int k = H.k();
  if (p == 0) {
    state.w.assign(k, 0.0);
    state.xi = 0.0;
    state.lambda.clear();
    return;
  }

  state.lambda.resize(p, 0.0);
  std::vector<double> delta(p);
  for (int a = 0; a < p; ++a)
    delta[a] = state.working_set[a].summary.in_window_loss;

  // Pairwise coordinate ascent over the simplex {lambda >= 0,
  // sum lambda <= nu}. The headroom nu - sum(lambda) behaves as one extra
  // coordinate (index p) with zero gradient and a zero Gram row; every
  // iteration moves mass from the lowest-gradient holder to the
  // highest-gradient coordinate.
  double max_diag = 0.0, max_delta = 0.0;
  for (int a = 0; a < p; ++a) {
    max_diag = std::max(max_diag, gram_at(state, a, a));
    max_delta = std::max(max_delta, std::abs(delta[a]));
  }
  const double scale = std::max({1.0, max_diag * state.nu, max_delta});
  const double tol = 1e-12 * scale;
  const double accept_tol = 1e-8 * scale;

  std::vector<double> grad(p);
  double head = 0.0;
  auto refresh_gradient = [&] {
    double sum = 0.0;
    for (double l : state.lambda) sum += l;
    if (sum > state.nu) {  // rescale fp drift back into the simplex
      for (double& l : state.lambda) l *= state.nu / sum;
      sum = state.nu;
    }
    head = state.nu - sum;
    if (head < 0.0) head = 0.0;
    for (int a = 0; a < p; ++a) {
      double g = delta[a];
      for (int b = 0; b < p; ++b)
        if (state.lambda[b] != 0.0) g -= gram_at(state, a, b) * state.lambda[b];
      grad[a] = g;
    }
  };
  auto pick_pair = [&](int& up, int& down) {
    up = p;  // slack, gradient 0
    double g_up = 0.0;
    for (int a = 0; a < p; ++a)
      if (grad[a] > g_up) {
        g_up = grad[a];
        up = a;
      }
    down = head > 0.0 ? p : -1;
    double g_down = 0.0;
    for (int a = 0; a < p; ++a)
      if (state.lambda[a] > 0.0 && (down == -1 || grad[a] < g_down)) {
        g_down = grad[a];
        down = a;
      }
    return g_up - (down == -1 ? 0.0 : g_down);
  };

  long iters = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < 4; ++sweep) {
    refresh_gradient();
    int up, down;
    gap = pick_pair(up, down);
    if (gap <= tol) break;
    while (iters < kMaxQpIters) {
      ++iters;
      gap = pick_pair(up, down);
      if (gap <= tol || down == -1 || up == down) break;
      const double g_ii = up == p ? 0.0 : gram_at(state, up, up);
      const double g_jj = down == p ? 0.0 : gram_at(state, down, down);
      const double g_ij =
          (up == p || down == p) ? 0.0 : gram_at(state, up, down);
      const double curvature = g_ii - 2.0 * g_ij + g_jj;
      const double avail = down == p ? head : state.lambda[down];
      double step = curvature > 0.0 ? gap / curvature : avail;
      step = std::min(step, avail);
      if (!(step > 0.0)) break;
      if (up == p)
        head += step;
      else
        state.lambda[up] += step;
      if (down == p)
        head -= step;
      else
        state.lambda[down] -= step;
      for (int a = 0; a < p; ++a) {
        const double gi = up == p ? 0.0 : gram_at(state, a, up);
        const double gj = down == p ? 0.0 : gram_at(state, a, down);
        grad[a] -= step * (gi - gj);
      }
    }
    if (gap <= tol) break;
  }
  {  // final verdict on a fresh gradient
    refresh_gradient();
    int up, down;
    gap = pick_pair(up, down);
  }
  if (gap > accept_tol)
    throw SolverError("restricted QP did not reach tolerance", gap, iters);

  // primal recovery
  state.w.assign(k, 0.0);
  for (int a = 0; a < p; ++a) {
    const double l = state.lambda[a];
    if (l == 0.0) continue;
    const auto& f = state.working_set[a].phi_delta;
    for (int tt = 0; tt < k; ++tt) state.w[tt] += l * f[tt];
  }
  double worst = 0.0;
  for (int a = 0; a < p; ++a) {
    const auto& f = state.working_set[a].phi_delta;
    double margin = 0.0;
    for (int tt = 0; tt < k; ++tt) margin += state.w[tt] * f[tt];
    worst = std::max(worst, delta[a] - margin);
  }
  state.xi = worst;
}

void cutting_plane_solve(const ResponseMatrix& H, SolverState& state) {
  if (H.k() < 1) throw InvalidArgument("response matrix is empty");
  state.range.validate();
  if (!(state.nu > 0.0)) throw InvalidArgument("nu must be positive");
  if (!(state.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (H.num_neg < state.range.min_negatives())
    throw DegenerateRangeError(
        "training range [" + std::to_string(state.range.alpha) + ", " +
        std::to_string(state.range.beta) + "] needs at least " +
        std::to_string(state.range.min_negatives()) + " negatives, got " +
        std::to_string(H.num_neg));
  state.num_pos = H.num_pos;
  state.num_neg = H.num_neg;

  solve_restricted_qp(state, H);
  double last_gap = 0.0;
  for (int iter = 0; iter < kMaxCuttingPlaneIters; ++iter) {
    ViolationResult mv = most_violated(H, state.w, state.range);
    last_gap = mv.q - state.xi;
    if (mv.q <= state.xi + state.epsilon) return;
    add_constraint(state, std::move(mv.record));
    solve_restricted_qp(state, H);
  }
  throw SolverError("cutting plane exceeded its iteration cap", last_gap,
                    kMaxCuttingPlaneIters);
}

SolverState cutting_plane(const ResponseMatrix& H, const PaucRange& range,
                          double nu, double epsilon) {
  SolverState state;
  state.range = range;
  state.nu = nu;
  state.epsilon = epsilon;
  cutting_plane_solve(H, state);
  return state;
}

std::vector<double> sample_weights_from_duals(const SolverState& state) {
  std::vector<double> u(state.num_pos + state.num_neg, 0.0);
  for (std::size_t a = 0; a < state.working_set.size(); ++a) {
    const double l = state.lambda[a];
    if (l == 0.0) continue;
    const auto& sum = state.working_set[a].summary;
    for (int i = 0; i < state.num_pos; ++i) u[i] += l * sum.r_pos[i];
    for (int j = 0; j < state.num_neg; ++j)
      u[state.num_pos + j] += l * sum.r_neg[j];
  }
  return u;
}

}  // namespace pauc
