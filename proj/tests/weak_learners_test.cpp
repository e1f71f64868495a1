#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "pauc/errors.hpp"
#include "pauc/random.hpp"
#include "pauc/weak_learners.hpp"

using namespace pauc;

namespace {

// Values and weights on a dyadic grid keep both search paths exact, so the
// oracle comparison can demand equality.
Dataset random_dyadic_dataset(Rng& rng, int m, int n, int d) {
  std::vector<std::vector<double>> pos, neg;
  auto draw = [&] {
    std::vector<double> x(d);
    for (int f = 0; f < d; ++f)
      x[f] = static_cast<double>(static_cast<int>(rng.below(129)) - 64) / 64.0;
    return x;
  };
  for (int i = 0; i < m; ++i) pos.push_back(draw());
  for (int j = 0; j < n; ++j) neg.push_back(draw());
  return Dataset(std::move(pos), std::move(neg));
}

SampleWeights random_dyadic_weights(Rng& rng, int count) {
  SampleWeights u(count);
  for (double& w : u)
    w = static_cast<double>(rng.below(256) + 1) / 256.0;
  return u;
}

}  // namespace

TEST_CASE("predict_weak conventions") {
  const WeakLearner stump = Stump{0, 0.0, +1};
  CHECK(predict_weak(stump, std::vector{1.0, 9.0}) == +1);
  CHECK(predict_weak(stump, std::vector{0.0, 9.0}) == -1);  // sign(0) = -1
  CHECK(predict_weak(Stump{0, 0.0, -1}, std::vector{0.0}) == +1);

  const WeakLearner constant = LinearWeak{{0.0, 0.0}, -1.0};
  CHECK(predict_weak(constant, std::vector{42.0, -42.0}) == -1);
  CHECK(predict_weak(LinearWeak{{1.0}, 0.0}, std::vector{0.0}) == -1);

  CHECK_THROWS_AS(predict_weak(Stump{3, 0.0, +1}, std::vector{1.0}),
                  DimensionError);
  CHECK_THROWS_AS(predict_weak(LinearWeak{{1.0, 2.0}, 0.0}, std::vector{1.0}),
                  DimensionError);
}

TEST_CASE("best_stump on separable data") {
  const Dataset ds({{2.0}, {3.0}}, {{0.0}, {1.0}});
  SampleWeights u(4, 0.25);
  const auto r = best_stump(ds, u);
  CHECK(r.edge == doctest::Approx(1.0));  // zero weighted error
  for (int l = 0; l < ds.size(); ++l) {
    const int pred = predict_weak(r.stump, ds.row(l));
    CHECK(pred == ds.label(l));
  }
}

TEST_CASE("label negation flips polarity only") {
  Rng rng(5);
  const Dataset ds = random_dyadic_dataset(rng, 6, 6, 2);
  const SampleWeights u = random_dyadic_weights(rng, ds.size());

  // negating labels = swapping the classes with weights carried along
  std::vector<std::vector<double>> pos, neg;
  for (int l = 0; l < ds.size(); ++l)
    (ds.label(l) > 0 ? neg : pos).push_back(ds.row(l));
  const Dataset flipped(std::move(pos), std::move(neg));
  SampleWeights uf(ds.size());
  for (int j = 0; j < 6; ++j) uf[j] = u[6 + j];
  for (int i = 0; i < 6; ++i) uf[6 + i] = u[i];

  const auto a = best_stump(ds, u);
  const auto b = best_stump(flipped, uf);
  CHECK(a.edge == b.edge);
  CHECK(a.stump.feature == b.stump.feature);
  CHECK(a.stump.threshold == b.stump.threshold);
  CHECK(a.stump.polarity == -b.stump.polarity);
}

TEST_CASE("best_stump matches exhaustive enumeration") {
  Rng rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + static_cast<int>(rng.below(4));
    const int n = 2 + static_cast<int>(rng.below(4));
    const int d = 1 + static_cast<int>(rng.below(3));
    const Dataset ds = random_dyadic_dataset(rng, m, n, d);
    const SampleWeights u = random_dyadic_weights(rng, ds.size());

    const auto got = best_stump(ds, u);
    const auto want = oracles::best_stump_bruteforce(ds, u);
    CHECK(got.edge == want.edge);
    CHECK(got.stump.feature == want.feature);
    CHECK(got.stump.threshold == want.threshold);
    CHECK(got.stump.polarity == want.polarity);
    CHECK(got.edge >= 0.0);  // negation closure

    // edge/error identity under normalized weights
    SampleWeights norm = u;
    double total = 0.0;
    for (double w : norm) total += w;
    for (double& w : norm) w /= total;
    double err = 0.0;
    for (int l = 0; l < ds.size(); ++l)
      if (predict_weak(got.stump, ds.row(l)) != ds.label(l)) err += norm[l];
    CHECK(got.edge / total == doctest::Approx(1.0 - 2.0 * err).epsilon(1e-12));
  }
}

TEST_CASE("best_stump rejects zero weights") {
  const Dataset ds({{1.0}}, {{0.0}});
  CHECK_THROWS_AS(best_stump(ds, SampleWeights(2, 0.0)), InvalidArgument);
  CHECK_THROWS_AS(best_stump(ds, SampleWeights(3, 1.0)), DimensionError);
}

TEST_CASE("wlda direction on spherical classes") {
  // symmetric square around each mean keeps the pooled covariance a
  // multiple of the identity, so the direction must align with the
  // mean difference
  std::vector<std::vector<double>> pos, neg;
  const std::vector<std::pair<double, double>> box{
      {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  for (auto [dx, dy] : box) {
    pos.push_back({3.0 + dx, 1.0 + dy});
    neg.push_back({-1.0 + dx, -2.0 + dy});
  }
  const Dataset ds(std::move(pos), std::move(neg));
  const LinearWeak lw = train_wlda(ds, SampleWeights(8, 0.125));

  const double diff_x = 4.0, diff_y = 3.0;  // mu+ - mu-
  const double cross =
      lw.direction[0] * diff_y - lw.direction[1] * diff_x;
  const double scale = std::hypot(lw.direction[0], lw.direction[1]) *
                       std::hypot(diff_x, diff_y);
  CHECK(std::abs(cross) / scale <= 1e-8);
  CHECK(lw.direction[0] > 0.0);  // points toward the positive class

  // the box data is separable along that direction
  for (int l = 0; l < ds.size(); ++l)
    CHECK(predict_weak(WeakLearner{lw}, ds.row(l)) == ds.label(l));
}

TEST_CASE("wlda is invariant to weight scale") {
  Rng rng(21);
  const Dataset ds = random_dyadic_dataset(rng, 10, 12, 3);
  SampleWeights u = random_dyadic_weights(rng, ds.size());
  const LinearWeak a = train_wlda(ds, u);
  for (double& w : u) w *= 2.0;
  const LinearWeak b = train_wlda(ds, u);
  CHECK(a.direction == b.direction);
  CHECK(a.offset == b.offset);
}

TEST_CASE("wlda beats the best stump on correlated gaussians") {
  Rng rng(33);
  std::vector<std::vector<double>> pos, neg;
  for (int i = 0; i < 150; ++i) {
    const double base = rng.normal();
    pos.push_back({base + 0.9, 0.8 * base + 0.4 * rng.normal() + 0.9});
    const double nb = rng.normal();
    neg.push_back({nb, 0.8 * nb + 0.4 * rng.normal()});
  }
  const Dataset ds(std::move(pos), std::move(neg));
  const SampleWeights u(ds.size(), 1.0 / ds.size());

  const LinearWeak lw = train_wlda(ds, u);
  const auto stump = best_stump(ds, u);
  auto weighted_error = [&](const WeakLearner& learner) {
    double err = 0.0;
    for (int l = 0; l < ds.size(); ++l)
      if (predict_weak(learner, ds.row(l)) != ds.label(l)) err += u[l];
    return err;
  };
  CHECK(weighted_error(lw) <= weighted_error(stump.stump));
}

TEST_CASE("wlda needs weight in both classes") {
  const Dataset ds({{1.0}, {2.0}}, {{0.0}});
  SampleWeights u{1.0, 1.0, 0.0};
  CHECK_THROWS_AS(train_wlda(ds, u), InvalidArgument);
}

TEST_CASE("weak predictions are strictly binary") {
  Rng rng(45);
  const Dataset ds = random_dyadic_dataset(rng, 8, 8, 2);
  const SampleWeights u(16, 1.0 / 16);
  const auto stump = best_stump(ds, u).stump;
  const LinearWeak lw = train_wlda(ds, u);
  for (int l = 0; l < ds.size(); ++l) {
    const auto x = ds.row(l);
    const int ps = predict_weak(WeakLearner{stump}, x);
    const int pl = predict_weak(WeakLearner{lw}, x);
    CHECK((ps == 1 || ps == -1));
    CHECK((pl == 1 || pl == -1));
  }
}
