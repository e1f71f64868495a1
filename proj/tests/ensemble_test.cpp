#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pauc/ensemble.hpp"
#include "pauc/errors.hpp"
#include "pauc/metrics.hpp"
#include "pauc/random.hpp"
#include "pauc/struct_svm.hpp"

using namespace pauc;

namespace {

Dataset separable_2d(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> pos, neg;
  for (int i = 0; i < per_class; ++i)
    pos.push_back({1.5 + rng.uniform(), rng.normal()});
  for (int j = 0; j < per_class; ++j)
    neg.push_back({-1.5 - rng.uniform(), rng.normal()});
  return Dataset(std::move(pos), std::move(neg));
}

double training_pauc(const EnsembleModel& model, const Dataset& ds,
                     const PaucRange& range) {
  return pauc(score_dataset(model, ds), range);
}

}  // namespace

TEST_CASE("score basics") {
  EnsembleModel empty;
  CHECK(score(empty, std::vector<double>{}) == 0.0);

  EnsembleModel one;
  one.learners.push_back(Stump{0, 0.0, +1});
  one.coefficients.push_back(2.0);
  one.feature_dim = 1;
  CHECK(score(one, std::vector{1.0}) == 2.0);
  CHECK(score(one, std::vector{-1.0}) == -2.0);
  CHECK_THROWS_AS(score(one, std::vector{1.0, 2.0}), DimensionError);
}

TEST_CASE("score matches an independent accumulation") {
  Rng rng(3);
  EnsembleModel model;
  model.feature_dim = 3;
  for (int t = 0; t < 12; ++t) {
    model.learners.push_back(
        Stump{static_cast<int>(rng.below(3)), rng.uniform() - 0.5,
              rng.below(2) ? +1 : -1});
    model.coefficients.push_back(rng.normal());
  }
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
    double reverse = 0.0;
    for (int t = model.k() - 1; t >= 0; --t)
      reverse += model.coefficients[t] * predict_weak(model.learners[t], x);
    CHECK(score(model, x) == doctest::Approx(reverse).epsilon(1e-12));
  }
}

TEST_CASE("train_paucens on separable data reaches perfect training pauc") {
  const Dataset ds = separable_2d(250, 1);
  TrainConfig cfg;
  cfg.t_max = 10;
  cfg.nu = 1.0;
  cfg.alpha = 0.0;
  cfg.beta = 0.2;
  const EnsembleModel model = train_paucens(ds, cfg);
  CHECK(training_pauc(model, ds, {0.0, 0.2}) == 1.0);
  CHECK(model.trainer == TrainerTag::kPaucEns);
  CHECK(model.k() >= 1);
  CHECK(model.k() == static_cast<int>(model.coefficients.size()));
}

TEST_CASE("train_paucens single round equals the closed-form solve") {
  const Dataset ds = separable_2d(20, 2);
  TrainConfig cfg;
  cfg.t_max = 1;
  cfg.nu = 0.8;
  cfg.alpha = 0.0;
  cfg.beta = 0.5;
  const EnsembleModel model = train_paucens(ds, cfg);
  REQUIRE(model.k() == 1);

  // rebuild the solver path by hand: the single learner's responses, its
  // most violated ordering at w = 0, and the 1-D closed form
  ResponseMatrix H;
  H.num_pos = ds.num_pos();
  H.num_neg = ds.num_neg();
  std::vector<signed char> row(ds.size());
  for (int l = 0; l < ds.size(); ++l)
    row[l] = static_cast<signed char>(
        predict_weak(model.learners[0], ds.row(l)));
  H.append_row(std::move(row));
  const auto mv = most_violated(H, std::vector<double>{0.0}, {0.0, 0.5});
  double norm2 = 0.0;
  for (double v : mv.record.phi_delta) norm2 += v * v;
  const double lambda =
      norm2 > 0.0 ? std::min(cfg.nu, mv.record.summary.in_window_loss / norm2)
                  : cfg.nu;
  CHECK(model.coefficients[0] ==
        doctest::Approx(lambda * mv.record.phi_delta[0]).epsilon(1e-9));
}

TEST_CASE("train_paucens training pauc is non-decreasing on separable data") {
  const Dataset ds = separable_2d(100, 3);
  TrainConfig cfg;
  cfg.t_max = 8;
  cfg.alpha = 0.0;
  cfg.beta = 0.3;
  std::vector<double> trace;
  train_paucens(ds, cfg, [&](const RoundStats&, const EnsembleModel& m) {
    trace.push_back(training_pauc(m, ds, {0.0, 0.3}));
  });
  REQUIRE(!trace.empty());
  for (std::size_t t = 1; t < trace.size(); ++t)
    CHECK(trace[t] >= trace[t - 1] - 1e-9);
}

TEST_CASE("train_paucens is deterministic") {
  const ToySpec spec{80, 80, 0.5, ToyPattern::kRing, 11};
  const Dataset ds = gen_toy(spec);
  TrainConfig cfg;
  cfg.t_max = 6;
  cfg.alpha = 0.0;
  cfg.beta = 0.25;
  const std::string a = model_to_string(train_paucens(ds, cfg));
  const std::string b = model_to_string(train_paucens(ds, cfg));
  CHECK(a == b);
}

TEST_CASE("fresh-start mode agrees with warm start on the training metric") {
  const ToySpec spec{60, 60, 0.6, ToyPattern::kTwoGaussian, 4};
  const Dataset ds = gen_toy(spec);
  TrainConfig cfg;
  cfg.t_max = 5;
  cfg.alpha = 0.0;
  cfg.beta = 0.4;
  const EnsembleModel warm = train_paucens(ds, cfg);
  cfg.warm_start = false;
  const EnsembleModel fresh = train_paucens(ds, cfg);
  const double pw = training_pauc(warm, ds, {0.0, 0.4});
  const double pf = training_pauc(fresh, ds, {0.0, 0.4});
  CHECK(std::abs(pw - pf) <= 5e-2);  // same objective up to solver epsilon
}

TEST_CASE("train_paucens rejects a window too narrow for the negatives") {
  const Dataset ds = separable_2d(20, 5);  // n = 20 < 50
  TrainConfig cfg;
  cfg.alpha = 0.49;
  cfg.beta = 0.51;
  CHECK_THROWS_AS(train_paucens(ds, cfg), DegenerateRangeError);
}

TEST_CASE("adaboost") {
  SUBCASE("coefficient formula") {
    // one round on a crafted set whose best stump errs on exactly one of
    // four equally weighted samples: eps = 0.25, w = 0.5*ln(3)
    const Dataset ds({{1.0}, {2.0}, {-3.0}}, {{-1.0}});
    const EnsembleModel model = train_adaboost(ds, 1);
    CHECK(model.coefficients[0] ==
          doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-9));
    CHECK(model.coefficients[0] == doctest::Approx(0.549306).epsilon(1e-6));
  }
  SUBCASE("weights stay normalized and errors stay below one half") {
    const ToySpec spec{60, 60, 0.8, ToyPattern::kRing, 17};
    const Dataset ds = gen_toy(spec);
    // recheck the invariants by reproducing the weight updates
    SampleWeights u(ds.size());
    for (int l = 0; l < ds.size(); ++l)
      u[l] = ds.label(l) > 0 ? 0.5 / ds.num_pos() : 0.5 / ds.num_neg();
    const EnsembleModel model = train_adaboost(ds, 10);
    for (int t = 0; t < model.k(); ++t) {
      double err = 0.0, total = 0.0;
      for (int l = 0; l < ds.size(); ++l) {
        total += u[l];
        if (predict_weak(model.learners[t], ds.row(l)) != ds.label(l))
          err += u[l];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      err /= total;
      CHECK(err <= 0.5 + 1e-12);
      const double wt = model.coefficients[t];
      double z = 0.0;
      for (int l = 0; l < ds.size(); ++l) {
        u[l] *= std::exp(-wt * ds.label(l) *
                         predict_weak(model.learners[t], ds.row(l)));
        z += u[l];
      }
      for (double& v : u) v /= z;
    }
  }
  SUBCASE("separable data is fit within three rounds") {
    const Dataset ds({{1.0}, {2.0}, {3.0}}, {{-1.0}, {-2.0}});
    const EnsembleModel model = train_adaboost(ds, 3);
    int errors = 0;
    for (int l = 0; l < ds.size(); ++l)
      if ((score(model, ds.row(l)) > 0.0 ? +1 : -1) != ds.label(l)) ++errors;
    CHECK(errors == 0);
  }
}

TEST_CASE("threshold calibration") {
  EnsembleModel identity;  // score = x[0] via two half-weight stumps
  identity.feature_dim = 1;
  identity.learners.push_back(Stump{0, -100.0, +1});
  identity.coefficients.push_back(1.0);

  // ten positives scoring -1 or +1 cannot express much; use a richer model:
  // calibrate on raw scores by constructing a dataset whose single feature
  // IS the score of a one-stump model... simpler: craft scores via stumps
  // at distinct thresholds
  EnsembleModel staircase;
  staircase.feature_dim = 1;
  for (int t = 0; t < 10; ++t) {
    staircase.learners.push_back(Stump{0, t + 0.5, +1});
    staircase.coefficients.push_back(1.0);
  }
  // positive k has feature k+1 => score = (#stumps below) - (#stumps above)
  std::vector<std::vector<double>> pos, neg;
  for (int i = 1; i <= 10; ++i) pos.push_back({static_cast<double>(i)});
  neg.push_back({0.0});
  const Dataset val(std::move(pos), std::move(neg));

  const auto scores = score_dataset(staircase, val).pos;
  std::vector<double> sorted(scores);
  std::sort(sorted.begin(), sorted.end());

  SUBCASE("full detection pins the minimum score") {
    CHECK(calibrate_threshold(staircase, val, 1.0) == sorted.front());
  }
  SUBCASE("0.9 target lands on the second-smallest score") {
    CHECK(calibrate_threshold(staircase, val, 0.9) == sorted[1]);
    // verified by direct counting
    const double b = calibrate_threshold(staircase, val, 0.9);
    int detected = 0;
    for (double s : scores)
      if (s >= b) ++detected;
    CHECK(detected >= 9);
    for (double s : scores)
      if (s > b) {
        int above = 0;
        for (double s2 : scores)
          if (s2 >= s) ++above;
        CHECK(above < 9);  // any larger b loses the target
        break;
      }
  }
  SUBCASE("degenerate targets error out") {
    CHECK_THROWS_AS(calibrate_threshold(staircase, val, 0.0), InvalidArgument);
    CHECK_THROWS_AS(calibrate_threshold(staircase, val, 1.5), InvalidArgument);
  }
}

TEST_CASE("exits") {
  const Dataset train = separable_2d(120, 7);
  const Dataset val = separable_2d(80, 8);
  TrainConfig cfg;
  cfg.t_max = 24;
  cfg.alpha = 0.0;
  cfg.beta = 0.5;
  const EnsembleModel model = train_paucens(train, cfg);
  REQUIRE(model.k() >= 20);

  SUBCASE("single exit at k equals whole-model calibration") {
    const std::vector<int> counts{model.k()};
    const EnsembleModel with =
        attach_exits(model, counts, val, 0.99);
    REQUIRE(with.exits.size() == 1);
    CHECK(with.exits[0].threshold == calibrate_threshold(model, val, 0.99));
  }
  SUBCASE("per-prefix detection rates meet the target") {
    const std::vector<int> counts{10, 20};
    const EnsembleModel with = attach_exits(model, counts, val, 0.99);
    for (const auto& exit : with.exits) {
      EnsembleModel prefix;
      prefix.feature_dim = model.feature_dim;
      prefix.learners.assign(model.learners.begin(),
                             model.learners.begin() + exit.learner_count);
      prefix.coefficients.assign(
          model.coefficients.begin(),
          model.coefficients.begin() + exit.learner_count);
      const auto scores = score_dataset(prefix, val).pos;
      int detected = 0;
      for (double s : scores)
        if (s >= exit.threshold) ++detected;
      CHECK(static_cast<double>(detected) / scores.size() >= 0.99);
    }
  }
  SUBCASE("exit pruning equals full evaluation on accepted samples") {
    const std::vector<int> counts{10, 20};
    const EnsembleModel with = attach_exits(model, counts, val, 0.99);
    for (int l = 0; l < val.size(); ++l) {
      const auto x = val.row(l);
      if (passes_exits(with, x)) {
        CHECK(score(with, x) == score(model, x));
      } else {
        // rejected iff some prefix score fell below its threshold
        bool below = false;
        double s = 0.0;
        int t = 0;
        for (const auto& exit : with.exits) {
          for (; t < exit.learner_count; ++t)
            s += with.coefficients[t] * predict_weak(with.learners[t], x);
          if (s < exit.threshold) {
            below = true;
            break;
          }
        }
        CHECK(below);
      }
    }
  }
  SUBCASE("invalid exit schedules are rejected") {
    const std::vector<int> bad{20, 10};
    CHECK_THROWS_AS(attach_exits(model, bad, val, 0.99), InvalidArgument);
    const std::vector<int> toobig{model.k() + 1};
    CHECK_THROWS_AS(attach_exits(model, toobig, val, 0.99), InvalidArgument);
  }
}

TEST_CASE("cascade") {
  SUBCASE("trivially separable negatives collapse to one node") {
    const Dataset train = separable_2d(300, 9);
    const Dataset val = separable_2d(200, 10);
    CascadeConfig cfg;
    cfg.max_nodes = 5;
    cfg.node.t_max = 5;
    const CascadeModel cascade = train_cascade(train, val, cfg);
    CHECK(cascade.nodes.size() == 1);
    for (int l = 0; l < train.size(); ++l) {
      const bool accepted = cascade_accepts(cascade, train.row(l));
      CHECK(accepted == (train.label(l) > 0));
    }
  }
  SUBCASE("acceptance is the conjunction of node decisions") {
    const ToySpec spec{400, 1200, 0.39, ToyPattern::kTwoGaussian, 21};
    const Dataset ds = gen_toy(spec);
    const ToySpec vspec{300, 900, 0.39, ToyPattern::kTwoGaussian, 22};
    const Dataset val = gen_toy(vspec);
    CascadeConfig cfg;
    cfg.max_nodes = 3;
    cfg.node.t_max = 4;
    const CascadeModel cascade = train_cascade(ds, val, cfg);
    REQUIRE(cascade.nodes.size() >= 2);
    for (int l = 0; l < val.size(); l += 7) {
      const auto x = val.row(l);
      bool all = true;
      for (const auto& node : cascade.nodes)
        all = all && score(node.model, x) >= node.threshold;
      CHECK(cascade_accepts(cascade, x) == all);
    }
  }
}

TEST_CASE("model serialization") {
  Rng rng(31);
  EnsembleModel model;
  model.trainer = TrainerTag::kAdaBoost;
  model.alpha = 0.05;
  model.beta = 0.55;
  model.feature_dim = 3;
  for (int t = 0; t < 5; ++t) {
    if (t % 2 == 0) {
      model.learners.push_back(
          Stump{static_cast<int>(rng.below(3)), rng.normal() * 3.0,
                rng.below(2) ? +1 : -1});
    } else {
      model.learners.push_back(
          LinearWeak{{rng.normal(), rng.normal(), rng.normal()}, rng.normal()});
    }
    model.coefficients.push_back(rng.normal());
  }
  model.exits = {{2, rng.normal()}, {4, rng.normal()}};

  SUBCASE("round trip is field-exact") {
    const std::string text = model_to_string(model);
    const EnsembleModel back = model_from_string(text);
    CHECK(back.trainer == model.trainer);
    CHECK(back.alpha == model.alpha);
    CHECK(back.beta == model.beta);
    CHECK(back.feature_dim == model.feature_dim);
    CHECK(back.coefficients == model.coefficients);
    CHECK(back.learners == model.learners);
    REQUIRE(back.exits.size() == model.exits.size());
    for (std::size_t e = 0; e < model.exits.size(); ++e) {
      CHECK(back.exits[e].learner_count == model.exits[e].learner_count);
      CHECK(back.exits[e].threshold == model.exits[e].threshold);
    }
    CHECK(model_to_string(back) == text);
  }
  SUBCASE("infinite stump thresholds survive the round trip") {
    EnsembleModel constant;
    constant.feature_dim = 1;
    constant.learners.push_back(
        Stump{0, -std::numeric_limits<double>::infinity(), +1});
    constant.coefficients.push_back(1.0);
    const EnsembleModel back = model_from_string(model_to_string(constant));
    CHECK(back.learners == constant.learners);
  }
  SUBCASE("unknown version is refused") {
    std::string text = model_to_string(model);
    text.replace(text.find("pauc-model 1"), 12, "pauc-model 9");
    CHECK_THROWS_AS(model_from_string(text), ModelFormatError);
  }
  SUBCASE("truncation names the missing section") {
    const std::string text = model_to_string(model);
    const std::string cut = text.substr(0, text.find("coeffs"));
    try {
      model_from_string(cut);
      FAIL("expected ModelFormatError");
    } catch (const ModelFormatError& e) {
      CHECK(e.section() == std::string("coeffs"));
    }
  }
  SUBCASE("save and load files") {
    const std::string path = "pauc_test_model.txt";
    save_model(model, path);
    const EnsembleModel back = load_model(path);
    CHECK(model_to_string(back) == model_to_string(model));
    std::remove(path.c_str());
  }
}
