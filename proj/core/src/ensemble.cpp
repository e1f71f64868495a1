#include "pauc/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pauc/errors.hpp"
#include "pauc/struct_svm.hpp"

namespace pauc {

namespace {

constexpr double kNodeAlpha = 0.49;
constexpr double kNodeBeta = 0.51;
constexpr double kStagnationEdge = 1e-12;

std::vector<signed char> response_row(const WeakLearner& learner,
                                      const Dataset& ds) {
  std::vector<signed char> row(ds.size());
  if (const auto* s = std::get_if<Stump>(&learner)) {
    if (s->feature < 0 || s->feature >= ds.dim())
      throw DimensionError("stump feature index out of range");
    const auto col = ds.column(s->feature);
    for (int l = 0; l < ds.size(); ++l) {
      const int raw = col[l] > s->threshold ? +1 : -1;
      row[l] = static_cast<signed char>(s->polarity > 0 ? raw : -raw);
    }
    return row;
  }
  std::vector<double> x(ds.dim());
  for (int l = 0; l < ds.size(); ++l) {
    for (int f = 0; f < ds.dim(); ++f) x[f] = ds.value(l, f);
    row[l] = static_cast<signed char>(predict_weak(learner, x));
  }
  return row;
}

WeakLearner pick_weak(const Dataset& ds, const SampleWeights& u,
                      WeakKind kind, double& edge_out) {
  if (kind == WeakKind::kStump) {
    auto r = best_stump(ds, u);
    edge_out = r.edge;
    return r.stump;
  }
  LinearWeak lw = train_wlda(ds, u);
  edge_out = weak_edge(lw, ds, u);
  return lw;
}

SampleWeights initial_weights(const Dataset& ds) {
  SampleWeights u(ds.size());
  const double wp = 0.5 / ds.num_pos();
  const double wn = 0.5 / ds.num_neg();
  for (int l = 0; l < ds.size(); ++l) u[l] = ds.label(l) > 0 ? wp : wn;
  return u;
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

}  // namespace

void TrainConfig::validate() const {
  if (t_max < 1) throw InvalidArgument("t_max must be at least 1");
  if (!(nu > 0.0)) throw InvalidArgument("nu must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  PaucRange{alpha, beta}.validate();
}

double score(const EnsembleModel& model, std::span<const double> x) {
  if (model.feature_dim > 0 &&
      static_cast<int>(x.size()) != model.feature_dim)
    throw DimensionError("input dimension does not match model");
  double s = 0.0;
  for (int t = 0; t < model.k(); ++t)
    s += model.coefficients[t] * predict_weak(model.learners[t], x);
  return s;
}

bool passes_exits(const EnsembleModel& model, std::span<const double> x) {
  if (model.exits.empty()) return true;
  double s = 0.0;
  int t = 0;
  for (const auto& exit : model.exits) {
    for (; t < exit.learner_count; ++t)
      s += model.coefficients[t] * predict_weak(model.learners[t], x);
    if (s < exit.threshold) return false;
  }
  return true;
}

ScorePair score_dataset(const EnsembleModel& model, const Dataset& ds) {
  if (model.feature_dim > 0 && ds.dim() != model.feature_dim)
    throw DimensionError("dataset dimension does not match model");
  ScorePair sp;
  sp.pos.assign(ds.num_pos(), 0.0);
  sp.neg.assign(ds.num_neg(), 0.0);
  for (int t = 0; t < model.k(); ++t) {
    const double wt = model.coefficients[t];
    const auto row = response_row(model.learners[t], ds);
    for (int i = 0; i < ds.num_pos(); ++i) sp.pos[i] += wt * row[i];
    for (int j = 0; j < ds.num_neg(); ++j)
      sp.neg[j] += wt * row[ds.num_pos() + j];
  }
  return sp;
}

EnsembleModel train_paucens(const Dataset& ds, const TrainConfig& config,
                            const RoundCallback& on_round) {
  config.validate();
  const PaucRange range{config.alpha, config.beta};
  if (ds.num_neg() < range.min_negatives())
    throw DegenerateRangeError(
        "range [" + std::to_string(config.alpha) + ", " +
        std::to_string(config.beta) + "] needs at least " +
        std::to_string(range.min_negatives()) + " negatives for training, got " +
        std::to_string(ds.num_neg()));

  EnsembleModel model;
  model.alpha = config.alpha;
  model.beta = config.beta;
  model.trainer = TrainerTag::kPaucEns;
  model.feature_dim = ds.dim();

  ResponseMatrix H;
  H.num_pos = ds.num_pos();
  H.num_neg = ds.num_neg();

  SolverState state;
  state.range = range;
  state.nu = config.nu;
  state.epsilon = config.epsilon;

  SampleWeights u = initial_weights(ds);
  double prev_edge = 0.0;
  for (int t = 0; t < config.t_max; ++t) {
    double edge = 0.0;
    WeakLearner learner = pick_weak(ds, u, config.weak_kind, edge);
    if (t > 0 && edge <= kStagnationEdge && prev_edge <= kStagnationEdge &&
        learner == model.learners.back()) {
      std::cerr << "pauc: stopping at round " << t
                << ": weak learner search stagnated (zero edge twice)\n";
      break;
    }
    prev_edge = edge;

    H.append_row(response_row(learner, ds));
    model.learners.push_back(std::move(learner));

    if (!config.warm_start) {
      state = SolverState{};
      state.range = range;
      state.nu = config.nu;
      state.epsilon = config.epsilon;
    }
    cutting_plane_solve(H, state);
    model.coefficients = state.w;

    SampleWeights refreshed = sample_weights_from_duals(state);
    const bool all_zero =
        std::all_of(refreshed.begin(), refreshed.end(),
                    [](double v) { return v == 0.0; });
    if (!refreshed.empty() && !all_zero) u = std::move(refreshed);

    if (on_round)
      on_round({t + 1, edge, state.xi,
                static_cast<int>(state.working_set.size())},
               model);
  }
  return model;
}

EnsembleModel train_adaboost(const Dataset& ds, int rounds, WeakKind weak_kind,
                             const RoundCallback& on_round) {
  if (rounds < 1) throw InvalidArgument("rounds must be at least 1");

  EnsembleModel model;
  model.trainer = TrainerTag::kAdaBoost;
  model.feature_dim = ds.dim();

  SampleWeights u = initial_weights(ds);
  for (int t = 0; t < rounds; ++t) {
    double edge = 0.0;
    WeakLearner learner = pick_weak(ds, u, weak_kind, edge);
    const auto row = response_row(learner, ds);

    double err = 0.0, total = 0.0;
    for (int l = 0; l < ds.size(); ++l) {
      total += u[l];
      if (row[l] != ds.label(l)) err += u[l];
    }
    err /= total;
    err = std::clamp(err, 1e-12, 1.0 - 1e-12);
    const double wt = 0.5 * std::log((1.0 - err) / err);

    double z = 0.0;
    for (int l = 0; l < ds.size(); ++l) {
      u[l] *= std::exp(-wt * ds.label(l) * row[l]);
      z += u[l];
    }
    for (double& v : u) v /= z;

    model.learners.push_back(std::move(learner));
    model.coefficients.push_back(wt);
    if (on_round) on_round({t + 1, edge, 0.0, 0}, model);
  }
  return model;
}

double calibrate_threshold(const EnsembleModel& model,
                           const Dataset& validation,
                           double target_detection_rate) {
  if (!(target_detection_rate > 0.0))
    throw InvalidArgument("target detection rate must be positive");
  if (target_detection_rate > 1.0)
    throw InvalidArgument("target detection rate above 1 is unreachable");
  if (validation.num_pos() < 1)
    throw EmptyClassError("calibration needs at least one positive");

  std::vector<double> pos = score_dataset(model, validation).pos;
  std::sort(pos.begin(), pos.end(), std::greater<double>());
  const int p = static_cast<int>(pos.size());
  int need = static_cast<int>(std::ceil(target_detection_rate * p - 1e-9));
  need = std::clamp(need, 1, p);
  return pos[need - 1];  // need-th largest score
}

EnsembleModel attach_exits(const EnsembleModel& model,
                           std::span<const int> exit_counts,
                           const Dataset& validation,
                           double target_detection_rate) {
  EnsembleModel out = model;
  out.exits.clear();
  int prev = 0;
  for (int c : exit_counts) {
    if (c <= prev || c > model.k())
      throw InvalidArgument("exit counts must be increasing and within the "
                            "learner count");
    prev = c;
    EnsembleModel prefix;
    prefix.learners.assign(model.learners.begin(), model.learners.begin() + c);
    prefix.coefficients.assign(model.coefficients.begin(),
                               model.coefficients.begin() + c);
    prefix.feature_dim = model.feature_dim;
    out.exits.push_back(
        {c, calibrate_threshold(prefix, validation, target_detection_rate)});
  }
  return out;
}

bool cascade_accepts(const CascadeModel& cascade, std::span<const double> x) {
  for (const auto& node : cascade.nodes)
    if (score(node.model, x) < node.threshold) return false;
  return true;
}

CascadeModel train_cascade(const Dataset& train, const Dataset& validation,
                           const CascadeConfig& config) {
  if (config.max_nodes < 1)
    throw InvalidArgument("cascade needs at least one node");

  TrainConfig node_cfg = config.node;
  node_cfg.alpha = kNodeAlpha;
  node_cfg.beta = kNodeBeta;
  node_cfg.validate();
  const int min_neg = PaucRange{kNodeAlpha, kNodeBeta}.min_negatives();

  // surviving sample indices into the two datasets
  std::vector<int> train_neg, val_pos, val_neg;
  for (int l = train.num_pos(); l < train.size(); ++l) train_neg.push_back(l);
  for (int l = 0; l < validation.num_pos(); ++l) val_pos.push_back(l);
  for (int l = validation.num_pos(); l < validation.size(); ++l)
    val_neg.push_back(l);

  std::vector<int> train_pos(train.num_pos());
  for (int l = 0; l < train.num_pos(); ++l) train_pos[l] = l;

  CascadeModel cascade;
  for (int node_index = 0; node_index < config.max_nodes; ++node_index) {
    if (static_cast<int>(train_neg.size()) < min_neg || val_neg.empty())
      break;  // negatives exhausted
    if (val_pos.empty())
      throw Error("cascade node " + std::to_string(node_index) +
                  " cannot reach its detection target: no validation "
                  "positives survive");

    std::vector<int> node_samples = train_pos;
    node_samples.insert(node_samples.end(), train_neg.begin(),
                        train_neg.end());
    const Dataset node_train = train.subset(node_samples);

    std::vector<int> val_samples = val_pos;
    val_samples.insert(val_samples.end(), val_neg.begin(), val_neg.end());
    const Dataset node_val = validation.subset(val_samples);

    EnsembleModel model = train_paucens(node_train, node_cfg);
    const double b =
        calibrate_threshold(model, node_val, config.target_detection_rate);
    cascade.nodes.push_back({std::move(model), b});
    const auto& trained = cascade.nodes.back().model;

    auto keep_if_accepted = [&](const Dataset& ds, std::vector<int>& alive) {
      std::vector<int> kept;
      std::vector<double> x(ds.dim());
      for (int l : alive) {
        for (int f = 0; f < ds.dim(); ++f) x[f] = ds.value(l, f);
        if (score(trained, x) >= b) kept.push_back(l);
      }
      alive = std::move(kept);
    };
    keep_if_accepted(train, train_neg);
    keep_if_accepted(validation, val_pos);
    keep_if_accepted(validation, val_neg);
  }
  return cascade;
}

std::string model_to_string(const EnsembleModel& model) {
  if (model.learners.size() != model.coefficients.size())
    throw InvalidArgument("learner and coefficient counts differ");
  std::string out = "pauc-model 1\n";
  out += "trainer ";
  out += model.trainer == TrainerTag::kPaucEns ? "paucens" : "adaboost";
  out += "\nrange ";
  append_double(out, model.alpha);
  out += ' ';
  append_double(out, model.beta);
  out += "\ndim " + std::to_string(model.feature_dim);
  out += "\nlearners " + std::to_string(model.k()) + "\n";
  for (const auto& learner : model.learners) {
    if (const auto* s = std::get_if<Stump>(&learner)) {
      out += "stump " + std::to_string(s->feature) + ' ';
      append_double(out, s->threshold);
      out += s->polarity > 0 ? " 1\n" : " -1\n";
    } else {
      const auto& lin = std::get<LinearWeak>(learner);
      out += "linear ";
      append_double(out, lin.offset);
      for (double v : lin.direction) {
        out += ' ';
        append_double(out, v);
      }
      out += '\n';
    }
  }
  out += "coeffs";
  for (double w : model.coefficients) {
    out += ' ';
    append_double(out, w);
  }
  out += "\nexits " + std::to_string(model.exits.size()) + "\n";
  for (const auto& exit : model.exits) {
    out += "exit " + std::to_string(exit.learner_count) + ' ';
    append_double(out, exit.threshold);
    out += '\n';
  }
  out += "end\n";
  return out;
}

namespace {

class ModelReader {
 public:
  explicit ModelReader(const std::string& text) : in_(text) {}

  std::vector<std::string> next_line(const char* section) {
    std::string line;
    while (std::getline(in_, line)) {
      std::istringstream ls(line);
      std::vector<std::string> toks;
      std::string tok;
      while (ls >> tok) toks.push_back(tok);
      if (!toks.empty()) return toks;
    }
    throw ModelFormatError("model file ends early", section);
  }

  static double to_double(const std::string& tok, const char* section) {
    std::string_view t(tok);
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
      throw ModelFormatError("bad numeric field '" + tok + "'", section);
    return v;
  }

  static long to_long(const std::string& tok, const char* section) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw ModelFormatError("bad integer field '" + tok + "'", section);
    return v;
  }

 private:
  std::istringstream in_;
};

}  // namespace

EnsembleModel model_from_string(const std::string& text) {
  ModelReader reader(text);

  auto header = reader.next_line("header");
  if (header.size() != 2 || header[0] != "pauc-model")
    throw ModelFormatError("not a pauc model file", "header");
  if (header[1] != "1")
    throw ModelFormatError("unsupported model version " + header[1], "header");

  EnsembleModel model;
  auto trainer = reader.next_line("trainer");
  if (trainer.size() != 2 || trainer[0] != "trainer" ||
      (trainer[1] != "paucens" && trainer[1] != "adaboost"))
    throw ModelFormatError("expected trainer line", "trainer");
  model.trainer = trainer[1] == "paucens" ? TrainerTag::kPaucEns
                                          : TrainerTag::kAdaBoost;

  auto range = reader.next_line("range");
  if (range.size() != 3 || range[0] != "range")
    throw ModelFormatError("expected range line", "range");
  model.alpha = ModelReader::to_double(range[1], "range");
  model.beta = ModelReader::to_double(range[2], "range");

  auto dim = reader.next_line("dim");
  if (dim.size() != 2 || dim[0] != "dim")
    throw ModelFormatError("expected dim line", "dim");
  model.feature_dim = static_cast<int>(ModelReader::to_long(dim[1], "dim"));

  auto count = reader.next_line("learners");
  if (count.size() != 2 || count[0] != "learners")
    throw ModelFormatError("expected learners line", "learners");
  const long k = ModelReader::to_long(count[1], "learners");
  if (k < 0) throw ModelFormatError("negative learner count", "learners");

  for (long t = 0; t < k; ++t) {
    auto toks = reader.next_line("learners");
    if (toks[0] == "stump") {
      if (toks.size() != 4)
        throw ModelFormatError("stump record needs 3 fields", "learners");
      Stump s;
      s.feature = static_cast<int>(ModelReader::to_long(toks[1], "learners"));
      s.threshold = ModelReader::to_double(toks[2], "learners");
      const long pol = ModelReader::to_long(toks[3], "learners");
      if (pol != 1 && pol != -1)
        throw ModelFormatError("stump polarity must be 1 or -1", "learners");
      s.polarity = static_cast<int>(pol);
      model.learners.push_back(s);
    } else if (toks[0] == "linear") {
      if (toks.size() < 2)
        throw ModelFormatError("linear record needs an offset", "learners");
      LinearWeak lin;
      lin.offset = ModelReader::to_double(toks[1], "learners");
      for (std::size_t f = 2; f < toks.size(); ++f)
        lin.direction.push_back(ModelReader::to_double(toks[f], "learners"));
      model.learners.push_back(std::move(lin));
    } else {
      throw ModelFormatError("unknown learner kind '" + toks[0] + "'",
                             "learners");
    }
  }

  auto coeffs = reader.next_line("coeffs");
  if (coeffs[0] != "coeffs" ||
      static_cast<long>(coeffs.size()) != k + 1)
    throw ModelFormatError("expected " + std::to_string(k) + " coefficients",
                           "coeffs");
  for (long t = 1; t <= k; ++t)
    model.coefficients.push_back(
        ModelReader::to_double(coeffs[t], "coeffs"));

  auto exits = reader.next_line("exits");
  if (exits.size() != 2 || exits[0] != "exits")
    throw ModelFormatError("expected exits line", "exits");
  const long ne = ModelReader::to_long(exits[1], "exits");
  int prev = 0;
  for (long e = 0; e < ne; ++e) {
    auto toks = reader.next_line("exits");
    if (toks.size() != 3 || toks[0] != "exit")
      throw ModelFormatError("expected exit record", "exits");
    ExitPoint exit;
    exit.learner_count =
        static_cast<int>(ModelReader::to_long(toks[1], "exits"));
    exit.threshold = ModelReader::to_double(toks[2], "exits");
    if (exit.learner_count <= prev || exit.learner_count > k)
      throw ModelFormatError("exit counts must be increasing and <= k",
                             "exits");
    prev = exit.learner_count;
    model.exits.push_back(exit);
  }

  auto end = reader.next_line("end");
  if (end.size() != 1 || end[0] != "end")
    throw ModelFormatError("expected end marker", "end");
  return model;
}

void save_model(const EnsembleModel& model, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write model file: " + path);
  f << model_to_string(model);
}

EnsembleModel load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open model file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return model_from_string(buf.str());
}

}  // namespace pauc
