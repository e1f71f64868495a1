#include "pauc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "pauc/errors.hpp"
#include "pauc/random.hpp"

namespace pauc {

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

double parse_double(std::string_view tok, long line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("not a number: '" + std::string(tok) + "'", line);
  return v;
}

int parse_label(std::string_view tok, long line) {
  return parse_double(tok, line) > 0.0 ? +1 : -1;  // 0 counts as negative
}

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() &&
           (line[i] == ' ' || line[i] == '\t' || line[i] == ',' ||
            line[i] == '\r'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
           line[j] != ',' && line[j] != '\r')
      ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace

Dataset::Dataset(std::vector<std::vector<double>> positives,
                 std::vector<std::vector<double>> negatives,
                 std::vector<std::string> ids)
    : ids_(std::move(ids)) {
  m_ = static_cast<int>(positives.size());
  n_ = static_cast<int>(negatives.size());
  if (m_ < 1 || n_ < 1)
    throw EmptyClassError("dataset needs at least one sample of each class");
  d_ = static_cast<int>(positives.front().size());
  if (d_ < 1) throw InvalidArgument("feature dimension must be at least 1");

  const int total = m_ + n_;
  columns_.resize(static_cast<std::size_t>(d_) * total);
  auto place = [&](const std::vector<double>& x, int sample) {
    if (static_cast<int>(x.size()) != d_)
      throw DimensionError("sample has " + std::to_string(x.size()) +
                           " features, expected " + std::to_string(d_));
    for (int f = 0; f < d_; ++f) {
      if (!std::isfinite(x[f]))
        throw InvalidArgument("non-finite feature value in sample " +
                              std::to_string(sample));
      columns_[static_cast<std::size_t>(f) * total + sample] = x[f];
    }
  };
  for (int i = 0; i < m_; ++i) place(positives[i], i);
  for (int j = 0; j < n_; ++j) place(negatives[j], m_ + j);

  order_.resize(static_cast<std::size_t>(d_) * total);
  for (int f = 0; f < d_; ++f) {
    auto* block = order_.data() + static_cast<std::size_t>(f) * total;
    std::iota(block, block + total, 0);
    const double* col = columns_.data() + static_cast<std::size_t>(f) * total;
    std::sort(block, block + total, [col](std::int32_t a, std::int32_t b) {
      return col[a] != col[b] ? col[a] < col[b] : a < b;
    });
  }
}

std::vector<double> Dataset::row(int sample) const {
  std::vector<double> x(d_);
  for (int f = 0; f < d_; ++f) x[f] = value(sample, f);
  return x;
}

Dataset Dataset::subset(std::span<const int> samples) const {
  std::vector<std::vector<double>> pos, neg;
  for (int s : samples) {
    if (s < 0 || s >= size())
      throw InvalidArgument("subset index out of range");
    (label(s) > 0 ? pos : neg).push_back(row(s));
  }
  return Dataset(std::move(pos), std::move(neg));
}

Dataset load_dataset(const std::string& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open dataset file: " + path);

  std::vector<std::vector<double>> pos, neg;
  std::vector<std::pair<int, std::vector<std::pair<int, double>>>> sparse;
  int max_index = 0;
  int ncols = -1;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    std::string_view body(line);
    if (hash != std::string::npos) body = body.substr(0, hash);
    auto toks = tokenize(body);
    if (toks.empty()) continue;

    const int label = parse_label(toks[0], lineno);
    if (format == DatasetFormat::kDelimited) {
      if (static_cast<int>(toks.size()) < 2)
        throw ParseError("sample has no features", lineno);
      if (ncols < 0) ncols = static_cast<int>(toks.size());
      if (static_cast<int>(toks.size()) != ncols)
        throw ParseError("expected " + std::to_string(ncols - 1) +
                             " feature columns, found " +
                             std::to_string(toks.size() - 1),
                         lineno);
      std::vector<double> x(ncols - 1);
      for (int f = 1; f < ncols; ++f) x[f - 1] = parse_double(toks[f], lineno);
      (label > 0 ? pos : neg).push_back(std::move(x));
    } else {
      std::vector<std::pair<int, double>> entries;
      int prev = 0;
      for (std::size_t t = 1; t < toks.size(); ++t) {
        auto colon = toks[t].find(':');
        if (colon == std::string_view::npos)
          throw ParseError("expected idx:val, found '" + std::string(toks[t]) +
                               "'",
                           lineno);
        const double fidx = parse_double(toks[t].substr(0, colon), lineno);
        const int idx = static_cast<int>(fidx);
        if (fidx != idx || idx < 1)
          throw ParseError("feature index must be a positive integer", lineno);
        if (idx <= prev)
          throw ParseError("feature indices must be ascending", lineno);
        prev = idx;
        entries.emplace_back(idx,
                             parse_double(toks[t].substr(colon + 1), lineno));
        max_index = std::max(max_index, idx);
      }
      sparse.emplace_back(label, std::move(entries));
    }
  }

  if (format == DatasetFormat::kSparse) {
    if (max_index == 0) throw InvalidArgument("sparse file has no features");
    for (auto& [label, entries] : sparse) {
      std::vector<double> x(max_index, 0.0);
      for (auto& [idx, val] : entries) x[idx - 1] = val;
      (label > 0 ? pos : neg).push_back(std::move(x));
    }
  }

  if (pos.empty() || neg.empty())
    throw EmptyClassError("dataset in " + path +
                          " is missing one of the classes");
  return Dataset(std::move(pos), std::move(neg));
}

void save_dataset(const Dataset& ds, const std::string& path,
                  DatasetFormat format) {
  std::string out;
  for (int s = 0; s < ds.size(); ++s) {
    out += ds.label(s) > 0 ? "+1" : "-1";
    for (int f = 0; f < ds.dim(); ++f) {
      const double v = ds.value(s, f);
      if (format == DatasetFormat::kSparse) {
        if (v == 0.0) continue;
        out += ' ';
        out += std::to_string(f + 1);
        out += ':';
      } else {
        out += ' ';
      }
      append_double(out, v);
    }
    // keep dimensionality recoverable from a sparse file whose last
    // feature is zero everywhere on this row
    if (format == DatasetFormat::kSparse && ds.value(s, ds.dim() - 1) == 0.0) {
      out += ' ';
      out += std::to_string(ds.dim());
      out += ":0";
    }
    out += '\n';
  }
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write dataset file: " + path);
  f << out;
}

Dataset gen_toy(const ToySpec& spec) {
  if (spec.n_pos < 1 || spec.n_neg < 1)
    throw InvalidArgument("toy generator needs at least one sample per class");
  if (!(spec.noise_scale > 0.0))
    throw InvalidArgument("noise_scale must be positive");

  Rng rng(spec.seed);
  std::vector<std::vector<double>> pos, neg;
  pos.reserve(spec.n_pos);
  neg.reserve(spec.n_neg);

  if (spec.pattern == ToyPattern::kRing) {
    constexpr double kRadius = 2.0;
    constexpr double kAngularSpread = 0.45;
    for (int i = 0; i < spec.n_pos; ++i) {
      const int corner = static_cast<int>(rng.below(4));
      const double angle = (0.25 + 0.5 * corner) * std::numbers::pi +
                           kAngularSpread * spec.noise_scale * rng.normal();
      const double radius = kRadius + spec.noise_scale * rng.normal();
      pos.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    }
    const double blob = 1.1 + spec.noise_scale;
    for (int j = 0; j < spec.n_neg; ++j)
      neg.push_back({blob * rng.normal(), blob * rng.normal()});
  } else {
    for (int i = 0; i < spec.n_pos; ++i)
      pos.push_back({0.5 + spec.noise_scale * rng.normal(),
                     spec.noise_scale * rng.normal()});
    for (int j = 0; j < spec.n_neg; ++j)
      neg.push_back({-0.5 + spec.noise_scale * rng.normal(),
                     spec.noise_scale * rng.normal()});
  }
  return Dataset(std::move(pos), std::move(neg));
}

std::vector<int> CvSplit::fold_indices(int fold) const {
  std::vector<int> out;
  for (int s = 0; s < static_cast<int>(fold_of.size()); ++s)
    if (fold_of[s] == fold) out.push_back(s);
  return out;
}

std::vector<int> CvSplit::complement_indices(int fold) const {
  std::vector<int> out;
  for (int s = 0; s < static_cast<int>(fold_of.size()); ++s)
    if (fold_of[s] != fold) out.push_back(s);
  return out;
}

CvSplit make_folds(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("need at least 2 folds");
  if (ds.num_pos() < k || ds.num_neg() < k)
    throw InvalidArgument("fold count " + std::to_string(k) +
                          " exceeds a class size");

  CvSplit split;
  split.k = k;
  split.seed = seed;
  split.fold_of.assign(ds.size(), 0);

  Rng rng(seed);
  auto assign = [&](int first, int count) {
    std::vector<int> idx(count);
    std::iota(idx.begin(), idx.end(), first);
    for (int i = count - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    for (int i = 0; i < count; ++i) split.fold_of[idx[i]] = i % k;
  };
  assign(0, ds.num_pos());
  assign(ds.num_pos(), ds.num_neg());
  return split;
}

}  // namespace pauc
