#include "lalec/toyml/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "lalec/error.hpp"
#include "lalec/rng.hpp"

namespace lalec::toyml {

LabeledDataset synth_dataset(const std::string& kind, std::size_t n, std::uint64_t seed) {
  if (n < 8) throw Error(ErrorCode::InvalidArgument, "synthetic datasets need n >= 8");
  Rng rng(seed);
  LabeledDataset ds;
  ds.features = Matrix(n, 2);
  ds.labels.resize(n);
  ds.column_names = {"x0", "x1"};
  for (std::size_t i = 0; i < n; ++i) {
    double a = 0, b = 0;
    int y = static_cast<int>(i % 2);
    if (kind == "blobs") {
      double c = y ? 2.5 : -2.5;
      a = c + rng.normal();
      b = c + rng.normal();
    } else if (kind == "xor") {
      a = 2 * rng.uniform() - 1;
      b = 2 * rng.uniform() - 1;
      y = (a > 0) != (b > 0) ? 1 : 0;
    } else if (kind == "moonsApprox") {
      double t = 3.141592653589793 * rng.uniform();
      a = y ? 1 - std::cos(t) : std::cos(t);
      b = y ? 0.5 - std::sin(t) : std::sin(t);
      a += 0.1 * rng.normal();
      b += 0.1 * rng.normal();
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown synthetic dataset '" + kind + "'");
    }
    ds.features(i, 0) = a;
    ds.features(i, 1) = b;
    ds.labels[i] = y;
  }
  return ds;
}

namespace {

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

LabeledDataset parse_csv(const std::string& text, const std::string& label_column) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) header = split_line(line);
  }
  if (header.empty()) throw Error(ErrorCode::BadCsv, "missing header row");
  auto lab = std::find(header.begin(), header.end(), label_column);
  if (lab == header.end()) {
    throw Error(ErrorCode::LabelColumnMissing, "no column named '" + label_column + "'");
  }
  const std::size_t li = static_cast<std::size_t>(lab - header.begin());
  if (header.size() < 2) throw Error(ErrorCode::BadCsv, "need at least one feature column");

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::BadCsv, "line " + std::to_string(lineno) + ": expected " +
                                         std::to_string(header.size()) + " fields, got " +
                                         std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == li) {
        raw_labels.push_back(cells[c]);
        continue;
      }
      const std::string& s = cells[c];
      if (s.empty() || s == "?" || s == "NA" || s == "NaN" || s == "nan") {
        values.push_back(NAN);
        continue;
      }
      char* end = nullptr;
      double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size()) {
        throw Error(ErrorCode::BadCsv, "line " + std::to_string(lineno) + ": column '" +
                                           header[c] + "' is not numeric: " + s);
      }
      values.push_back(v);
    }
  }
  if (raw_labels.empty()) throw Error(ErrorCode::BadCsv, "no data rows");

  // Numeric labels sort numerically, everything else lexicographically.
  std::set<std::string> uniq(raw_labels.begin(), raw_labels.end());
  std::vector<std::string> distinct(uniq.begin(), uniq.end());
  bool numeric = std::all_of(distinct.begin(), distinct.end(), [](const std::string& s) {
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return !s.empty() && end == s.c_str() + s.size();
  });
  if (numeric) {
    std::sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
      return std::strtod(a.c_str(), nullptr) < std::strtod(b.c_str(), nullptr);
    });
  }
  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < distinct.size(); ++i) ids[distinct[i]] = static_cast<int>(i);

  LabeledDataset ds;
  ds.features = Matrix(raw_labels.size(), header.size() - 1, std::move(values));
  for (const auto& l : raw_labels) ds.labels.push_back(ids[l]);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != li) ds.column_names.push_back(header[c]);
  }
  return ds;
}

LabeledDataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_csv(buf.str(), label_column);
}

namespace {

// Row indices per class, each shuffled with the seed.
std::vector<std::vector<std::size_t>> shuffled_by_class(const LabeledDataset& ds,
                                                        std::uint64_t seed) {
  int k = 0;
  for (int y : ds.labels) k = std::max(k, y + 1);
  std::vector<std::vector<std::size_t>> by(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < ds.size(); ++i) by[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  Rng rng(seed);
  for (auto& v : by) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  }
  return by;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double fraction,
                                                           std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) {
    throw Error(ErrorCode::InvalidArgument, "split fraction must be in (0, 1)");
  }
  auto by = shuffled_by_class(ds, seed);
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  std::vector<std::size_t> take(by.size());
  std::vector<std::pair<double, std::size_t>> rest;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < by.size(); ++c) {
    double ideal = fraction * static_cast<double>(by[c].size());
    take[c] = static_cast<std::size_t>(std::floor(ideal));
    assigned += take[c];
    rest.push_back({ideal - std::floor(ideal), c});
  }
  // Largest remainders first; ties to the lower class id.
  std::stable_sort(rest.begin(), rest.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < target && i < rest.size(); ++i) {
    auto c = rest[i].second;
    if (take[c] < by[c].size()) {
      ++take[c];
      ++assigned;
    }
  }
  std::vector<std::size_t> train, test;
  for (std::size_t c = 0; c < by.size(); ++c) {
    train.insert(train.end(), by[c].begin(), by[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
    test.insert(test.end(), by[c].begin() + static_cast<std::ptrdiff_t>(take[c]), by[c].end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {ds.subset(train), ds.subset(test)};
}

std::vector<std::vector<std::size_t>> stratified_folds(const LabeledDataset& ds, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2 || k > ds.size()) {
    throw Error(ErrorCode::InvalidArgument, "fold count must be in [2, n]");
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (const auto& rows : shuffled_by_class(ds, seed)) {
    for (auto i : rows) folds[next++ % k].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and label counts differ");
  }
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += predicted[i] == truth[i];
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}

double cross_val_score(const Operator& op, const LabeledDataset& ds, std::size_t k,
                       std::uint64_t seed) {
  ds.check();
  const int classes = ds.num_classes();
  const bool fixed = op.frozen_trained() && state_of(op) == LifecycleState::Trained;
  std::size_t correct = 0;
  for (const auto& fold : stratified_folds(ds, k, seed)) {
    std::vector<char> held(ds.size(), 0);
    for (auto i : fold) held[i] = 1;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (!held[i]) train.push_back(i);
    }
    Operator model = op;
    if (!fixed) {
      auto part = ds.subset(train);
      std::vector<double> w(part.size(), 1.0 / static_cast<double>(part.size()));
      model = fit_weighted(op, part, w, classes, {seed});
    }
    auto test = ds.subset(fold);
    auto pred = predict_labels(model, test.features);
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == test.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

}  // namespace lalec::toyml
