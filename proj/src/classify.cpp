#include "twr/classify.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "twr/rng.hpp"

namespace twr {

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "ms_rm") return FeatureKind::mean_sub_rangemap;
  if (name == "rpca_rm") return FeatureKind::rpca_rangemap;
  if (name == "ms_spec") return FeatureKind::mean_sub_spectrogram;
  if (name == "rpca_spec") return FeatureKind::rpca_spectrogram;
  throw std::invalid_argument("unknown feature kind: " + name);
}

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::mean_sub_rangemap: return "ms_rm";
    case FeatureKind::rpca_rangemap: return "rpca_rm";
    case FeatureKind::mean_sub_spectrogram: return "ms_spec";
    case FeatureKind::rpca_spectrogram: return "rpca_spec";
  }
  throw std::invalid_argument("unknown feature kind");
}

bool is_spectrogram_kind(FeatureKind kind) {
  return kind == FeatureKind::mean_sub_spectrogram || kind == FeatureKind::rpca_spectrogram;
}

MatrixXd resize_bilinear(const MatrixXd& input, Index rows, Index cols) {
  detail::require(input.size() > 0, "input is empty");
  detail::require(rows >= 1 && cols >= 1, "target dimensions must be positive");
  if (input.rows() == rows && input.cols() == cols) return input;

  MatrixXd out(rows, cols);
  const double row_scale = double(input.rows()) / double(rows);
  const double col_scale = double(input.cols()) / double(cols);
  for (Index r = 0; r < rows; ++r) {
    const double y = std::clamp((double(r) + 0.5) * row_scale - 0.5, 0.0,
                                double(input.rows() - 1));
    const Index y0 = static_cast<Index>(y);
    const Index y1 = std::min(y0 + 1, input.rows() - 1);
    const double wy = y - double(y0);
    for (Index c = 0; c < cols; ++c) {
      const double x = std::clamp((double(c) + 0.5) * col_scale - 0.5, 0.0,
                                  double(input.cols() - 1));
      const Index x0 = static_cast<Index>(x);
      const Index x1 = std::min(x0 + 1, input.cols() - 1);
      const double wx = x - double(x0);
      out(r, c) = (1.0 - wy) * ((1.0 - wx) * input(y0, x0) + wx * input(y0, x1)) +
                  wy * ((1.0 - wx) * input(y1, x0) + wx * input(y1, x1));
    }
  }
  return out;
}

namespace {

FeatureMap finalize_feature(MatrixXd raw, FeatureKind kind, Index rows, Index cols) {
  FeatureMap map;
  map.source_kind = kind;
  map.data = resize_bilinear(raw, rows, cols);
  const double peak = map.data.maxCoeff();
  if (peak > 0.0) {
    map.data /= peak;
  } else {
    map.data.setZero();
    map.degenerate = true;
  }
  return map;
}

}  // namespace

FeatureMap prepare_feature_map(const MatrixXcd& data, FeatureKind kind, Index rows, Index cols) {
  detail::require(data.size() > 0, "input is empty");
  detail::require(!is_spectrogram_kind(kind), "range-map route expects a range-map kind");
  return finalize_feature(data.cwiseAbs(), kind, rows, cols);
}

FeatureMap prepare_feature_map(const RangeMap& map, FeatureKind kind, Index rows, Index cols) {
  return prepare_feature_map(map.data, kind, rows, cols);
}

FeatureMap prepare_feature_map(const Spectrogram& spec, FeatureKind kind, Index rows, Index cols,
                               double floor_db) {
  detail::require(spec.data.size() > 0, "input is empty");
  detail::require(is_spectrogram_kind(kind), "spectrogram route expects a spectrogram kind");
  detail::require(floor_db > 0.0, "dB floor must be positive");
  const double peak = spec.data.maxCoeff();
  if (peak <= 0.0) {
    FeatureMap map;
    map.source_kind = kind;
    map.data = MatrixXd::Zero(rows, cols);
    map.degenerate = true;
    return map;
  }
  // entries are power, so 10 log10; clamp to [-floor_db, 0] then shift up
  MatrixXd db = (spec.data.array().max(peak * std::pow(10.0, -floor_db / 10.0)) / peak)
                    .log10()
                    .matrix() *
                10.0;
  db.array() += floor_db;
  return finalize_feature(std::move(db), kind, rows, cols);
}

ProjectionBasis twodpca_fit(const std::vector<MatrixXd>& samples, Index d) {
  detail::require(samples.size() >= 2, "need at least two samples");
  const Index h = samples.front().rows();
  const Index w = samples.front().cols();
  detail::require(d >= 1 && d <= w, "component count must lie in [1, cols]");
  for (const auto& a : samples)
    detail::require(a.rows() == h && a.cols() == w, "samples must share dimensions");

  MatrixXd mean = MatrixXd::Zero(h, w);
  for (const auto& a : samples) mean += a;
  mean /= double(samples.size());

  MatrixXd scatter = MatrixXd::Zero(w, w);
  for (const auto& a : samples) {
    const MatrixXd centered = a - mean;
    scatter.noalias() += centered.transpose() * centered;
  }
  scatter /= double(samples.size());

  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(scatter);
  detail::require(solver.info() == Eigen::Success, "eigen decomposition failed");

  // SelfAdjointEigenSolver sorts ascending; take the top d in reverse
  ProjectionBasis basis;
  basis.mean_map = std::move(mean);
  basis.components.resize(w, d);
  basis.eigenvalues.resize(d);
  for (Index i = 0; i < d; ++i) {
    basis.components.col(i) = solver.eigenvectors().col(w - 1 - i);
    basis.eigenvalues(i) = std::max(solver.eigenvalues()(w - 1 - i), 0.0);
  }
  return basis;
}

ProjectionBasis twodpca_fit(const std::vector<FeatureMap>& samples, Index d) {
  std::vector<MatrixXd> raw;
  raw.reserve(samples.size());
  for (const auto& s : samples) raw.push_back(s.data);
  return twodpca_fit(raw, d);
}

MatrixXd twodpca_project(const MatrixXd& a, const ProjectionBasis& basis) {
  detail::require(a.rows() == basis.mean_map.rows() && a.cols() == basis.mean_map.cols(),
                  "sample dimensions do not match the basis");
  return (a - basis.mean_map) * basis.components;
}

int knn_classify(const std::vector<MatrixXd>& train_features, const std::vector<int>& train_labels,
                 const MatrixXd& query, int k) {
  detail::require(!train_features.empty(), "training set is empty");
  detail::require(train_features.size() == train_labels.size(),
                  "feature and label counts differ");
  detail::require(k >= 1 && static_cast<std::size_t>(k) <= train_features.size(),
                  "k must lie in [1, train size]");

  std::vector<std::pair<double, int>> neighbors;  // (distance, label)
  neighbors.reserve(train_features.size());
  for (std::size_t i = 0; i < train_features.size(); ++i)
    neighbors.emplace_back((train_features[i] - query).norm(), train_labels[i]);
  // ordering by (distance, label) keeps the k-subset independent of the
  // training list permutation
  std::partial_sort(neighbors.begin(), neighbors.begin() + k, neighbors.end());

  const int max_label = *std::max_element(train_labels.begin(), train_labels.end());
  std::vector<int> votes(static_cast<std::size_t>(max_label) + 1, 0);
  std::vector<double> cumulative(static_cast<std::size_t>(max_label) + 1, 0.0);
  for (int i = 0; i < k; ++i) {
    votes[static_cast<std::size_t>(neighbors[i].second)] += 1;
    cumulative[static_cast<std::size_t>(neighbors[i].second)] += neighbors[i].first;
  }

  int best = -1;
  for (int label = 0; label <= max_label; ++label) {
    const auto u = static_cast<std::size_t>(label);
    if (votes[u] == 0) continue;
    if (best < 0) {
      best = label;
      continue;
    }
    const auto b = static_cast<std::size_t>(best);
    if (votes[u] > votes[b] || (votes[u] == votes[b] && cumulative[u] < cumulative[b]))
      best = label;
  }
  return best;
}

std::vector<Index> LabeledDataset::class_counts() const {
  std::vector<Index> counts(class_names.size(), 0);
  for (const auto& s : samples) {
    detail::require(s.label >= 0 && static_cast<std::size_t>(s.label) < class_names.size(),
                    "sample label out of range");
    ++counts[static_cast<std::size_t>(s.label)];
  }
  return counts;
}

void LabeledDataset::validate() const {
  detail::require(!class_names.empty(), "dataset has no classes");
  detail::require(!samples.empty(), "dataset has no samples");
  for (Index count : class_counts()) detail::require(count > 0, "empty class");
  const Index h = samples.front().data.rows();
  const Index w = samples.front().data.cols();
  for (const auto& s : samples)
    detail::require(s.data.rows() == h && s.data.cols() == w, "samples must share dimensions");
}

MatrixXd ConfusionMatrix::fractions() const {
  MatrixXd out = counts;
  for (Index r = 0; r < out.rows(); ++r) {
    const double total = out.row(r).sum();
    if (total > 0.0) out.row(r) /= total;
  }
  return out;
}

double ConfusionMatrix::accuracy() const {
  const double total = counts.sum();
  return total > 0.0 ? counts.trace() / total : 0.0;
}

EvaluationResult evaluate_split(const LabeledDataset& dataset, double train_frac,
                                std::uint64_t seed, Index d, int k) {
  dataset.validate();
  detail::require(train_frac > 0.0 && train_frac < 1.0, "train fraction must lie in (0, 1)");
  const auto n_classes = static_cast<Index>(dataset.class_names.size());

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    by_class[static_cast<std::size_t>(dataset.samples[i].label)].push_back(i);

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (Index c = 0; c < n_classes; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    detail::require(members.size() >= 2, "every class needs at least two samples to split");
    RandomStream rng(mix_seed(seed, 0x53504c4954ULL, static_cast<std::uint64_t>(c)));
    for (std::size_t i = members.size() - 1; i > 0; --i)
      std::swap(members[i], members[rng.uniform_index(i + 1)]);
    auto n_train = static_cast<std::size_t>(
        std::lround(train_frac * double(members.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    train_idx.insert(train_idx.end(), members.begin(), members.begin() + n_train);
    test_idx.insert(test_idx.end(), members.begin() + n_train, members.end());
  }

  std::vector<MatrixXd> train_maps;
  std::vector<int> train_labels;
  train_maps.reserve(train_idx.size());
  for (std::size_t i : train_idx) {
    train_maps.push_back(dataset.samples[i].data);
    train_labels.push_back(dataset.samples[i].label);
  }
  const ProjectionBasis basis = twodpca_fit(train_maps, d);

  std::vector<MatrixXd> train_features;
  train_features.reserve(train_maps.size());
  for (const auto& a : train_maps) train_features.push_back(twodpca_project(a, basis));

  EvaluationResult result;
  result.confusion.counts = MatrixXd::Zero(n_classes, n_classes);
  result.train_size = static_cast<Index>(train_idx.size());
  result.test_size = static_cast<Index>(test_idx.size());
  for (std::size_t i : test_idx) {
    const MatrixXd features = twodpca_project(dataset.samples[i].data, basis);
    const int predicted = knn_classify(train_features, train_labels, features, k);
    result.confusion.counts(dataset.samples[i].label, predicted) += 1.0;
  }
  result.accuracy = result.confusion.accuracy();
  return result;
}

}  // namespace twr
