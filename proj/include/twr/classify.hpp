#pragma once

#include <string>
#include <vector>

#include "twr/range_map.hpp"
#include "twr/tfr.hpp"
#include "twr/types.hpp"

namespace twr {

enum class FeatureKind {
  mean_sub_rangemap,
  rpca_rangemap,
  mean_sub_spectrogram,
  rpca_spectrogram,
};

FeatureKind feature_kind_from_string(const std::string& name);
std::string to_string(FeatureKind kind);
bool is_spectrogram_kind(FeatureKind kind);

/// Nonnegative H x W map, max-normalized to 1 unless the source was all zero
/// (then all-zero with the degenerate flag set).
struct FeatureMap {
  MatrixXd data;
  FeatureKind source_kind = FeatureKind::mean_sub_rangemap;
  int label = -1;
  bool degenerate = false;
};

/// Bilinear resample with half-pixel sample centers.
MatrixXd resize_bilinear(const MatrixXd& input, Index rows, Index cols);

/// Range-map route: magnitude, resample, divide by the maximum.
FeatureMap prepare_feature_map(const RangeMap& map, FeatureKind kind, Index rows, Index cols);
FeatureMap prepare_feature_map(const MatrixXcd& data, FeatureKind kind, Index rows, Index cols);

/// Spectrogram route: dB relative to the peak, floored at -floor_db, shifted
/// to [0, floor_db], resampled, divided by the maximum.
FeatureMap prepare_feature_map(const Spectrogram& spec, FeatureKind kind, Index rows, Index cols,
                               double floor_db = 40.0);

struct ProjectionBasis {
  MatrixXd mean_map;     // H x W
  MatrixXd components;   // W x d, orthonormal columns
  VectorXd eigenvalues;  // length d, descending
};

/// Eigenvectors of the image scatter matrix G = (1/N) sum (A_i - mean)^T (A_i - mean),
/// largest d eigenvalues first.
ProjectionBasis twodpca_fit(const std::vector<MatrixXd>& samples, Index d);
ProjectionBasis twodpca_fit(const std::vector<FeatureMap>& samples, Index d);

/// (A - mean) * components.
MatrixXd twodpca_project(const MatrixXd& a, const ProjectionBasis& basis);

/// Majority label among the k nearest training features by Frobenius
/// distance. Vote ties go to the smaller cumulative distance, then the
/// smaller class index; equidistant neighbors are ordered by label.
int knn_classify(const std::vector<MatrixXd>& train_features, const std::vector<int>& train_labels,
                 const MatrixXd& query, int k);

struct LabeledDataset {
  std::vector<FeatureMap> samples;
  std::vector<std::string> class_names;

  std::vector<Index> class_counts() const;
  void validate() const;
};

/// Rows are true classes, columns predicted. Raw counts kept; fractions() is
/// row-normalized.
struct ConfusionMatrix {
  MatrixXd counts;

  MatrixXd fractions() const;
  double accuracy() const;  // total correct over total samples
};

struct EvaluationResult {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  Index train_size = 0;
  Index test_size = 0;
};

/// Stratified random split at train_frac per class, basis fitted on the
/// training half only, kNN on projected features. Deterministic per seed.
EvaluationResult evaluate_split(const LabeledDataset& dataset, double train_frac,
                                std::uint64_t seed, Index d, int k);

}  // namespace twr
