#pragma once

#include <array>
#include <string>
#include <vector>

#include "twr/classify.hpp"
#include "twr/config.hpp"
#include "twr/range_map.hpp"
#include "twr/rpca.hpp"
#include "twr/signal_model.hpp"
#include "twr/tfr.hpp"

namespace twr {

/// Everything one run needs: sweep and scene, filter choice, gating, STFT,
/// feature extraction, and classifier protocol. Built from the flat key=value
/// config; every key has a default.
struct PipelineConfig {
  SweepConfig sweep;
  SceneOptions scene;

  std::string filter_method = "rpca";  // none | mean_sub | rpca
  RpcaParams<double> rpca;

  double gate_energy_fraction = 0.9;
  std::string stack_kind = "sum";  // sum | max
  StftParams stft;

  // feature pipeline crops this range band before filtering
  double crop_min_m = 1.5;
  double crop_max_m = 7.5;
  Index feature_rows = 64;
  Index feature_cols = 64;
  double feature_floor_db = 40.0;
  double export_floor_db = 40.0;
  Index channel = 0;

  Index components_rangemap = 16;
  Index components_spectrogram = 5;
  int knn_k = 3;
  double train_frac = 0.8;
  int eval_seeds = 10;

  std::vector<std::string> dataset_classes;
  Index samples_per_class = 40;
  std::uint64_t seed = 1;

  static PipelineConfig defaults();
  static PipelineConfig from_config(const KeyValueConfig& kv);

  Index components_for(FeatureKind kind) const {
    return is_spectrogram_kind(kind) ? components_spectrogram : components_rangemap;
  }
  void validate() const;
};

/// The nine motion classes of the benchmark protocol.
std::vector<std::string> default_motion_classes();

/// Per-sample kinematic jitter for dataset generation: start position, speed,
/// durations, and limb parameters drawn around the configured scene.
SceneOptions randomized_scene(const PipelineConfig& cfg, MotionTemplate motion,
                              std::uint64_t sample_seed);

/// Scene synthesis plus range-map formation for one channel.
RangeMap simulate_range_map(const SweepConfig& sweep, const SceneOptions& scene,
                            Index channel = 0);

/// Keeps the rows whose range falls in [min_m, max_m].
RangeMap crop_range(const RangeMap& map, double min_m, double max_m);

/// All four feature maps of one sample: both filterings of the cropped map
/// and the spectrogram of each.
struct SampleFeatures {
  std::array<FeatureMap, 4> by_kind;

  const FeatureMap& operator[](FeatureKind kind) const {
    return by_kind[static_cast<std::size_t>(kind)];
  }
};

SampleFeatures compute_features(const RangeMap& raw, const PipelineConfig& cfg);

/// One LabeledDataset per feature kind, same sample order and labels.
struct FeatureDatasets {
  std::array<LabeledDataset, 4> by_kind;

  LabeledDataset& operator[](FeatureKind kind) {
    return by_kind[static_cast<std::size_t>(kind)];
  }
  const LabeledDataset& operator[](FeatureKind kind) const {
    return by_kind[static_cast<std::size_t>(kind)];
  }
};

/// Simulates the whole benchmark in memory (classes x samples_per_class).
FeatureDatasets build_feature_datasets(const PipelineConfig& cfg);

struct ManifestEntry {
  int class_index = 0;
  std::string path;  // relative to the manifest directory
  std::uint64_t seed = 0;
};

/// Line-oriented dataset index: class names, per-sample archive paths and
/// seeds, and the generating config hash.
struct DatasetManifest {
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;
  std::string config_hash;

  std::string to_text() const;
  static DatasetManifest from_text(const std::string& text);
};

}  // namespace twr
