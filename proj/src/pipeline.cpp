#include "twr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "twr/rng.hpp"

namespace twr {

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig cfg;
  cfg.sweep = SweepConfig::standard();
  cfg.scene.wall = WallModel{};
  cfg.scene.clutter_count = 6;
  cfg.scene.clutter_to_signal_db = 30.0;
  cfg.scene.snr_db = 40.0;
  cfg.scene.n_slow = 151;
  cfg.scene.prf_hz = cfg.sweep.prf_hz;
  // looser stop for the feature path; the sparse part is stable to four
  // digits well before the solver-default 1e-7 tail
  cfg.rpca.tol = 1e-5;
  cfg.dataset_classes = default_motion_classes();
  return cfg;
}

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& kv) {
  PipelineConfig cfg = defaults();

  cfg.sweep.f_start_hz = kv.get_double("f_start_hz", cfg.sweep.f_start_hz);
  cfg.sweep.delta_f_hz = kv.get_double("delta_f_hz", cfg.sweep.delta_f_hz);
  cfg.sweep.n_freq = kv.get_int("n_freq", cfg.sweep.n_freq);
  cfg.sweep.prf_hz = kv.get_double("prf_hz", cfg.sweep.prf_hz);
  cfg.scene.prf_hz = cfg.sweep.prf_hz;

  if (kv.get_bool("wall.enabled", true)) {
    WallModel wall;
    wall.thickness_m = kv.get_double("wall.thickness_m", wall.thickness_m);
    wall.relative_permittivity = kv.get_double("wall.eps_r", wall.relative_permittivity);
    wall.two_way_loss_db = kv.get_double("wall.loss_db", wall.two_way_loss_db);
    cfg.scene.wall = wall;
  } else {
    cfg.scene.wall.reset();
  }
  cfg.scene.wall_range_m = kv.get_double("wall.range_m", cfg.scene.wall_range_m);

  cfg.scene.snr_db = kv.get_double("snr_db", cfg.scene.snr_db);
  cfg.scene.motion = motion_template_from_string(
      kv.get_string("motion.template", to_string(cfg.scene.motion)));
  MotionParams& motion = cfg.scene.torso;
  motion.start.x() = kv.get_double("motion.start_x_m", motion.start.x());
  motion.start.y() = kv.get_double("motion.start_y_m", motion.start.y());
  motion.start.z() = kv.get_double("motion.start_z_m", motion.start.z());
  motion.speed_mps = kv.get_double("motion.speed_mps", motion.speed_mps);
  motion.duration_s = kv.get_double("motion.duration_s", motion.duration_s);
  motion.drop_m = kv.get_double("motion.drop_m", motion.drop_m);
  motion.osc_amplitude_m = kv.get_double("motion.osc_amplitude_m", motion.osc_amplitude_m);
  motion.osc_rate_hz = kv.get_double("motion.osc_rate_hz", motion.osc_rate_hz);
  motion.osc_phase_rad = kv.get_double("motion.osc_phase_rad", motion.osc_phase_rad);
  motion.sway_m = kv.get_double("motion.sway_m", motion.sway_m);

  cfg.scene.torso_reflectivity = kv.get_double("scene.torso_reflectivity",
                                               cfg.scene.torso_reflectivity);
  cfg.scene.limb_count = static_cast<int>(kv.get_int("scene.limb_count", cfg.scene.limb_count));
  cfg.scene.limb_reflectivity = kv.get_double("scene.limb_reflectivity",
                                              cfg.scene.limb_reflectivity);
  cfg.scene.limb_amplitude_m = kv.get_double("scene.limb_amplitude_m",
                                             cfg.scene.limb_amplitude_m);
  cfg.scene.limb_rate_hz = kv.get_double("scene.limb_rate_hz", cfg.scene.limb_rate_hz);
  cfg.scene.clutter_count = static_cast<int>(kv.get_int("scene.clutter_count",
                                                        cfg.scene.clutter_count));
  cfg.scene.clutter_to_signal_db = kv.get_double("scene.clutter_to_signal_db",
                                                 cfg.scene.clutter_to_signal_db);
  cfg.scene.gain_ripple_depth = kv.get_double("scene.gain_ripple_depth",
                                              cfg.scene.gain_ripple_depth);
  cfg.scene.gain_ripple_hz = kv.get_double("scene.gain_ripple_hz", cfg.scene.gain_ripple_hz);
  cfg.scene.gain_ripple_phase_rad = kv.get_double("scene.gain_ripple_phase",
                                                  cfg.scene.gain_ripple_phase_rad);
  cfg.scene.n_slow = kv.get_int("scene.n_slow", cfg.scene.n_slow);

  cfg.filter_method = kv.get_string("filter.method", cfg.filter_method);
  cfg.rpca.lambda = kv.get_double("rpca.lambda", cfg.rpca.lambda);
  cfg.rpca.mu0 = kv.get_double("rpca.mu0", cfg.rpca.mu0);
  cfg.rpca.rho = kv.get_double("rpca.rho", cfg.rpca.rho);
  cfg.rpca.tol = kv.get_double("rpca.tol", cfg.rpca.tol);
  cfg.rpca.max_iter = static_cast<int>(kv.get_int("rpca.max_iter", cfg.rpca.max_iter));

  cfg.gate_energy_fraction = kv.get_double("gate.energy_fraction", cfg.gate_energy_fraction);
  cfg.stack_kind = kv.get_string("stack.kind", cfg.stack_kind);
  cfg.stft.window_len = kv.get_int("stft.window_len", cfg.stft.window_len);
  cfg.stft.overlap = kv.get_int("stft.overlap", cfg.stft.overlap);
  cfg.stft.fft_size = kv.get_int("stft.fft_size", cfg.stft.fft_size);
  cfg.stft.window_kind = window_kind_from_string(
      kv.get_string("stft.window", to_string(cfg.stft.window_kind)));

  cfg.crop_min_m = kv.get_double("crop.min_m", cfg.crop_min_m);
  cfg.crop_max_m = kv.get_double("crop.max_m", cfg.crop_max_m);
  cfg.feature_rows = kv.get_int("feature.rows", cfg.feature_rows);
  cfg.feature_cols = kv.get_int("feature.cols", cfg.feature_cols);
  cfg.feature_floor_db = kv.get_double("feature.floor_db", cfg.feature_floor_db);
  cfg.export_floor_db = kv.get_double("export.floor_db", cfg.export_floor_db);
  cfg.channel = kv.get_int("channel", cfg.channel);

  cfg.components_rangemap = kv.get_int("classify.components_rangemap",
                                       cfg.components_rangemap);
  cfg.components_spectrogram = kv.get_int("classify.components_spectrogram",
                                          cfg.components_spectrogram);
  cfg.knn_k = static_cast<int>(kv.get_int("classify.k", cfg.knn_k));
  cfg.train_frac = kv.get_double("classify.train_frac", cfg.train_frac);
  cfg.eval_seeds = static_cast<int>(kv.get_int("classify.seeds", cfg.eval_seeds));

  if (kv.has("dataset.classes")) {
    cfg.dataset_classes.clear();
    std::istringstream list(kv.get_string("dataset.classes"));
    std::string name;
    while (std::getline(list, name, ',')) {
      if (!name.empty()) cfg.dataset_classes.push_back(name);
    }
  }
  cfg.samples_per_class = kv.get_int("dataset.samples_per_class", cfg.samples_per_class);
  cfg.seed = kv.get_uint("seed", cfg.seed);

  cfg.validate();
  return cfg;
}

void PipelineConfig::validate() const {
  sweep.validate();
  scene.torso.validate();
  detail::require(filter_method == "none" || filter_method == "mean_sub" ||
                      filter_method == "rpca",
                  "filter.method must be none, mean_sub, or rpca");
  rpca.validate();
  detail::require(gate_energy_fraction > 0.0 && gate_energy_fraction <= 1.0,
                  "gate.energy_fraction must lie in (0, 1]");
  detail::require(stack_kind == "sum" || stack_kind == "max",
                  "stack.kind must be sum or max");
  stft.validate();
  detail::require(crop_min_m >= 0.0 && crop_min_m < crop_max_m,
                  "crop window must satisfy 0 <= min < max");
  detail::require(feature_rows >= 2 && feature_cols >= 2, "feature dims must be >= 2");
  detail::require(feature_floor_db > 0.0, "feature.floor_db must be positive");
  detail::require(export_floor_db > 0.0, "export.floor_db must be positive");
  detail::require(channel >= 0 && channel < sweep.channel_count(),
                  "channel index out of range for the array");
  detail::require(components_rangemap >= 1 && components_rangemap <= feature_cols,
                  "classify.components_rangemap must lie in [1, feature.cols]");
  detail::require(components_spectrogram >= 1 && components_spectrogram <= feature_cols,
                  "classify.components_spectrogram must lie in [1, feature.cols]");
  detail::require(knn_k >= 1, "classify.k must be >= 1");
  detail::require(train_frac > 0.0 && train_frac < 1.0,
                  "classify.train_frac must lie in (0, 1)");
  detail::require(eval_seeds >= 1, "classify.seeds must be >= 1");
  detail::require(!dataset_classes.empty(), "dataset.classes must not be empty");
  detail::require(samples_per_class >= 2, "dataset.samples_per_class must be >= 2");
}

std::vector<std::string> default_motion_classes() {
  return {"forward_walk", "backward_walk", "forward_crawl", "backward_crawl",
          "forward_fall", "backward_fall", "sit_down",      "stand_up",
          "pick_up"};
}

SceneOptions randomized_scene(const PipelineConfig& cfg, MotionTemplate motion,
                              std::uint64_t sample_seed) {
  SceneOptions options = cfg.scene;
  options.motion = motion;
  options.seed = sample_seed;

  // speed and start ranges keep every trajectory inside the default
  // [crop_min_m, crop_max_m] band, wall delay included
  RandomStream rng(mix_seed(sample_seed, 0x4a49545445ULL));
  MotionParams& p = options.torso;
  p.start.x() = rng.uniform(-0.6, 0.6);
  p.start.y() = rng.uniform(4.2, 4.8);
  p.start.z() = 1.0;
  p.speed_mps = rng.uniform(0.7, 1.15);
  p.duration_s = 0.0;
  p.osc_phase_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);
  p.sway_m = 0.02;
  options.limb_rate_hz = cfg.scene.limb_rate_hz * rng.uniform(0.85, 1.15);
  options.limb_amplitude_m = cfg.scene.limb_amplitude_m * rng.uniform(0.8, 1.2);
  options.gain_ripple_depth = rng.uniform(0.05, 0.3);
  options.gain_ripple_hz = rng.uniform(0.1, 0.45);
  options.gain_ripple_phase_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);

  switch (motion) {
    case MotionTemplate::forward_walk:
    case MotionTemplate::backward_walk:
      break;
    case MotionTemplate::forward_crawl:
    case MotionTemplate::backward_crawl:
      p.start.z() = 0.35;
      p.speed_mps = rng.uniform(0.45, 0.65);
      options.limb_rate_hz *= 0.7;
      break;
    case MotionTemplate::forward_fall:
    case MotionTemplate::backward_fall:
      p.speed_mps = rng.uniform(1.2, 1.8);
      p.duration_s = rng.uniform(0.65, 1.0);
      p.drop_m = rng.uniform(0.55, 0.8);
      options.limb_amplitude_m *= 0.5;
      break;
    case MotionTemplate::sit_down:
    case MotionTemplate::stand_up:
      // short active phase so the ridge freezes inside the window, unlike the
      // crawls whose slope continues to the last sample
      p.speed_mps = rng.uniform(0.22, 0.32);
      p.duration_s = rng.uniform(0.55, 0.85);
      p.drop_m = rng.uniform(0.35, 0.5);
      options.limb_amplitude_m *= 0.5;
      break;
    case MotionTemplate::pick_up:
      p.duration_s = rng.uniform(0.9, 1.4);
      p.drop_m = rng.uniform(0.45, 0.65);
      options.limb_amplitude_m *= 0.5;
      break;
    case MotionTemplate::static_point:
    case MotionTemplate::march_in_place:
    case MotionTemplate::boxing:
      p.osc_amplitude_m = motion == MotionTemplate::static_point ? 0.0
                                                                 : rng.uniform(0.1, 0.2);
      break;
  }
  return options;
}

RangeMap simulate_range_map(const SweepConfig& sweep, const SceneOptions& scene, Index channel) {
  const MotionScene built = build_motion_scene(scene);
  return form_range_map(synthesize(built, sweep, channel));
}

RangeMap crop_range(const RangeMap& map, double min_m, double max_m) {
  detail::require(min_m >= 0.0 && min_m < max_m, "crop window must satisfy 0 <= min < max");
  const Index first = std::min<Index>(static_cast<Index>(std::floor(min_m / map.bin_spacing_m)),
                                      map.bins() - 1);
  const Index last = std::min<Index>(static_cast<Index>(std::ceil(max_m / map.bin_spacing_m)),
                                     map.bins() - 1);
  RangeMap out;
  out.bin_spacing_m = map.bin_spacing_m;
  out.prf_hz = map.prf_hz;
  out.data = map.data.middleRows(first, last - first + 1);
  return out;
}

namespace {

FeatureMap spectrogram_feature(const MatrixXcd& filtered, FeatureKind kind,
                               const PipelineConfig& cfg, double prf_hz) {
  if (filtered.squaredNorm() == 0.0) {
    FeatureMap map;
    map.source_kind = kind;
    map.data = MatrixXd::Zero(cfg.feature_rows, cfg.feature_cols);
    map.degenerate = true;
    return map;
  }
  const RangeGate gate = select_range_gate(filtered, cfg.gate_energy_fraction);
  const VectorXcd stacked = cfg.stack_kind == "max" ? range_max_stack(filtered, gate)
                                                    : range_stack(filtered, gate);
  const Spectrogram spec = spectrogram(stacked, cfg.stft, prf_hz);
  return prepare_feature_map(spec, kind, cfg.feature_rows, cfg.feature_cols,
                             cfg.feature_floor_db);
}

}  // namespace

SampleFeatures compute_features(const RangeMap& raw, const PipelineConfig& cfg) {
  const RangeMap cropped = crop_range(raw, cfg.crop_min_m, cfg.crop_max_m);
  const MatrixXcd mean_sub = mean_subtract_rows(cropped.data);
  const RpcaResult<double> decomposition = rpca_decompose(cropped.data, cfg.rpca);

  SampleFeatures features;
  features.by_kind[static_cast<std::size_t>(FeatureKind::mean_sub_rangemap)] =
      prepare_feature_map(mean_sub, FeatureKind::mean_sub_rangemap, cfg.feature_rows,
                          cfg.feature_cols);
  features.by_kind[static_cast<std::size_t>(FeatureKind::rpca_rangemap)] =
      prepare_feature_map(decomposition.sparse, FeatureKind::rpca_rangemap, cfg.feature_rows,
                          cfg.feature_cols);
  features.by_kind[static_cast<std::size_t>(FeatureKind::mean_sub_spectrogram)] =
      spectrogram_feature(mean_sub, FeatureKind::mean_sub_spectrogram, cfg, cropped.prf_hz);
  features.by_kind[static_cast<std::size_t>(FeatureKind::rpca_spectrogram)] =
      spectrogram_feature(decomposition.sparse, FeatureKind::rpca_spectrogram, cfg,
                          cropped.prf_hz);
  return features;
}

FeatureDatasets build_feature_datasets(const PipelineConfig& cfg) {
  cfg.validate();
  FeatureDatasets datasets;
  for (auto& dataset : datasets.by_kind) dataset.class_names = cfg.dataset_classes;

  for (std::size_t c = 0; c < cfg.dataset_classes.size(); ++c) {
    const MotionTemplate motion = motion_template_from_string(cfg.dataset_classes[c]);
    const std::uint64_t class_tag = fnv1a_hash(cfg.dataset_classes[c]);
    for (Index i = 0; i < cfg.samples_per_class; ++i) {
      const std::uint64_t sample_seed =
          mix_seed(cfg.seed, class_tag, static_cast<std::uint64_t>(i) + 1);
      const SceneOptions scene = randomized_scene(cfg, motion, sample_seed);
      const RangeMap raw = simulate_range_map(cfg.sweep, scene);
      SampleFeatures features = compute_features(raw, cfg);
      for (std::size_t kind = 0; kind < 4; ++kind) {
        features.by_kind[kind].label = static_cast<int>(c);
        datasets.by_kind[kind].samples.push_back(std::move(features.by_kind[kind]));
      }
    }
  }
  for (auto& dataset : datasets.by_kind) dataset.validate();
  return datasets;
}

std::string DatasetManifest::to_text() const {
  std::string out = "TWR-MANIFEST 1\n";
  out += "hash " + config_hash + "\n";
  out += "classes " + std::to_string(class_names.size()) + "\n";
  for (std::size_t i = 0; i < class_names.size(); ++i)
    out += "class " + std::to_string(i) + " " + class_names[i] + "\n";
  out += "samples " + std::to_string(entries.size()) + "\n";
  for (const auto& entry : entries)
    out += "sample " + std::to_string(entry.class_index) + " " + entry.path + " " +
           std::to_string(entry.seed) + "\n";
  return out;
}

DatasetManifest DatasetManifest::from_text(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  auto next_line = [&](const char* what) {
    detail::require(static_cast<bool>(std::getline(stream, line)),
                    (std::string("manifest truncated before ") + what).c_str());
    return line;
  };

  DatasetManifest manifest;
  detail::require(next_line("header") == "TWR-MANIFEST 1", "unrecognized manifest header");

  std::istringstream hash_line(next_line("hash"));
  std::string word;
  hash_line >> word >> manifest.config_hash;
  detail::require(word == "hash" && manifest.config_hash.size() == 16, "malformed hash line");

  std::istringstream classes_line(next_line("class count"));
  std::size_t n_classes = 0;
  classes_line >> word >> n_classes;
  detail::require(word == "classes" && n_classes > 0, "malformed classes line");
  manifest.class_names.resize(n_classes);
  for (std::size_t i = 0; i < n_classes; ++i) {
    std::istringstream class_line(next_line("class name"));
    std::size_t index = 0;
    std::string name;
    class_line >> word >> index >> name;
    detail::require(word == "class" && index == i && !name.empty(), "malformed class line");
    manifest.class_names[i] = name;
  }

  std::istringstream samples_line(next_line("sample count"));
  std::size_t n_samples = 0;
  samples_line >> word >> n_samples;
  detail::require(word == "samples", "malformed samples line");
  manifest.entries.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    std::istringstream sample_line(next_line("sample entry"));
    ManifestEntry entry;
    sample_line >> word >> entry.class_index >> entry.path >> entry.seed;
    detail::require(word == "sample" && !sample_line.fail() && !entry.path.empty(),
                    "malformed sample line");
    detail::require(entry.class_index >= 0 &&
                        static_cast<std::size_t>(entry.class_index) < n_classes,
                    "sample class index out of range");
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

}  // namespace twr
