#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "twr/archive.hpp"
#include "twr/pipeline.hpp"
#include "twr/rng.hpp"

namespace fs = std::filesystem;
using namespace twr;

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, const std::string& default_out) {
  cmd->add_option("--config", flags.config_path, "key=value configuration file");
  cmd->add_option("--out", flags.out_dir, "output directory")->default_val(default_out);
  cmd->add_option("--seed", flags.seed, "override the config seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
}

/// Loads the config file (if any), applies flag overrides, and resolves the
/// pipeline config. Throws on any validation problem; callers map that to the
/// usage exit code.
std::pair<PipelineConfig, KeyValueConfig> resolve_config(
    const CommonFlags& flags, const std::vector<std::pair<std::string, std::string>>& overrides) {
  KeyValueConfig kv;
  if (!flags.config_path.empty()) kv = KeyValueConfig::load(flags.config_path);
  if (flags.seed_set) kv.set("seed", std::to_string(flags.seed));
  for (const auto& [key, value] : overrides) kv.set(key, value);
  return {PipelineConfig::from_config(kv), kv};
}

[[noreturn]] void fail(int code, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  throw CLI::RuntimeError(code);
}

std::string zero_padded(Index value, int width) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%0*lld", width, static_cast<long long>(value));
  return buffer;
}

MatrixXd flip_rows(const MatrixXd& m) { return m.colwise().reverse(); }

void run_simulate(const CommonFlags& flags, bool batch) {
  PipelineConfig cfg;
  KeyValueConfig kv;
  try {
    std::tie(cfg, kv) = resolve_config(flags, {});
  } catch (const std::exception& e) {
    fail(kExitUsage, e.what());
  }

  try {
    const fs::path out(flags.out_dir);
    fs::create_directories(out);
    if (!batch) {
      const RangeMap map = simulate_range_map(cfg.sweep, cfg.scene, cfg.channel);
      write_range_map_archive(out / "sample.rmap", map);
      std::cout << "wrote " << (out / "sample.rmap").string() << " (" << map.bins() << "x"
                << map.slow_samples() << ")\n";
      return;
    }

    DatasetManifest manifest;
    manifest.class_names = cfg.dataset_classes;
    manifest.config_hash = kv.content_hash();
    for (std::size_t c = 0; c < cfg.dataset_classes.size(); ++c) {
      const std::string& name = cfg.dataset_classes[c];
      const MotionTemplate motion = motion_template_from_string(name);
      const std::uint64_t class_tag = fnv1a_hash(name);
      fs::create_directories(out / name);
      for (Index i = 0; i < cfg.samples_per_class; ++i) {
        const std::uint64_t sample_seed =
            mix_seed(cfg.seed, class_tag, static_cast<std::uint64_t>(i) + 1);
        const SceneOptions scene = randomized_scene(cfg, motion, sample_seed);
        const RangeMap map = simulate_range_map(cfg.sweep, scene, cfg.channel);
        const std::string relative = name + "/s" + zero_padded(i, 3) + ".rmap";
        write_range_map_archive(out / relative, map);
        manifest.entries.push_back({static_cast<int>(c), relative, sample_seed});
      }
    }
    write_text_file(out / "manifest.txt", manifest.to_text());
    write_text_file(out / "config.txt", kv.canonical_text());
    std::cout << "wrote " << manifest.entries.size() << " archives and "
              << (out / "manifest.txt").string() << "\n";
  } catch (const CLI::RuntimeError&) {
    throw;
  } catch (const std::exception& e) {
    fail(kExitNumerical, e.what());
  }
}

void run_filter(const CommonFlags& flags, const std::string& input, const std::string& method,
                bool save_low) {
  PipelineConfig cfg;
  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    if (!method.empty()) overrides.emplace_back("filter.method", method);
    std::tie(cfg, std::ignore) = resolve_config(flags, overrides);
  } catch (const std::exception& e) {
    fail(kExitUsage, e.what());
  }

  try {
    const fs::path in_path(input);
    const fs::path out =
        flags.out_dir.empty() ? (in_path.has_parent_path() ? in_path.parent_path() : fs::path("."))
                              : fs::path(flags.out_dir);
    fs::create_directories(out);
    const std::string stem = in_path.stem().string() + "." + cfg.filter_method;
    const fs::path out_map = out / (stem + ".rmap");
    const fs::path out_diag = out / (stem + ".diag.txt");

    const RangeMap map = read_range_map_archive(in_path);
    std::string diag = "method " + cfg.filter_method + "\n" +
                       "rows " + std::to_string(map.bins()) + "\n" +
                       "cols " + std::to_string(map.slow_samples()) + "\n";

    if (cfg.filter_method == "none") {
      std::ifstream raw(in_path, std::ios::binary);
      std::string bytes((std::istreambuf_iterator<char>(raw)),
                        std::istreambuf_iterator<char>());
      write_text_file(out_map, bytes);
      write_text_file(out_diag, diag);
    } else if (cfg.filter_method == "mean_sub") {
      write_range_map_archive(out_map, mean_subtract(map));
      write_text_file(out_diag, diag);
    } else {
      const RpcaResult<double> result = rpca_decompose(map.data, cfg.rpca);
      RangeMap sparse{result.sparse, map.bin_spacing_m, map.prf_hz};
      write_range_map_archive(out_map, sparse);
      if (save_low) {
        RangeMap low{result.low_rank, map.bin_spacing_m, map.prf_hz};
        write_range_map_archive(out / (stem + ".low.rmap"), low);
      }
      const double lambda = cfg.rpca.lambda > 0.0
                                ? cfg.rpca.lambda
                                : default_lambda<double>(map.bins(), map.slow_samples());
      diag += "lambda " + twr::detail::format_double(lambda) + "\n";
      diag += "iterations " + std::to_string(result.iterations) + "\n";
      diag += "residual " + twr::detail::format_double(result.residual) + "\n";
      diag += "rank " + std::to_string(result.rank_estimate) + "\n";
      diag += std::string("converged ") + (result.converged ? "true" : "false") + "\n";
      write_text_file(out_diag, diag);
      if (!result.converged)
        fail(kExitNumerical, "rpca did not converge; diagnostics in " + out_diag.string());
    }
    std::cout << "wrote " << out_map.string() << "\n";
  } catch (const CLI::RuntimeError&) {
    throw;
  } catch (const std::exception& e) {
    fail(kExitNumerical, e.what());
  }
}

void run_spectrogram(const CommonFlags& flags, const std::string& input) {
  PipelineConfig cfg;
  try {
    std::tie(cfg, std::ignore) = resolve_config(flags, {});
  } catch (const std::exception& e) {
    fail(kExitUsage, e.what());
  }

  try {
    const fs::path in_path(input);
    const fs::path out =
        flags.out_dir.empty() ? (in_path.has_parent_path() ? in_path.parent_path() : fs::path("."))
                              : fs::path(flags.out_dir);
    fs::create_directories(out);

    const RangeMap map = read_range_map_archive(in_path);
    twr::detail::require(map.prf_hz > 0.0, "archive carries no prf");
    const RangeGate gate = select_range_gate(map, cfg.gate_energy_fraction);
    const VectorXcd stacked = cfg.stack_kind == "max" ? range_max_stack(map, gate)
                                                      : range_stack(map, gate);
    const Spectrogram spec = spectrogram(stacked, cfg.stft, map.prf_hz);

    const std::string stem = in_path.stem().string() + ".spec";
    write_text_file(out / (stem + ".csv"), spectrogram_csv(spec));
    // positive Doppler on top of the image
    write_pgm(out / (stem + ".pgm"), flip_rows(db_image(spec.data, cfg.export_floor_db, true)));
    std::cout << "gate [" << gate.m1 << ", " << gate.m2 << "], wrote "
              << (out / (stem + ".csv")).string() << "\n";
  } catch (const CLI::RuntimeError&) {
    throw;
  } catch (const std::exception& e) {
    fail(kExitNumerical, e.what());
  }
}

void run_classify(const CommonFlags& flags, const std::string& manifest_path,
                  const std::string& feature, const std::string& components, const std::string& k,
                  const std::string& train_frac) {
  PipelineConfig cfg;
  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    if (!feature.empty()) overrides.emplace_back("feature.kind", feature);
    if (!components.empty()) {
      overrides.emplace_back("classify.components_rangemap", components);
      overrides.emplace_back("classify.components_spectrogram", components);
    }
    if (!k.empty()) overrides.emplace_back("classify.k", k);
    if (!train_frac.empty()) overrides.emplace_back("classify.train_frac", train_frac);
    std::tie(cfg, std::ignore) = resolve_config(flags, overrides);
    if (!feature.empty()) feature_kind_from_string(feature);  // validate the name early
  } catch (const std::exception& e) {
    fail(kExitUsage, e.what());
  }

  try {
    const fs::path manifest_file(manifest_path);
    std::ifstream in(manifest_file);
    if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const DatasetManifest manifest = DatasetManifest::from_text(buffer.str());
    const fs::path base = manifest_file.has_parent_path() ? manifest_file.parent_path()
                                                          : fs::path(".");

    FeatureDatasets datasets;
    for (auto& dataset : datasets.by_kind) dataset.class_names = manifest.class_names;
    for (const auto& entry : manifest.entries) {
      const RangeMap raw = read_range_map_archive(base / entry.path);
      SampleFeatures features = compute_features(raw, cfg);
      for (std::size_t kind = 0; kind < 4; ++kind) {
        features.by_kind[kind].label = entry.class_index;
        datasets.by_kind[kind].samples.push_back(std::move(features.by_kind[kind]));
      }
    }

    std::vector<FeatureKind> kinds;
    if (feature.empty()) {
      kinds = {FeatureKind::mean_sub_rangemap, FeatureKind::rpca_rangemap,
               FeatureKind::mean_sub_spectrogram, FeatureKind::rpca_spectrogram};
    } else {
      kinds = {feature_kind_from_string(feature)};
    }

    const fs::path out(flags.out_dir);
    fs::create_directories(out);
    std::string summary = "feature  mean    min     max     seeds\n";
    for (const FeatureKind kind : kinds) {
      const LabeledDataset& dataset = datasets[kind];
      ConfusionMatrix pooled;
      pooled.counts = MatrixXd::Zero(static_cast<Index>(manifest.class_names.size()),
                                     static_cast<Index>(manifest.class_names.size()));
      double lo = 1.0;
      double hi = 0.0;
      double sum = 0.0;
      for (int s = 0; s < cfg.eval_seeds; ++s) {
        const EvaluationResult result =
            evaluate_split(dataset, cfg.train_frac,
                           mix_seed(cfg.seed, 0x4556414cULL, static_cast<std::uint64_t>(s)),
                           cfg.components_for(kind), cfg.knn_k);
        pooled.counts += result.confusion.counts;
        lo = std::min(lo, result.accuracy);
        hi = std::max(hi, result.accuracy);
        sum += result.accuracy;
        write_text_file(out / ("confusion_" + to_string(kind) + "_seed" + std::to_string(s) +
                               ".csv"),
                        confusion_csv(result.confusion, manifest.class_names));
      }
      write_text_file(out / ("confusion_" + to_string(kind) + "_mean.txt"),
                      confusion_text(pooled, manifest.class_names));
      write_text_file(out / ("confusion_" + to_string(kind) + "_mean.csv"),
                      confusion_csv(pooled, manifest.class_names));
      char line[128];
      std::snprintf(line, sizeof(line), "%-8s %.4f  %.4f  %.4f  %d\n", to_string(kind).c_str(),
                    sum / cfg.eval_seeds, lo, hi, cfg.eval_seeds);
      summary += line;
      std::cout << to_string(kind) << " mean accuracy "
                << twr::detail::format_double(sum / cfg.eval_seeds) << "\n";
    }
    write_text_file(out / "accuracy_summary.txt", summary);
  } catch (const CLI::RuntimeError&) {
    throw;
  } catch (const std::exception& e) {
    fail(kExitNumerical, e.what());
  }
}

void run_export(const CommonFlags& flags, const std::string& input) {
  PipelineConfig cfg;
  try {
    std::tie(cfg, std::ignore) = resolve_config(flags, {});
  } catch (const std::exception& e) {
    fail(kExitUsage, e.what());
  }

  try {
    const fs::path in_path(input);
    const fs::path out =
        flags.out_dir.empty() ? (in_path.has_parent_path() ? in_path.parent_path() : fs::path("."))
                              : fs::path(flags.out_dir);
    fs::create_directories(out);
    const RangeMap map = read_range_map_archive(in_path);
    const std::string stem = in_path.stem().string();
    write_text_file(out / (stem + ".csv"), range_map_csv(map));
    write_pgm(out / (stem + ".pgm"),
              db_image(map.data.cwiseAbs(), cfg.export_floor_db, false));
    std::cout << "wrote " << (out / (stem + ".csv")).string() << " and "
              << (out / (stem + ".pgm")).string() << "\n";
  } catch (const CLI::RuntimeError&) {
    throw;
  } catch (const std::exception& e) {
    fail(kExitNumerical, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"through-wall human-motion radar pipeline"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  bool batch = false;
  auto* sim = app.add_subcommand("simulate", "synthesize range-map archives");
  add_common(sim, sim_flags, "out");
  sim->add_flag("--batch", batch, "generate the full labeled dataset plus manifest");
  sim->callback([&]() { run_simulate(sim_flags, batch); });

  CommonFlags filter_flags;
  std::string filter_input;
  std::string filter_method;
  bool save_low = false;
  auto* filter = app.add_subcommand("filter", "suppress stationary clutter in an archive");
  add_common(filter, filter_flags, "");
  filter->add_option("input", filter_input, "range-map archive")->required();
  filter->add_option("--method", filter_method, "none, mean_sub, or rpca");
  filter->add_flag("--save-low", save_low, "also write the low-rank background archive");
  filter->callback([&]() { run_filter(filter_flags, filter_input, filter_method, save_low); });

  CommonFlags spec_flags;
  std::string spec_input;
  auto* spec = app.add_subcommand("spectrogram", "micro-Doppler spectrogram of an archive");
  add_common(spec, spec_flags, "");
  spec->add_option("input", spec_input, "range-map archive")->required();
  spec->callback([&]() { run_spectrogram(spec_flags, spec_input); });

  CommonFlags cls_flags;
  std::string manifest_path;
  std::string feature;
  std::string components;
  std::string k;
  std::string train_frac;
  auto* cls = app.add_subcommand("classify", "evaluate the kNN protocol over a dataset");
  add_common(cls, cls_flags, "classify_out");
  cls->add_option("manifest", manifest_path, "dataset manifest")->required();
  cls->add_option("--feature", feature, "ms_rm, rpca_rm, ms_spec, or rpca_spec (default all)");
  cls->add_option("--components", components, "projection component count override");
  cls->add_option("--k", k, "neighbor count override");
  cls->add_option("--train-frac", train_frac, "training fraction override");
  cls->callback([&]() { run_classify(cls_flags, manifest_path, feature, components, k, train_frac); });

  CommonFlags export_flags;
  std::string export_input;
  auto* exp = app.add_subcommand("export", "render an archive to CSV and graymap");
  add_common(exp, export_flags, "");
  exp->add_option("input", export_input, "range-map archive")->required();
  exp->callback([&]() { run_export(export_flags, export_input); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  return 0;
}
