// Command-line surface for the zero-shot pipeline: synthetic data generation,
// validation, training, prototype transfer, prediction and evaluation.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zsl/error.hpp"
#include "zsl/io.hpp"
#include "zsl/log.hpp"
#include "zsl/pipeline.hpp"
#include "zsl/predict_eval.hpp"
#include "zsl/synth.hpp"
#include "zsl/zoom_kernel.hpp"

namespace fs = std::filesystem;
using namespace zsl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

PredictionSpace space_from_flag(const std::string& s) {
  if (s == "ua") return PredictionSpace::kUA;
  if (s == "la") return PredictionSpace::kLA;
  if (s == "ua+la" || s == "combined") return PredictionSpace::kCombined;
  throw InvalidArgument("unknown space '" + s + "' (use ua | la | ua+la)");
}

// scale flag: "multi" or a 1-based scale number.
int scale_from_flag(const std::string& s) {
  if (s == "multi") return kMultiScale;
  const int v = std::stoi(s);
  if (v < 1) throw InvalidArgument("scale must be 'multi' or a 1-based index");
  return v - 1;
}

// Single-scale datasets cannot run the multi-scale path; fall back silently.
int effective_scale(int scale, std::size_t n_scales) {
  if (scale == kMultiScale && n_scales < 2) return 0;
  return scale;
}

struct ConfigArgs {
  std::string config_path;
  std::string space_flag;
  std::string scale_flag = "multi";
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  std::string out_dir_override;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args, bool with_space = true) {
  cmd->add_option("--config", args.config_path, "run configuration (json)")->required();
  if (with_space) {
    cmd->add_option("--space", args.space_flag, "prediction space: ua | la | ua+la");
  }
  cmd->add_option("--scale", args.scale_flag, "scale: 'multi' or 1-based index");
  cmd->add_option("--seed", args.seed_override, "override train.seed")
      ->each([&args](const std::string&) { args.has_seed_override = true; });
  cmd->add_option("--out-dir", args.out_dir_override, "override output directory");
}

RunConfig load_config_or_exit(const ConfigArgs& args) {
  RunConfig cfg = load_run_config(args.config_path);
  if (!args.space_flag.empty()) cfg.space = space_from_flag(args.space_flag);
  if (args.has_seed_override) cfg.train.seed = args.seed_override;
  if (!args.out_dir_override.empty()) cfg.out_dir = args.out_dir_override;
  return cfg;
}

Dataset load_validated(const RunConfig& cfg) {
  Dataset ds = load_dataset(cfg);
  const ValidationReport report = validate_dataset(ds.scales, ds.attrs, ds.split);
  if (!report.ok()) {
    throw DataError("dataset failed validation:\n" + report.to_string());
  }
  return ds;
}

void write_grid_csv(const ImageGrid& grid, std::size_t channel, const std::string& path) {
  Matrix m(grid.height, grid.width);
  for (std::size_t i = 0; i < grid.height; ++i) {
    for (std::size_t j = 0; j < grid.width; ++j) m(i, j) = grid.at(channel, i, j);
  }
  save_matrix(m, path);
}

int cmd_gen_synth(const SynthConfig& synth, const std::string& out_dir) {
  const Dataset ds = gen_synthetic(synth);
  fs::create_directories(out_dir);

  RunConfig cfg;
  for (const FeatureSet& fs_s : ds.scales) {
    const std::string path =
        (fs::path(out_dir) / ("features_s" + std::to_string(fs_s.scale_id) + ".zslm")).string();
    save_matrix(fs_s.features, path);
    cfg.scale_paths.push_back(path);
  }
  Matrix labels(ds.scales[0].labels.size(), 1);
  for (std::size_t i = 0; i < ds.scales[0].labels.size(); ++i) {
    labels(i, 0) = static_cast<double>(ds.scales[0].labels[i]);
  }
  cfg.labels_path = (fs::path(out_dir) / "labels.zslm").string();
  save_matrix(labels, cfg.labels_path);
  cfg.attrs_path = (fs::path(out_dir) / "attrs.zslm").string();
  save_matrix(ds.attrs.values, cfg.attrs_path);
  cfg.split_path = (fs::path(out_dir) / "split.json").string();
  save_split(ds.split, cfg.split_path);

  cfg.out_dir = (fs::path(out_dir) / "out").string();
  cfg.train.seed = synth.seed;
  save_run_config(cfg, (fs::path(out_dir) / "run.json").string());

  std::printf("wrote dataset (%zu scales, %zu samples, %zu classes) and run.json under %s\n",
              ds.scales.size(), ds.scales[0].count(),
              ds.split.seen_classes.size() + ds.split.unseen_classes.size(), out_dir.c_str());
  return kExitOk;
}

int cmd_validate(const RunConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  const ValidationReport report = validate_dataset(ds.scales, ds.attrs, ds.split);
  std::fputs(report.to_string().c_str(), stdout);
  return report.ok() ? kExitOk : kExitFailure;
}

int cmd_train(const RunConfig& cfg) {
  const Dataset ds = load_validated(cfg);
  const TrainedArtifacts art = run_train(ds, cfg.train);
  save_models(art.models, art.has_combiner ? &art.combiner : nullptr, cfg.out_dir);
  save_train_report(art.report, (fs::path(cfg.out_dir) / "train_report.csv").string());
  const EpochRecord& last = art.report.records.back();
  std::printf("trained %zu scale(s), %d epochs; final epoch scale %d: att=%.6f lat=%.6f\n",
              art.models.size(), cfg.train.epochs, last.scale_id, last.att_loss, last.lat_loss);
  return kExitOk;
}

TrainedArtifacts load_artifacts(const RunConfig& cfg) {
  LoadedModels loaded = load_models(cfg.out_dir);
  TrainedArtifacts art;
  art.models = std::move(loaded.models);
  art.combiner = std::move(loaded.combiner);
  art.has_combiner = loaded.has_combiner;
  return art;
}

int cmd_transfer(const RunConfig& cfg, int scale, bool normalize_first) {
  const Dataset ds = load_validated(cfg);
  const TrainedArtifacts art = load_artifacts(cfg);
  scale = effective_scale(scale, art.models.size());
  const PrototypeBundle bundle = build_prototypes(ds, art, cfg.transfer, scale, normalize_first);
  save_prototypes(bundle.seen, (fs::path(cfg.out_dir) / "prototypes_seen.json").string());
  save_prototypes(bundle.unseen, (fs::path(cfg.out_dir) / "prototypes_unseen.json").string());
  save_matrix(bundle.weights.betas, (fs::path(cfg.out_dir) / "transfer_betas.zslm").string());
  std::printf("prototypes: %zu seen (empirical), %zu unseen (transferred, lambda=%g)\n",
              bundle.seen.class_ids.size(), bundle.unseen.class_ids.size(), cfg.transfer.lambda);
  return kExitOk;
}

int cmd_predict(const RunConfig& cfg, int scale) {
  const Dataset ds = load_validated(cfg);
  const TrainedArtifacts art = load_artifacts(cfg);
  scale = effective_scale(scale, art.models.size());
  const EvalResult result = run_eval(ds, art, cfg.transfer, cfg.space, scale,
                                     cfg.normalize_prototypes);
  const std::string path = (fs::path(cfg.out_dir) / "predictions.csv").string();
  save_predictions(result.sample_ids, result.labels, result.predictions, result.space, path);
  std::printf("wrote %zu predictions (%s space) to %s\n", result.predictions.size(),
              to_string(result.space), path.c_str());
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, int scale) {
  const Dataset ds = load_validated(cfg);
  const TrainedArtifacts art = load_artifacts(cfg);
  scale = effective_scale(scale, art.models.size());
  const EvalResult result = run_eval(ds, art, cfg.transfer, cfg.space, scale,
                                     cfg.normalize_prototypes);
  const std::string name = std::string("eval_") +
                           (cfg.space == PredictionSpace::kCombined ? "ua_la" : to_string(cfg.space)) +
                           ".csv";
  save_mca_report(result.report, (fs::path(cfg.out_dir) / name).string());
  std::printf("space=%s scale=%s mca=%.4f%% (%zu classes, %zu samples)\n", to_string(cfg.space),
              scale == kMultiScale ? "multi" : std::to_string(scale + 1).c_str(),
              result.report.mca, result.report.class_ids.size(), result.labels.size());
  return kExitOk;
}

int cmd_gzsl(const RunConfig& cfg, int scale) {
  const Dataset ds = load_validated(cfg);
  scale = effective_scale(scale, ds.scales.size());
  const GzslReport report = run_gzsl(ds, cfg.train, cfg.transfer, cfg.space, cfg.gzsl_holdout,
                                     scale, cfg.normalize_prototypes);
  std::printf("A_U->T=%.4f%% A_S->T=%.4f%% H=%.4f%%\n", report.acc_unseen_to_joint,
              report.acc_seen_to_joint, report.harmonic);
  fs::create_directories(cfg.out_dir);
  std::string csv = "metric,value\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "acc_unseen_to_joint,%.17g\n", report.acc_unseen_to_joint);
  csv += buf;
  std::snprintf(buf, sizeof buf, "acc_seen_to_joint,%.17g\n", report.acc_seen_to_joint);
  csv += buf;
  std::snprintf(buf, sizeof buf, "harmonic_mean,%.17g\n", report.harmonic);
  csv += buf;
  std::ofstream out((fs::path(cfg.out_dir) / "gzsl.csv").string());
  out << csv;
  return kExitOk;
}

int cmd_report(const RunConfig& cfg, int scale, const std::string& space_flag,
               std::size_t element, std::size_t top_k) {
  const Dataset ds = load_validated(cfg);
  const TrainedArtifacts art = load_artifacts(cfg);
  const int s = scale == kMultiScale ? 0 : scale;
  const PredictionSpace space = space_from_flag(space_flag);
  if (space == PredictionSpace::kCombined) {
    throw InvalidArgument("activation report needs --space ua or --space la");
  }
  const FeatureSet& fs_s = ds.scales.at(static_cast<std::size_t>(s));
  const ActivationReport report = activation_report(
      art.models.at(static_cast<std::size_t>(s)), fs_s.features, fs_s.labels, space, element,
      top_k);

  std::printf("%s element %zu, scale %d: top-%zu activations\n", to_string(space), element, s + 1,
              report.largest.size());
  std::printf("%-10s %-8s %-8s %s\n", "rank", "sample", "class", "value");
  for (std::size_t i = 0; i < report.largest.size(); ++i) {
    std::printf("largest-%-3zu %-8zu %-8d %.6f\n", i + 1, report.largest[i].sample,
                report.largest[i].label, report.largest[i].value);
  }
  for (std::size_t i = 0; i < report.smallest.size(); ++i) {
    std::printf("smallest-%-2zu %-8zu %-8d %.6f\n", i + 1, report.smallest[i].sample,
                report.smallest[i].label, report.smallest[i].value);
  }

  fs::create_directories(cfg.out_dir);
  std::string csv = "rank,kind,sample,class,value\n";
  char buf[96];
  for (std::size_t i = 0; i < report.largest.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,largest,%zu,%d,%.17g\n", i + 1, report.largest[i].sample,
                  report.largest[i].label, report.largest[i].value);
    csv += buf;
  }
  for (std::size_t i = 0; i < report.smallest.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,smallest,%zu,%d,%.17g\n", i + 1,
                  report.smallest[i].sample, report.smallest[i].label, report.smallest[i].value);
    csv += buf;
  }
  std::ofstream out((fs::path(cfg.out_dir) / "activation_report.csv").string());
  out << csv;
  return kExitOk;
}

int cmd_zoom_demo(std::size_t height, std::size_t width, const ZoomParams& zoom,
                  const MaskConfig& mask_cfg, const std::string& input,
                  const std::string& out_dir) {
  ImageGrid image;
  if (!input.empty()) {
    const Matrix m = load_matrix(input);
    image = ImageGrid(m.rows(), m.cols(), 1);
    for (std::size_t i = 0; i < m.size(); ++i) image.values[i] = m.data()[i];
  } else {
    // Default demo image: a gaussian bump off center plus a faint gradient.
    image = ImageGrid(height, width, 1);
    for (std::size_t i = 0; i < height; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        const double dy = (static_cast<double>(i) + 0.5) / height - 0.3;
        const double dx = (static_cast<double>(j) + 0.5) / width - 0.7;
        image.at(0, i, j) =
            std::exp(-(dx * dx + dy * dy) / 0.02) + 0.05 * static_cast<double>(i + j) / (height + width);
      }
    }
  }

  const SoftMask mask = soft_mask(zoom, mask_cfg, image.height, image.width);
  const ImageGrid crop = apply_mask(image, mask);
  const ImageGrid zoomed = bilinear_zoom(crop, zoom, image.height, image.width);

  fs::create_directories(out_dir);
  save_matrix(mask.values, (fs::path(out_dir) / "mask.csv").string());
  write_grid_csv(image, 0, (fs::path(out_dir) / "image.csv").string());
  write_grid_csv(crop, 0, (fs::path(out_dir) / "crop.csv").string());
  write_grid_csv(zoomed, 0, (fs::path(out_dir) / "zoomed.csv").string());

  const ZoomParams suggested = window_search(image, 0.5);
  std::printf("zoom=(%.3f, %.3f, %.3f) k_eff=%.2f; window-search suggests (%.3f, %.3f, %.3f)\n",
              zoom.z_x, zoom.z_y, zoom.z_s,
              mask_cfg.effective_steepness(image.height, image.width), suggested.z_x,
              suggested.z_y, suggested.z_s);
  std::printf("wrote mask.csv, image.csv, crop.csv, zoomed.csv under %s\n", out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent discriminative features zero-shot learning pipeline"};
  app.require_subcommand(1);

  // gen-synth
  SynthConfig synth;
  std::string gen_out = "data";
  CLI::App* gen = app.add_subcommand("gen-synth", "generate a synthetic dataset + run.json");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", synth.seed, "generator seed");
  gen->add_option("--seen", synth.seen_classes, "seen class count");
  gen->add_option("--unseen", synth.unseen_classes, "unseen class count");
  gen->add_option("--attr-dim", synth.attr_dim, "attribute dimension k");
  gen->add_option("--latent-trait-dim", synth.latent_trait_dim, "latent trait count");
  gen->add_option("--feature-dim", synth.feature_dim, "feature dimension d");
  gen->add_option("--samples", synth.samples_per_class, "samples per class");
  gen->add_option("--scales", synth.n_scales, "number of scales");
  gen->add_option("--noise", synth.noise_sigma, "feature noise sigma");
  gen->add_option("--amplitude", synth.latent_amplitude, "latent trait amplitude");

  ConfigArgs validate_args;
  CLI::App* validate = app.add_subcommand("validate", "check a dataset for violations");
  add_config_options(validate, validate_args, /*with_space=*/false);

  ConfigArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train per-scale models + combiner");
  add_config_options(train_cmd, train_args, /*with_space=*/false);

  ConfigArgs transfer_args;
  bool transfer_normalize = false;
  CLI::App* transfer_cmd =
      app.add_subcommand("transfer", "build seen/unseen latent prototypes");
  add_config_options(transfer_cmd, transfer_args, /*with_space=*/false);
  transfer_cmd->add_flag("--normalize-first", transfer_normalize,
                         "l2-normalize latent features before averaging");

  ConfigArgs predict_args;
  CLI::App* predict_cmd = app.add_subcommand("predict", "write per-sample predictions");
  add_config_options(predict_cmd, predict_args);

  ConfigArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "conventional ZSL evaluation (MCA)");
  add_config_options(eval_cmd, eval_args);

  ConfigArgs gzsl_args;
  CLI::App* gzsl_cmd = app.add_subcommand("gzsl-eval", "generalized ZSL evaluation");
  add_config_options(gzsl_cmd, gzsl_args);

  ConfigArgs report_args;
  std::string report_space = "la";
  std::size_t report_element = 0;
  std::size_t report_top_k = 5;
  CLI::App* report_cmd = app.add_subcommand("report", "attribute activation report");
  add_config_options(report_cmd, report_args, /*with_space=*/false);
  report_cmd->add_option("--report-space", report_space, "ua | la");
  report_cmd->add_option("--element", report_element, "embedded feature element index");
  report_cmd->add_option("--top-k", report_top_k, "entries per direction");

  std::size_t demo_h = 28;
  std::size_t demo_w = 28;
  ZoomParams demo_zoom{0.7, 0.3, 0.4};
  MaskConfig demo_mask;
  std::string demo_input;
  std::string demo_out = "zoom-demo";
  bool demo_no_rescale = false;
  CLI::App* demo = app.add_subcommand("zoom-demo", "emit mask / crop / zoom grids as csv");
  demo->add_option("--height", demo_h, "grid height");
  demo->add_option("--width", demo_w, "grid width");
  demo->add_option("--zx", demo_zoom.z_x, "crop center x");
  demo->add_option("--zy", demo_zoom.z_y, "crop center y");
  demo->add_option("--zs", demo_zoom.z_s, "crop side");
  demo->add_option("--steepness", demo_mask.steepness, "mask steepness k");
  demo->add_flag("--no-rescale", demo_no_rescale, "disable resolution rescaling of k");
  demo->add_option("--input", demo_input, "input grid (.csv or .zslm), single channel");
  demo->add_option("--out", demo_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_synth(synth, gen_out);
    if (demo->parsed()) {
      demo_mask.rescale_steepness = !demo_no_rescale;
      return cmd_zoom_demo(demo_h, demo_w, demo_zoom, demo_mask, demo_input, demo_out);
    }

    const ConfigArgs* args = nullptr;
    if (validate->parsed()) args = &validate_args;
    if (train_cmd->parsed()) args = &train_args;
    if (transfer_cmd->parsed()) args = &transfer_args;
    if (predict_cmd->parsed()) args = &predict_args;
    if (eval_cmd->parsed()) args = &eval_args;
    if (gzsl_cmd->parsed()) args = &gzsl_args;
    if (report_cmd->parsed()) args = &report_args;

    RunConfig cfg;
    int scale = kMultiScale;
    try {
      cfg = load_config_or_exit(*args);
      scale = scale_from_flag(args->scale_flag);
    } catch (const Error& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kExitUsage;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kExitUsage;
    }

    if (validate->parsed()) return cmd_validate(cfg);
    if (train_cmd->parsed()) return cmd_train(cfg);
    if (transfer_cmd->parsed()) return cmd_transfer(cfg, scale, transfer_normalize);
    if (predict_cmd->parsed()) return cmd_predict(cfg, scale);
    if (eval_cmd->parsed()) return cmd_eval(cfg, scale);
    if (gzsl_cmd->parsed()) return cmd_gzsl(cfg, scale);
    if (report_cmd->parsed()) {
      return cmd_report(cfg, scale, report_space, report_element, report_top_k);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitOk;
}
