#include "zsl/synth.hpp"

#include <algorithm>
#include <cmath>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"
#include "zsl/rng.hpp"

namespace zsl {

Dataset gen_synthetic(const SynthConfig& cfg) {
  if (cfg.seen_classes < 2 || cfg.unseen_classes < 1) {
    throw InvalidArgument("gen_synthetic: need at least 2 seen and 1 unseen class");
  }
  if (cfg.attr_dim < 1 || cfg.latent_trait_dim < 1 || cfg.feature_dim < 1 ||
      cfg.samples_per_class < 1 || cfg.n_scales < 1) {
    throw InvalidArgument("gen_synthetic: all dimensions must be >= 1");
  }
  if (!(cfg.noise_sigma >= 0.0) || !(cfg.latent_amplitude >= 0.0)) {
    throw InvalidArgument("gen_synthetic: noise and amplitude must be >= 0");
  }

  const std::size_t n_classes = cfg.seen_classes + cfg.unseen_classes;
  const std::size_t n_samples = n_classes * cfg.samples_per_class;
  Rng rng(cfg.seed);

  Dataset ds;
  ds.attrs.class_ids.resize(n_classes);
  ds.attrs.values = Matrix(n_classes, cfg.attr_dim);
  for (std::size_t c = 0; c < n_classes; ++c) {
    ds.attrs.class_ids[c] = static_cast<ClassId>(c);
    for (std::size_t j = 0; j < cfg.attr_dim; ++j) ds.attrs.values(c, j) = rng.uniform01();
  }

  // Trait of a class: argmax over its leading attribute entries.
  const std::size_t trait_window = std::min(cfg.attr_dim, cfg.latent_trait_dim);
  std::vector<std::size_t> trait(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < trait_window; ++j) {
      if (ds.attrs.values(c, j) > ds.attrs.values(c, best)) best = j;
    }
    trait[c] = best;
  }

  std::vector<ClassId> labels;
  labels.reserve(n_samples);
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t m = 0; m < cfg.samples_per_class; ++m) {
      labels.push_back(static_cast<ClassId>(c));
    }
  }

  const double attr_scale = 1.0 / std::sqrt(static_cast<double>(cfg.attr_dim));
  const double trait_scale = 0.6;  // per-entry sd comparable to the attribute signal

  for (std::size_t s = 0; s < cfg.n_scales; ++s) {
    Matrix attr_map(cfg.feature_dim, cfg.attr_dim);
    for (std::size_t i = 0; i < attr_map.size(); ++i) {
      attr_map.data()[i] = attr_scale * rng.normal();
    }
    Matrix trait_map(cfg.feature_dim, cfg.latent_trait_dim);
    for (std::size_t i = 0; i < trait_map.size(); ++i) {
      trait_map.data()[i] = trait_scale * rng.normal();
    }

    FeatureSet fs_s;
    fs_s.scale_id = static_cast<int>(s) + 1;
    fs_s.labels = labels;
    fs_s.features = Matrix(n_samples, cfg.feature_dim);

    std::size_t row = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      // Class mean: attribute signal plus the trait column.
      std::vector<double> mean = matvec(attr_map, ds.attrs.values.row_span(c));
      for (std::size_t i = 0; i < cfg.feature_dim; ++i) {
        mean[i] += cfg.latent_amplitude * trait_map(i, trait[c]);
      }
      for (std::size_t m = 0; m < cfg.samples_per_class; ++m, ++row) {
        double* dst = fs_s.features.row(row);
        for (std::size_t i = 0; i < cfg.feature_dim; ++i) {
          dst[i] = mean[i] + (cfg.noise_sigma > 0.0 ? rng.normal(0.0, cfg.noise_sigma) : 0.0);
        }
      }
    }
    ds.scales.push_back(std::move(fs_s));
  }

  ds.split.seen_classes.resize(cfg.seen_classes);
  ds.split.unseen_classes.resize(cfg.unseen_classes);
  for (std::size_t c = 0; c < cfg.seen_classes; ++c) {
    ds.split.seen_classes[c] = static_cast<ClassId>(c);
  }
  for (std::size_t c = 0; c < cfg.unseen_classes; ++c) {
    ds.split.unseen_classes[c] = static_cast<ClassId>(cfg.seen_classes + c);
  }
  return ds;
}

}  // namespace zsl
