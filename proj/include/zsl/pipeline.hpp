#ifndef ZSL_PIPELINE_HPP_
#define ZSL_PIPELINE_HPP_

#include <cstddef>
#include <vector>

#include "zsl/core.hpp"
#include "zsl/embedding.hpp"
#include "zsl/io.hpp"
#include "zsl/predict_eval.hpp"
#include "zsl/transfer.hpp"

// End-to-end runs shared by the CLI and the acceptance suite. Multi-scale
// paths use the first two scales; pass a zero-based scale index to stay on a
// single scale (kMultiScale selects the combined path).

namespace zsl {

inline constexpr int kMultiScale = -1;

struct TrainedArtifacts {
  std::vector<EmbeddingModel> models;
  MultiScaleCombiner combiner;
  bool has_combiner = false;
  TrainReport report;
};

// Trains the per-scale models on seen-class samples, then the combiner on
// their frozen UA features when two scales are available.
TrainedArtifacts run_train(const Dataset& ds, const TrainConfig& cfg);

struct PrototypeBundle {
  PrototypeSet seen;
  PrototypeSet unseen;
  TransferWeights weights;
};

// Seen empirical means and ridge-transferred unseen prototypes, living in the
// chosen scale's LA space, or in the concatenated-normalized LA space for
// kMultiScale.
PrototypeBundle build_prototypes(const Dataset& ds, const TrainedArtifacts& art,
                                 const TransferConfig& cfg, int scale = kMultiScale,
                                 bool normalize_first = false);

struct EvalResult {
  McaReport report;
  std::vector<std::size_t> sample_ids;
  std::vector<ClassId> labels;
  std::vector<ClassId> predictions;
  PredictionSpace space = PredictionSpace::kCombined;
};

// Conventional ZSL: classify every unseen-class sample over the unseen label
// set in the requested space.
EvalResult run_eval(const Dataset& ds, const TrainedArtifacts& art, const TransferConfig& cfg,
                    PredictionSpace space, int scale = kMultiScale,
                    bool normalize_prototypes = false);

// Generalized ZSL: a seeded per-class holdout of seen samples is excluded
// from training and classified, together with all unseen samples, over the
// joint label space.
GzslReport run_gzsl(const Dataset& ds, const TrainConfig& train_cfg,
                    const TransferConfig& transfer_cfg,
                    PredictionSpace space = PredictionSpace::kCombined,
                    double holdout_frac = 0.2, int scale = kMultiScale,
                    bool normalize_prototypes = false);

// Seen-class subset of a dataset (samples only; attrs and split untouched).
Dataset seen_subset(const Dataset& ds);

}  // namespace zsl

#endif  // ZSL_PIPELINE_HPP_
