#ifndef ZSL_EMBEDDING_HPP_
#define ZSL_EMBEDDING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "zsl/core.hpp"
#include "zsl/matrix.hpp"
#include "zsl/rng.hpp"

namespace zsl {

enum class TripletStrategy { kRandom, kSemiHard };

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  double margin = 1.0;
  TripletStrategy triplet_strategy = TripletStrategy::kRandom;
  std::uint64_t seed = 0;
  double att_weight = 1.0;  // weight of the softmax term
  double lat_weight = 1.0;  // weight of the triplet term
  double momentum = 0.0;    // 0 keeps plain fixed-rate SGD
  std::size_t latent_dim = 0;  // 0 means same as the attribute dimension
};

struct EpochRecord {
  int epoch;
  int scale_id;
  double att_loss;
  double lat_loss;
  double total;
};

struct TrainReport {
  std::vector<EpochRecord> records;

  // Mean loss of one scale at one epoch; returns nullptr when absent.
  const EpochRecord* find(int epoch, int scale_id) const;
};

// Learned 2k -> k projection combining two scales of UA features.
struct MultiScaleCombiner {
  Matrix w_com;  // 2k x k

  std::vector<double> apply(std::span<const double> ua_s1, std::span<const double> ua_s2) const;
};

// s_c = <w^T feature, a_c> for every class row of attrs.
std::vector<double> compatibility_scores(const Matrix& w, std::span<const double> feature,
                                         const AttributeMatrix& attrs);

struct SoftmaxLossResult {
  double loss = 0.0;
  Matrix d_w;         // same shape as w
  Matrix d_features;  // same shape as the batch features
};

// Mean negative log softmax of the true-class compatibility over the batch.
// Feature gradients are returned so callers can chain into the zoom kernel.
SoftmaxLossResult softmax_loss_grad(const Matrix& w, const Matrix& features,
                                    std::span<const ClassId> labels,
                                    const AttributeMatrix& attrs);

struct TripletLossResult {
  double loss = 0.0;
  std::vector<double> d_anchor;
  std::vector<double> d_positive;
  std::vector<double> d_negative;
};

// max(0, margin + ||a-p||^2 - ||a-n||^2); gradients vanish when inactive.
TripletLossResult triplet_loss_grad(std::span<const double> anchor,
                                    std::span<const double> positive,
                                    std::span<const double> negative, double margin);

struct TripletIndices {
  std::size_t anchor;
  std::size_t positive;
  std::size_t negative;
};

// One triplet per anchor that has an in-batch positive. Random strategy draws
// positive and negative uniformly; semi-hard picks the closest negative
// farther than the positive (falling back to the farthest negative) and needs
// the batch's latent features, one row per sample. Returns an empty list when
// no valid triplet exists.
std::vector<TripletIndices> sample_triplets(std::span<const ClassId> labels,
                                            const Matrix* lat_features, TripletStrategy strategy,
                                            Rng& rng);

// One mini-batch of one scale with its triplet set frozen.
struct ScaleBatch {
  Matrix features;  // B x d
  std::vector<ClassId> labels;
  std::vector<TripletIndices> triplets;
};

struct ObjectiveResult {
  std::vector<double> att_loss;  // per scale
  std::vector<double> lat_loss;  // per scale
  double total = 0.0;
  std::vector<Matrix> d_w_att;
  std::vector<Matrix> d_w_lat;
};

// Weighted sum over scales of softmax + triplet losses with exact gradients
// for every projection matrix. Deterministic given the frozen triplets.
ObjectiveResult total_loss_grad(const std::vector<EmbeddingModel>& models,
                                const std::vector<ScaleBatch>& batches,
                                const AttributeMatrix& seen_attrs, double att_weight,
                                double lat_weight, double margin = 1.0);

struct TrainResult {
  std::vector<EmbeddingModel> models;  // one per scale
  TrainReport report;
};

// Joint mini-batch SGD over all scales. Deterministic per seed: weight init,
// epoch shuffling and triplet draws all come from one seeded stream.
TrainResult train(const std::vector<FeatureSet>& features, const AttributeMatrix& seen_attrs,
                  const TrainConfig& cfg);

// Trains w_com with the softmax loss on concatenated per-scale UA features;
// the per-scale models stay frozen. `init` overrides the seeded weight init.
MultiScaleCombiner train_combiner(const Matrix& ua_s1, const Matrix& ua_s2,
                                  std::span<const ClassId> labels,
                                  const AttributeMatrix& seen_attrs, const TrainConfig& cfg,
                                  const MultiScaleCombiner* init = nullptr);

// Concatenation of the two l2-normalized latent features.
std::vector<double> combine_la(std::span<const double> lat_s1, std::span<const double> lat_s2);

}  // namespace zsl

#endif  // ZSL_EMBEDDING_HPP_
