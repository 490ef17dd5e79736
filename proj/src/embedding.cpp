#include "zsl/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"
#include "zsl/log.hpp"

namespace zsl {

const EpochRecord* TrainReport::find(int epoch, int scale_id) const {
  for (const auto& r : records) {
    if (r.epoch == epoch && r.scale_id == scale_id) return &r;
  }
  return nullptr;
}

std::vector<double> MultiScaleCombiner::apply(std::span<const double> ua_s1,
                                              std::span<const double> ua_s2) const {
  if (ua_s1.size() + ua_s2.size() != w_com.rows()) {
    throw InvalidArgument("combiner: concatenated UA length " +
                          std::to_string(ua_s1.size() + ua_s2.size()) + " != w_com rows " +
                          std::to_string(w_com.rows()));
  }
  std::vector<double> concat;
  concat.reserve(w_com.rows());
  concat.insert(concat.end(), ua_s1.begin(), ua_s1.end());
  concat.insert(concat.end(), ua_s2.begin(), ua_s2.end());
  return matvec_t(w_com, concat);
}

std::vector<double> compatibility_scores(const Matrix& w, std::span<const double> feature,
                                         const AttributeMatrix& attrs) {
  if (feature.size() != w.rows()) {
    throw InvalidArgument("compatibility_scores: feature dim " + std::to_string(feature.size()) +
                          " != projection rows " + std::to_string(w.rows()));
  }
  if (attrs.dim() != w.cols()) {
    throw InvalidArgument("compatibility_scores: attribute dim " + std::to_string(attrs.dim()) +
                          " != projection cols " + std::to_string(w.cols()));
  }
  const std::vector<double> proj = matvec_t(w, feature);
  return matvec(attrs.values, proj);
}

SoftmaxLossResult softmax_loss_grad(const Matrix& w, const Matrix& features,
                                    std::span<const ClassId> labels,
                                    const AttributeMatrix& attrs) {
  const std::size_t batch = features.rows();
  if (labels.size() != batch) {
    throw InvalidArgument("softmax_loss_grad: label count does not match batch size");
  }
  if (batch == 0) throw InvalidArgument("softmax_loss_grad: empty batch");
  if (features.cols() != w.rows() || attrs.dim() != w.cols()) {
    throw InvalidArgument("softmax_loss_grad: dimension mismatch between w, features and attrs");
  }

  std::unordered_map<ClassId, std::size_t> row_of;
  row_of.reserve(attrs.num_classes());
  for (std::size_t r = 0; r < attrs.num_classes(); ++r) row_of[attrs.class_ids[r]] = r;

  const std::size_t n_classes = attrs.num_classes();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  SoftmaxLossResult result;
  result.d_w = Matrix(w.rows(), w.cols());
  result.d_features = Matrix(features.rows(), features.cols());

  std::vector<double> probs(n_classes);
  for (std::size_t i = 0; i < batch; ++i) {
    const auto it = row_of.find(labels[i]);
    if (it == row_of.end()) {
      throw InvalidArgument("softmax_loss_grad: label " + std::to_string(labels[i]) +
                            " has no attribute row");
    }
    const std::size_t true_row = it->second;

    const std::vector<double> proj = matvec_t(w, features.row_span(i));
    const std::vector<double> scores = matvec(attrs.values, proj);

    const double max_score = *std::max_element(scores.begin(), scores.end());
    double denom = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      probs[c] = std::exp(scores[c] - max_score);
      denom += probs[c];
    }
    result.loss += (std::log(denom) - (scores[true_row] - max_score)) * inv_batch;

    // d(loss)/d(score_c) = (p_c - 1{c==y}) / batch
    for (std::size_t c = 0; c < n_classes; ++c) probs[c] = probs[c] / denom * inv_batch;
    probs[true_row] -= inv_batch;

    const std::vector<double> d_proj = matvec_t(attrs.values, probs);
    add_outer(result.d_w, 1.0, features.row_span(i), d_proj);
    const std::vector<double> d_feat = matvec(w, d_proj);
    std::memcpy(result.d_features.row(i), d_feat.data(), d_feat.size() * sizeof(double));
  }
  return result;
}

TripletLossResult triplet_loss_grad(std::span<const double> anchor,
                                    std::span<const double> positive,
                                    std::span<const double> negative, double margin) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size()) {
    throw InvalidArgument("triplet_loss_grad: vectors must have equal dimensions");
  }
  const std::size_t dim = anchor.size();
  const double d_pos = kernels::sq_dist(anchor.data(), positive.data(), dim);
  const double d_neg = kernels::sq_dist(anchor.data(), negative.data(), dim);
  const double raw = margin + d_pos - d_neg;

  TripletLossResult result;
  result.d_anchor.assign(dim, 0.0);
  result.d_positive.assign(dim, 0.0);
  result.d_negative.assign(dim, 0.0);
  if (raw > 0.0) {
    result.loss = raw;
    for (std::size_t t = 0; t < dim; ++t) {
      result.d_anchor[t] = 2.0 * (negative[t] - positive[t]);
      result.d_positive[t] = 2.0 * (positive[t] - anchor[t]);
      result.d_negative[t] = 2.0 * (anchor[t] - negative[t]);
    }
  }
  return result;
}

std::vector<TripletIndices> sample_triplets(std::span<const ClassId> labels,
                                            const Matrix* lat_features, TripletStrategy strategy,
                                            Rng& rng) {
  const std::size_t n = labels.size();
  if (strategy == TripletStrategy::kSemiHard) {
    if (lat_features == nullptr || lat_features->rows() != n) {
      throw InvalidArgument("sample_triplets: semi-hard mining needs one latent row per sample");
    }
  }

  std::vector<TripletIndices> triplets;
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t a = 0; a < n; ++a) {
    positives.clear();
    negatives.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == a) continue;
      (labels[i] == labels[a] ? positives : negatives).push_back(i);
    }
    if (positives.empty() || negatives.empty()) continue;

    const std::size_t pos = positives[rng.uniform_int(positives.size())];
    std::size_t neg;
    if (strategy == TripletStrategy::kRandom) {
      neg = negatives[rng.uniform_int(negatives.size())];
    } else {
      const double d_ap =
          kernels::sq_dist(lat_features->row(a), lat_features->row(pos), lat_features->cols());
      // Closest negative beyond the positive; farthest negative if none is.
      double best_semi = std::numeric_limits<double>::infinity();
      double best_far = -1.0;
      std::size_t semi = n;
      std::size_t far = negatives[0];
      for (std::size_t cand : negatives) {
        const double d_an =
            kernels::sq_dist(lat_features->row(a), lat_features->row(cand), lat_features->cols());
        if (d_an > d_ap && d_an < best_semi) {
          best_semi = d_an;
          semi = cand;
        }
        if (d_an > best_far) {
          best_far = d_an;
          far = cand;
        }
      }
      neg = semi != n ? semi : far;
    }
    triplets.push_back({a, pos, neg});
  }
  return triplets;
}

ObjectiveResult total_loss_grad(const std::vector<EmbeddingModel>& models,
                                const std::vector<ScaleBatch>& batches,
                                const AttributeMatrix& seen_attrs, double att_weight,
                                double lat_weight, double margin) {
  if (models.size() != batches.size()) {
    throw InvalidArgument("total_loss_grad: one batch per scale required");
  }
  ObjectiveResult result;
  const std::size_t n_scales = models.size();
  result.att_loss.assign(n_scales, 0.0);
  result.lat_loss.assign(n_scales, 0.0);
  result.d_w_att.reserve(n_scales);
  result.d_w_lat.reserve(n_scales);

  for (std::size_t s = 0; s < n_scales; ++s) {
    const EmbeddingModel& model = models[s];
    const ScaleBatch& batch = batches[s];

    SoftmaxLossResult att = softmax_loss_grad(model.w_att, batch.features, batch.labels, seen_attrs);
    result.att_loss[s] = att.loss;
    if (att_weight != 1.0) {
      kernels::scale(att_weight, att.d_w.data(), att.d_w.size());
    }
    result.d_w_att.push_back(std::move(att.d_w));

    // Latent branch: project the batch, run the frozen triplets, chain the
    // per-sample gradients back into w_lat.
    Matrix d_w_lat(model.w_lat.rows(), model.w_lat.cols());
    double lat_loss = 0.0;
    if (!batch.triplets.empty()) {
      const std::size_t b = batch.features.rows();
      const std::size_t k_lat = model.w_lat.cols();
      Matrix lat(b, k_lat);
      for (std::size_t i = 0; i < b; ++i) {
        const std::vector<double> v = matvec_t(model.w_lat, batch.features.row_span(i));
        std::memcpy(lat.row(i), v.data(), k_lat * sizeof(double));
      }
      Matrix d_lat(b, k_lat);
      const double inv_count = 1.0 / static_cast<double>(batch.triplets.size());
      for (const TripletIndices& t : batch.triplets) {
        const TripletLossResult r = triplet_loss_grad(lat.row_span(t.anchor),
                                                      lat.row_span(t.positive),
                                                      lat.row_span(t.negative), margin);
        lat_loss += r.loss * inv_count;
        kernels::axpy(inv_count, r.d_anchor.data(), d_lat.row(t.anchor), k_lat);
        kernels::axpy(inv_count, r.d_positive.data(), d_lat.row(t.positive), k_lat);
        kernels::axpy(inv_count, r.d_negative.data(), d_lat.row(t.negative), k_lat);
      }
      for (std::size_t i = 0; i < b; ++i) {
        add_outer(d_w_lat, lat_weight, batch.features.row_span(i), d_lat.row_span(i));
      }
    }
    result.lat_loss[s] = lat_loss;
    result.d_w_lat.push_back(std::move(d_w_lat));
    result.total += att_weight * result.att_loss[s] + lat_weight * result.lat_loss[s];
  }
  return result;
}

namespace {

Matrix init_projection(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix w(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
  }
  return w;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::memcpy(out.row(i), m.row(indices[i]), m.cols() * sizeof(double));
  }
  return out;
}

}  // namespace

TrainResult train(const std::vector<FeatureSet>& features, const AttributeMatrix& seen_attrs,
                  const TrainConfig& cfg) {
  if (features.empty()) throw InvalidArgument("train: no feature scales given");
  if (cfg.epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw InvalidArgument("train: learning rate must be >= 0");
  if (cfg.batch_size < 2) throw InvalidArgument("train: batch size must be >= 2");
  const std::size_t n = features[0].count();
  for (const FeatureSet& fs : features) {
    if (fs.count() != n || fs.labels != features[0].labels) {
      throw InvalidArgument("train: scales are not sample-aligned");
    }
  }

  const std::size_t k = seen_attrs.dim();
  const std::size_t k_lat = cfg.latent_dim != 0 ? cfg.latent_dim : k;
  const std::size_t n_scales = features.size();

  Rng rng(cfg.seed);
  TrainResult result;
  result.models.reserve(n_scales);
  for (const FeatureSet& fs : features) {
    EmbeddingModel model;
    model.scale_id = fs.scale_id;
    model.w_att = init_projection(fs.dim(), k, rng);
    model.w_lat = init_projection(fs.dim(), k_lat, rng);
    result.models.push_back(std::move(model));
  }

  std::vector<Matrix> vel_att;
  std::vector<Matrix> vel_lat;
  if (cfg.momentum != 0.0) {
    for (const EmbeddingModel& m : result.models) {
      vel_att.emplace_back(m.w_att.rows(), m.w_att.cols());
      vel_lat.emplace_back(m.w_lat.rows(), m.w_lat.cols());
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    std::vector<double> epoch_att(n_scales, 0.0);
    std::vector<double> epoch_lat(n_scales, 0.0);
    std::size_t n_batches = 0;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, n);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);

      std::vector<ScaleBatch> batches;
      batches.reserve(n_scales);
      for (std::size_t s = 0; s < n_scales; ++s) {
        ScaleBatch batch;
        batch.features = gather_rows(features[s].features, idx);
        batch.labels.reserve(idx.size());
        for (std::size_t i : idx) batch.labels.push_back(features[s].labels[i]);

        if (cfg.lat_weight != 0.0) {
          Matrix lat;
          const Matrix* lat_ptr = nullptr;
          if (cfg.triplet_strategy == TripletStrategy::kSemiHard) {
            lat = Matrix(idx.size(), k_lat);
            for (std::size_t i = 0; i < idx.size(); ++i) {
              const std::vector<double> v =
                  matvec_t(result.models[s].w_lat, batch.features.row_span(i));
              std::memcpy(lat.row(i), v.data(), k_lat * sizeof(double));
            }
            lat_ptr = &lat;
          }
          batch.triplets = sample_triplets(batch.labels, lat_ptr, cfg.triplet_strategy, rng);
        }
        batches.push_back(std::move(batch));
      }

      const ObjectiveResult obj = total_loss_grad(result.models, batches, seen_attrs,
                                                  cfg.att_weight, cfg.lat_weight, cfg.margin);
      if (!std::isfinite(obj.total)) {
        throw NumericFailure("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 " batch " + std::to_string(n_batches),
                             epoch);
      }

      for (std::size_t s = 0; s < n_scales; ++s) {
        Matrix& w_att = result.models[s].w_att;
        Matrix& w_lat = result.models[s].w_lat;
        if (cfg.momentum != 0.0) {
          kernels::scale(cfg.momentum, vel_att[s].data(), vel_att[s].size());
          kernels::axpy(-cfg.learning_rate, obj.d_w_att[s].data(), vel_att[s].data(),
                        vel_att[s].size());
          kernels::axpy(1.0, vel_att[s].data(), w_att.data(), w_att.size());
          kernels::scale(cfg.momentum, vel_lat[s].data(), vel_lat[s].size());
          kernels::axpy(-cfg.learning_rate, obj.d_w_lat[s].data(), vel_lat[s].data(),
                        vel_lat[s].size());
          kernels::axpy(1.0, vel_lat[s].data(), w_lat.data(), w_lat.size());
        } else {
          kernels::axpy(-cfg.learning_rate, obj.d_w_att[s].data(), w_att.data(), w_att.size());
          kernels::axpy(-cfg.learning_rate, obj.d_w_lat[s].data(), w_lat.data(), w_lat.size());
        }
        epoch_att[s] += obj.att_loss[s];
        epoch_lat[s] += obj.lat_loss[s];
      }
      ++n_batches;
    }

    for (std::size_t s = 0; s < n_scales; ++s) {
      const double att = epoch_att[s] / static_cast<double>(n_batches);
      const double lat = epoch_lat[s] / static_cast<double>(n_batches);
      result.report.records.push_back({epoch, result.models[s].scale_id, att, lat,
                                       cfg.att_weight * att + cfg.lat_weight * lat});
    }
    if (log::enabled(log::Level::kDebug)) {
      log::debug("epoch " + std::to_string(epoch) + " done");
    }
  }
  return result;
}

MultiScaleCombiner train_combiner(const Matrix& ua_s1, const Matrix& ua_s2,
                                  std::span<const ClassId> labels,
                                  const AttributeMatrix& seen_attrs, const TrainConfig& cfg,
                                  const MultiScaleCombiner* init) {
  if (ua_s1.rows() != ua_s2.rows() || ua_s1.rows() != labels.size()) {
    throw InvalidArgument("train_combiner: per-scale UA features are not sample-aligned");
  }
  const std::size_t n = ua_s1.rows();
  const std::size_t in_dim = ua_s1.cols() + ua_s2.cols();

  Matrix concat(n, in_dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::memcpy(concat.row(i), ua_s1.row(i), ua_s1.cols() * sizeof(double));
    std::memcpy(concat.row(i) + ua_s1.cols(), ua_s2.row(i), ua_s2.cols() * sizeof(double));
  }

  Rng rng(cfg.seed);
  MultiScaleCombiner combiner;
  if (init != nullptr) {
    if (init->w_com.rows() != in_dim || init->w_com.cols() != seen_attrs.dim()) {
      throw InvalidArgument("train_combiner: init combiner has wrong shape");
    }
    combiner = *init;
  } else {
    combiner.w_com = init_projection(in_dim, seen_attrs.dim(), rng);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, n);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix batch = gather_rows(concat, idx);
      std::vector<ClassId> batch_labels;
      batch_labels.reserve(idx.size());
      for (std::size_t i : idx) batch_labels.push_back(labels[i]);

      const SoftmaxLossResult r =
          softmax_loss_grad(combiner.w_com, batch, batch_labels, seen_attrs);
      if (!std::isfinite(r.loss)) {
        throw NumericFailure("train_combiner: non-finite loss at epoch " + std::to_string(epoch),
                             epoch);
      }
      kernels::axpy(-cfg.learning_rate, r.d_w.data(), combiner.w_com.data(),
                    combiner.w_com.size());
    }
  }
  return combiner;
}

std::vector<double> combine_la(std::span<const double> lat_s1, std::span<const double> lat_s2) {
  const std::vector<double> a = l2_normalize(lat_s1);
  const std::vector<double> b = l2_normalize(lat_s2);
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace zsl
