#include "zsl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <string>

#include "zsl/error.hpp"
#include "zsl/log.hpp"
#include "zsl/rng.hpp"

namespace zsl {

namespace {

std::vector<std::size_t> indices_with_labels(const std::vector<ClassId>& labels,
                                             const std::set<ClassId>& wanted) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (wanted.count(labels[i]) != 0) idx.push_back(i);
  }
  return idx;
}

Dataset subset_samples(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.attrs = ds.attrs;
  out.split = ds.split;
  for (const FeatureSet& fs : ds.scales) {
    FeatureSet sub;
    sub.scale_id = fs.scale_id;
    sub.features = Matrix(idx.size(), fs.dim());
    sub.labels.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::memcpy(sub.features.row(i), fs.features.row(idx[i]), fs.dim() * sizeof(double));
      sub.labels.push_back(fs.labels[idx[i]]);
    }
    out.scales.push_back(std::move(sub));
  }
  return out;
}

void check_scale(const TrainedArtifacts& art, int scale) {
  if (scale == kMultiScale) {
    if (art.models.size() < 2 || !art.has_combiner) {
      throw InvalidArgument("multi-scale path needs two trained scales and a combiner");
    }
  } else if (scale < 0 || static_cast<std::size_t>(scale) >= art.models.size()) {
    throw InvalidArgument("scale index " + std::to_string(scale) + " out of range");
  }
}

// Embedded (att, lat) features of the given samples in the chosen space.
EmbeddedSet embed_samples(const Dataset& ds, const TrainedArtifacts& art, int scale,
                          const std::vector<std::size_t>& idx) {
  EmbeddedSet out;
  out.labels.reserve(idx.size());
  for (std::size_t i : idx) out.labels.push_back(ds.scales[0].labels[i]);

  if (scale != kMultiScale) {
    const EmbeddingModel& model = art.models[static_cast<std::size_t>(scale)];
    const FeatureSet& fs = ds.scales[static_cast<std::size_t>(scale)];
    out.att = Matrix(idx.size(), model.attr_dim());
    out.lat = Matrix(idx.size(), model.latent_dim());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const EmbeddedFeature e = project(model, fs.features.row_span(idx[i]));
      std::memcpy(out.att.row(i), e.att.data(), e.att.size() * sizeof(double));
      std::memcpy(out.lat.row(i), e.lat.data(), e.lat.size() * sizeof(double));
    }
    return out;
  }

  const EmbeddingModel& m1 = art.models[0];
  const EmbeddingModel& m2 = art.models[1];
  out.att = Matrix(idx.size(), art.combiner.w_com.cols());
  out.lat = Matrix(idx.size(), m1.latent_dim() + m2.latent_dim());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const EmbeddedFeature e1 = project(m1, ds.scales[0].features.row_span(idx[i]));
    const EmbeddedFeature e2 = project(m2, ds.scales[1].features.row_span(idx[i]));
    const std::vector<double> att = art.combiner.apply(e1.att, e2.att);
    const std::vector<double> lat = combine_la(e1.lat, e2.lat);
    std::memcpy(out.att.row(i), att.data(), att.size() * sizeof(double));
    std::memcpy(out.lat.row(i), lat.data(), lat.size() * sizeof(double));
  }
  return out;
}

}  // namespace

Dataset seen_subset(const Dataset& ds) {
  const std::set<ClassId> seen(ds.split.seen_classes.begin(), ds.split.seen_classes.end());
  return subset_samples(ds, indices_with_labels(ds.scales.at(0).labels, seen));
}

TrainedArtifacts run_train(const Dataset& ds, const TrainConfig& cfg) {
  const Dataset train_ds = seen_subset(ds);
  const AttributeMatrix seen_attrs = ds.attrs.subset(ds.split.seen_classes);

  TrainedArtifacts art;
  TrainResult result = train(train_ds.scales, seen_attrs, cfg);
  art.models = std::move(result.models);
  art.report = std::move(result.report);

  if (art.models.size() >= 2) {
    const std::size_t n = train_ds.scales[0].count();
    Matrix ua1(n, art.models[0].attr_dim());
    Matrix ua2(n, art.models[1].attr_dim());
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> a1 =
          matvec_t(art.models[0].w_att, train_ds.scales[0].features.row_span(i));
      const std::vector<double> a2 =
          matvec_t(art.models[1].w_att, train_ds.scales[1].features.row_span(i));
      std::memcpy(ua1.row(i), a1.data(), a1.size() * sizeof(double));
      std::memcpy(ua2.row(i), a2.data(), a2.size() * sizeof(double));
    }
    art.combiner =
        train_combiner(ua1, ua2, train_ds.scales[0].labels, seen_attrs, cfg, nullptr);
    art.has_combiner = true;
  }
  return art;
}

namespace {

// Combined-LA prototypes in the normalized-concat format of combine_la: each
// scale's prototype is normalized independently, then the halves are stacked.
PrototypeSet concat_normalized(const PrototypeSet& s1, const PrototypeSet& s2) {
  PrototypeSet out;
  out.class_ids = s1.class_ids;
  out.provenance = s1.provenance;
  const std::size_t k1 = s1.prototypes.cols();
  const std::size_t k2 = s2.prototypes.cols();
  out.prototypes = Matrix(s1.class_ids.size(), k1 + k2);
  for (std::size_t r = 0; r < s1.class_ids.size(); ++r) {
    const std::vector<double> n1 = l2_normalize(s1.prototypes.row_span(r));
    const std::vector<double> n2 = l2_normalize(s2.prototypes.row_span(r));
    std::memcpy(out.prototypes.row(r), n1.data(), k1 * sizeof(double));
    std::memcpy(out.prototypes.row(r) + k1, n2.data(), k2 * sizeof(double));
  }
  return out;
}

}  // namespace

PrototypeBundle build_prototypes(const Dataset& ds, const TrainedArtifacts& art,
                                 const TransferConfig& cfg, int scale, bool normalize_first) {
  check_scale(art, scale);
  const Dataset train_ds = seen_subset(ds);

  PrototypeBundle bundle;
  bundle.weights = transfer_weights(ds.attrs, ds.split, cfg);
  if (scale != kMultiScale) {
    bundle.seen = seen_prototypes(art.models[static_cast<std::size_t>(scale)],
                                  train_ds.scales[static_cast<std::size_t>(scale)],
                                  ds.split.seen_classes, normalize_first);
    bundle.unseen = unseen_prototypes(bundle.weights, bundle.seen);
    return bundle;
  }

  // Ridge transfer is linear, so it runs per scale in the raw LA space; the
  // combined-space prototypes are then the normalized concatenation, matching
  // the layout combine_la gives the features.
  PrototypeSet seen_s1 = seen_prototypes(art.models[0], train_ds.scales[0],
                                         ds.split.seen_classes, normalize_first);
  PrototypeSet seen_s2 = seen_prototypes(art.models[1], train_ds.scales[1],
                                         ds.split.seen_classes, normalize_first);
  const PrototypeSet unseen_s1 = unseen_prototypes(bundle.weights, seen_s1);
  const PrototypeSet unseen_s2 = unseen_prototypes(bundle.weights, seen_s2);
  bundle.seen = concat_normalized(seen_s1, seen_s2);
  bundle.unseen = concat_normalized(unseen_s1, unseen_s2);
  return bundle;
}

EvalResult run_eval(const Dataset& ds, const TrainedArtifacts& art, const TransferConfig& cfg,
                    PredictionSpace space, int scale, bool normalize_prototypes) {
  check_scale(art, scale);
  const std::set<ClassId> unseen(ds.split.unseen_classes.begin(), ds.split.unseen_classes.end());
  const std::vector<std::size_t> test_idx = indices_with_labels(ds.scales.at(0).labels, unseen);
  if (test_idx.empty()) throw InvalidArgument("run_eval: no unseen-class samples in the dataset");

  const AttributeMatrix unseen_attrs = ds.attrs.subset(ds.split.unseen_classes);
  PrototypeSet unseen_protos;
  if (space != PredictionSpace::kUA) {
    unseen_protos = build_prototypes(ds, art, cfg, scale, normalize_prototypes).unseen;
  }

  const EmbeddedSet test = embed_samples(ds, art, scale, test_idx);

  EvalResult result;
  result.space = space;
  result.sample_ids = test_idx;
  result.labels = test.labels;
  result.predictions.reserve(test_idx.size());
  for (std::size_t i = 0; i < test_idx.size(); ++i) {
    PredictionResult pred;
    switch (space) {
      case PredictionSpace::kUA:
        pred = predict_ua(test.att.row_span(i), unseen_attrs);
        break;
      case PredictionSpace::kLA:
        pred = predict_la(test.lat.row_span(i), unseen_protos);
        break;
      case PredictionSpace::kCombined:
        pred = predict_combined(test.att.row_span(i), test.lat.row_span(i), unseen_attrs,
                                unseen_protos);
        break;
    }
    result.predictions.push_back(pred.predicted);
  }
  result.report = mca(result.predictions, result.labels, ds.split.unseen_classes);
  return result;
}

GzslReport run_gzsl(const Dataset& ds, const TrainConfig& train_cfg,
                    const TransferConfig& transfer_cfg, PredictionSpace space,
                    double holdout_frac, int scale, bool normalize_prototypes) {
  if (!(holdout_frac > 0.0 && holdout_frac < 1.0)) {
    throw InvalidArgument("run_gzsl: holdout fraction must lie in (0,1)");
  }

  // Seeded per-class holdout of seen samples.
  const std::vector<ClassId>& labels = ds.scales.at(0).labels;
  Rng rng(train_cfg.seed);
  std::vector<std::size_t> holdout_idx;
  std::vector<std::size_t> retained_idx;
  for (ClassId cls : ds.split.seen_classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.empty()) {
      throw InvalidArgument("run_gzsl: seen class " + std::to_string(cls) + " has no samples");
    }
    rng.shuffle(members);
    std::size_t take = static_cast<std::size_t>(
        std::llround(holdout_frac * static_cast<double>(members.size())));
    take = std::min(std::max<std::size_t>(take, 1), members.size() - 1);
    if (members.size() == 1) take = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < take ? holdout_idx : retained_idx).push_back(members[i]);
    }
  }
  if (holdout_idx.empty()) {
    throw InvalidArgument("run_gzsl: holdout is empty, not enough seen samples per class");
  }
  std::sort(holdout_idx.begin(), holdout_idx.end());
  std::sort(retained_idx.begin(), retained_idx.end());

  const std::set<ClassId> unseen(ds.split.unseen_classes.begin(), ds.split.unseen_classes.end());
  std::vector<std::size_t> unseen_idx = indices_with_labels(labels, unseen);
  if (unseen_idx.empty()) throw InvalidArgument("run_gzsl: no unseen-class samples");

  // Train on the retained seen samples only; the holdout stays untouched.
  Dataset train_view = subset_samples(ds, retained_idx);
  const TrainedArtifacts art = run_train(train_view, train_cfg);
  check_scale(art, scale);
  const PrototypeBundle protos =
      build_prototypes(train_view, art, transfer_cfg, scale, normalize_prototypes);

  // Joint label space: seen classes first, then unseen.
  std::vector<ClassId> joint_ids = ds.split.seen_classes;
  joint_ids.insert(joint_ids.end(), ds.split.unseen_classes.begin(),
                   ds.split.unseen_classes.end());
  const AttributeMatrix joint_attrs = ds.attrs.subset(joint_ids);

  PrototypeSet joint_protos;
  joint_protos.class_ids = joint_ids;
  joint_protos.prototypes = Matrix(joint_ids.size(), protos.seen.prototypes.cols());
  joint_protos.provenance = PrototypeProvenance::kTransferred;
  for (std::size_t r = 0; r < protos.seen.prototypes.rows(); ++r) {
    std::memcpy(joint_protos.prototypes.row(r), protos.seen.prototypes.row(r),
                protos.seen.prototypes.cols() * sizeof(double));
  }
  for (std::size_t r = 0; r < protos.unseen.prototypes.rows(); ++r) {
    std::memcpy(joint_protos.prototypes.row(protos.seen.prototypes.rows() + r),
                protos.unseen.prototypes.row(r), protos.unseen.prototypes.cols() * sizeof(double));
  }

  const EmbeddedSet unseen_test = embed_samples(ds, art, scale, unseen_idx);
  const EmbeddedSet seen_test = embed_samples(ds, art, scale, holdout_idx);
  return gzsl_eval(unseen_test, seen_test, joint_attrs, joint_protos, ds.split, space);
}

}  // namespace zsl
