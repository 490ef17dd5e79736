#include "zsl/predict_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"

namespace zsl {

const char* to_string(PredictionSpace space) {
  switch (space) {
    case PredictionSpace::kUA: return "ua";
    case PredictionSpace::kLA: return "la";
    case PredictionSpace::kCombined: return "ua+la";
  }
  return "?";
}

namespace {

ClassId argmax_class(std::span<const ClassId> ids, std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best] || (scores[i] == scores[best] && ids[i] < ids[best])) best = i;
  }
  return ids[best];
}

}  // namespace

PredictionResult predict_ua(std::span<const double> phi_att, const AttributeMatrix& unseen_attrs) {
  if (unseen_attrs.num_classes() == 0) throw InvalidArgument("predict_ua: empty class set");
  if (phi_att.size() != unseen_attrs.dim()) {
    throw InvalidArgument("predict_ua: UA feature dim " + std::to_string(phi_att.size()) +
                          " != attribute dim " + std::to_string(unseen_attrs.dim()));
  }
  PredictionResult result;
  result.space = PredictionSpace::kUA;
  result.class_ids = unseen_attrs.class_ids;
  result.scores = matvec(unseen_attrs.values, phi_att);
  result.predicted = argmax_class(result.class_ids, result.scores);
  return result;
}

PredictionResult predict_la(std::span<const double> phi_lat, const PrototypeSet& prototypes) {
  if (prototypes.class_ids.empty()) throw InvalidArgument("predict_la: empty prototype set");
  if (phi_lat.size() != prototypes.prototypes.cols()) {
    throw InvalidArgument("predict_la: LA feature dim " + std::to_string(phi_lat.size()) +
                          " != prototype dim " + std::to_string(prototypes.prototypes.cols()));
  }
  PredictionResult result;
  result.space = PredictionSpace::kLA;
  result.class_ids = prototypes.class_ids;
  result.scores = matvec(prototypes.prototypes, phi_lat);
  result.predicted = argmax_class(result.class_ids, result.scores);
  return result;
}

PredictionResult predict_combined(std::span<const double> phi_att,
                                  std::span<const double> phi_lat,
                                  const AttributeMatrix& unseen_attrs,
                                  const PrototypeSet& prototypes) {
  if (unseen_attrs.class_ids != prototypes.class_ids) {
    throw InvalidArgument("predict_combined: attribute and prototype class lists differ");
  }
  const PredictionResult ua = predict_ua(phi_att, unseen_attrs);
  const PredictionResult la = predict_la(phi_lat, prototypes);

  PredictionResult result;
  result.space = PredictionSpace::kCombined;
  result.class_ids = ua.class_ids;
  result.scores.resize(ua.scores.size());
  for (std::size_t i = 0; i < ua.scores.size(); ++i) result.scores[i] = ua.scores[i] + la.scores[i];
  result.predicted = argmax_class(result.class_ids, result.scores);
  return result;
}

PredictionResult predict_multiscale(std::span<const double> feature_s1,
                                    std::span<const double> feature_s2,
                                    const EmbeddingModel& model_s1,
                                    const EmbeddingModel& model_s2,
                                    const MultiScaleCombiner& combiner,
                                    const PrototypeSet& combined_prototypes,
                                    const AttributeMatrix& unseen_attrs) {
  if (feature_s1.empty() || feature_s2.empty()) {
    throw InvalidArgument("predict_multiscale: both scales must provide a feature vector");
  }
  const EmbeddedFeature e1 = project(model_s1, feature_s1);
  const EmbeddedFeature e2 = project(model_s2, feature_s2);
  const std::vector<double> att_com = combiner.apply(e1.att, e2.att);
  const std::vector<double> lat_com = combine_la(e1.lat, e2.lat);
  PredictionResult result = predict_combined(att_com, lat_com, unseen_attrs, combined_prototypes);
  result.space = PredictionSpace::kCombined;
  return result;
}

McaReport mca(std::span<const ClassId> predictions, std::span<const ClassId> labels,
              std::span<const ClassId> class_set) {
  if (labels.empty()) throw InvalidArgument("mca: empty input");
  if (predictions.size() != labels.size()) {
    throw InvalidArgument("mca: prediction and label counts differ");
  }

  // Ordered map keeps per-class rows sorted by class id in the report.
  std::map<ClassId, std::pair<std::size_t, std::size_t>> tally;  // id -> (correct, total)
  for (ClassId id : class_set) tally.emplace(id, std::make_pair(0, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = tally.find(labels[i]);
    if (it == tally.end()) {
      throw InvalidArgument("mca: label " + std::to_string(labels[i]) + " not in class set");
    }
    it->second.second += 1;
    if (predictions[i] == labels[i]) it->second.first += 1;
  }

  McaReport report;
  double acc_sum = 0.0;
  for (const auto& [id, counts] : tally) {
    if (counts.second == 0) continue;  // class without samples does not enter the mean
    const double acc =
        100.0 * static_cast<double>(counts.first) / static_cast<double>(counts.second);
    report.class_ids.push_back(id);
    report.per_class.push_back(acc);
    acc_sum += acc;
  }
  report.mca = acc_sum / static_cast<double>(report.per_class.size());
  return report;
}

double harmonic_mean(double a, double b) {
  if (a + b == 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

namespace {

std::vector<ClassId> classify_set(const EmbeddedSet& set, const AttributeMatrix& attrs,
                                  const PrototypeSet& protos, PredictionSpace space) {
  std::vector<ClassId> preds;
  preds.reserve(set.labels.size());
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    PredictionResult r;
    switch (space) {
      case PredictionSpace::kUA:
        r = predict_ua(set.att.row_span(i), attrs);
        break;
      case PredictionSpace::kLA:
        r = predict_la(set.lat.row_span(i), protos);
        break;
      case PredictionSpace::kCombined:
        r = predict_combined(set.att.row_span(i), set.lat.row_span(i), attrs, protos);
        break;
    }
    preds.push_back(r.predicted);
  }
  return preds;
}

}  // namespace

GzslReport gzsl_eval(const EmbeddedSet& unseen_test, const EmbeddedSet& seen_test,
                     const AttributeMatrix& joint_attrs, const PrototypeSet& joint_prototypes,
                     const Split& split, PredictionSpace space) {
  if (unseen_test.labels.empty() || seen_test.labels.empty()) {
    throw InvalidArgument("gzsl_eval: both test partitions must be non-empty");
  }
  const std::vector<ClassId> unseen_preds =
      classify_set(unseen_test, joint_attrs, joint_prototypes, space);
  const std::vector<ClassId> seen_preds =
      classify_set(seen_test, joint_attrs, joint_prototypes, space);

  GzslReport report;
  report.acc_unseen_to_joint =
      mca(unseen_preds, unseen_test.labels, split.unseen_classes).mca;
  report.acc_seen_to_joint = mca(seen_preds, seen_test.labels, split.seen_classes).mca;
  report.harmonic = harmonic_mean(report.acc_unseen_to_joint, report.acc_seen_to_joint);
  return report;
}

ActivationReport activation_report(const EmbeddingModel& model, const Matrix& features,
                                   std::span<const ClassId> labels, PredictionSpace space,
                                   std::size_t element, std::size_t top_k) {
  if (space == PredictionSpace::kCombined) {
    throw InvalidArgument("activation_report: choose the UA or the LA space");
  }
  if (features.rows() != labels.size()) {
    throw InvalidArgument("activation_report: one label per sample required");
  }
  const std::size_t dim = space == PredictionSpace::kUA ? model.attr_dim() : model.latent_dim();
  if (element >= dim) {
    throw InvalidArgument("activation_report: element " + std::to_string(element) +
                          " out of range for dimension " + std::to_string(dim));
  }

  const std::size_t n = features.rows();
  std::vector<ActivationEntry> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    const EmbeddedFeature e = project(model, features.row_span(i));
    const double value = space == PredictionSpace::kUA ? e.att[element] : e.lat[element];
    entries[i] = {i, labels[i], value};
  }

  const std::size_t count = std::min(top_k, n);
  ActivationReport report;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (entries[a].value != entries[b].value) return entries[a].value > entries[b].value;
    return a < b;
  });
  for (std::size_t i = 0; i < count; ++i) report.largest.push_back(entries[order[i]]);

  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (entries[a].value != entries[b].value) return entries[a].value < entries[b].value;
    return a < b;
  });
  for (std::size_t i = 0; i < count; ++i) report.smallest.push_back(entries[order[i]]);

  return report;
}

}  // namespace zsl
