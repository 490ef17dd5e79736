#ifndef ZSL_PREDICT_EVAL_HPP_
#define ZSL_PREDICT_EVAL_HPP_

#include <span>
#include <vector>

#include "zsl/core.hpp"
#include "zsl/embedding.hpp"
#include "zsl/transfer.hpp"

namespace zsl {

enum class PredictionSpace { kUA, kLA, kCombined };

const char* to_string(PredictionSpace space);

// Argmax ties everywhere resolve to the lowest class id, so evaluation is
// deterministic regardless of row order.
struct PredictionResult {
  ClassId predicted = -1;
  std::vector<ClassId> class_ids;  // order of the score vector
  std::vector<double> scores;
  PredictionSpace space = PredictionSpace::kUA;
};

// y* = argmax_c <phi_att, a_c> over the given classes.
PredictionResult predict_ua(std::span<const double> phi_att, const AttributeMatrix& unseen_attrs);

// y* = argmax_c <phi_lat, prototype_c>.
PredictionResult predict_la(std::span<const double> phi_lat, const PrototypeSet& prototypes);

// Scores are exactly the elementwise sum of the UA and LA scores. The class
// lists of attrs and prototypes must match.
PredictionResult predict_combined(std::span<const double> phi_att,
                                  std::span<const double> phi_lat,
                                  const AttributeMatrix& unseen_attrs,
                                  const PrototypeSet& prototypes);

// Two-scale prediction: UA combined through w_com, LA by normalized
// concatenation, then the combined rule against prototypes living in the
// concatenated LA space.
PredictionResult predict_multiscale(std::span<const double> feature_s1,
                                    std::span<const double> feature_s2,
                                    const EmbeddingModel& model_s1,
                                    const EmbeddingModel& model_s2,
                                    const MultiScaleCombiner& combiner,
                                    const PrototypeSet& combined_prototypes,
                                    const AttributeMatrix& unseen_attrs);

struct McaReport {
  std::vector<ClassId> class_ids;  // classes with at least one sample
  std::vector<double> per_class;   // percent
  double mca = 0.0;                // unweighted mean of per_class, percent
};

// Per-class accuracy averaged without sample weighting. Every label must be
// a member of class_set.
McaReport mca(std::span<const ClassId> predictions, std::span<const ClassId> labels,
              std::span<const ClassId> class_set);

// 2ab/(a+b), zero when both accuracies are zero.
double harmonic_mean(double a, double b);

struct GzslReport {
  double acc_unseen_to_joint = 0.0;  // A_{U->T}, percent
  double acc_seen_to_joint = 0.0;    // A_{S->T}, percent
  double harmonic = 0.0;             // H, percent
};

// Embedded outputs of one test partition: row i of att/lat belongs to
// labels[i].
struct EmbeddedSet {
  Matrix att;
  Matrix lat;
  std::vector<ClassId> labels;
};

// Joint-label-space evaluation: both partitions are classified against all of
// T = S u U and scored as MCA within their own partition.
GzslReport gzsl_eval(const EmbeddedSet& unseen_test, const EmbeddedSet& seen_test,
                     const AttributeMatrix& joint_attrs, const PrototypeSet& joint_prototypes,
                     const Split& split, PredictionSpace space = PredictionSpace::kCombined);

struct ActivationEntry {
  std::size_t sample;
  ClassId label;
  double value;
};

// Samples ranked by one embedded-feature element: top_k largest (descending)
// and top_k smallest (ascending), ties by sample index.
struct ActivationReport {
  std::vector<ActivationEntry> largest;
  std::vector<ActivationEntry> smallest;
};

ActivationReport activation_report(const EmbeddingModel& model, const Matrix& features,
                                   std::span<const ClassId> labels, PredictionSpace space,
                                   std::size_t element, std::size_t top_k);

}  // namespace zsl

#endif  // ZSL_PREDICT_EVAL_HPP_
