#ifndef ZSL_CORE_HPP_
#define ZSL_CORE_HPP_

#include <span>
#include <string>
#include <vector>

#include "zsl/matrix.hpp"

namespace zsl {

// Class identifiers are dense integers 0..c-1; ingestion maps any external
// naming onto this range once, so every matrix is indexable by class row.
using ClassId = int;

// Per-class continuous attribute vectors (the user-defined attribute space).
// Row i holds the attributes of class_ids[i].
struct AttributeMatrix {
  std::vector<ClassId> class_ids;
  Matrix values;  // c x k

  std::size_t num_classes() const { return class_ids.size(); }
  std::size_t dim() const { return values.cols(); }

  // Row index of a class, or -1 when absent.
  int row_of(ClassId id) const;

  // Rows for the given classes, in the given order. Throws on unknown ids.
  AttributeMatrix subset(std::span<const ClassId> ids) const;
};

// Labeled feature vectors for one scale of the pipeline.
struct FeatureSet {
  int scale_id = 1;
  Matrix features;  // n x d
  std::vector<ClassId> labels;

  std::size_t count() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
};

// Disjoint partition of classes into train (seen) and test (unseen) label
// sets. Disjointness is a data property checked by validate_dataset.
struct Split {
  std::vector<ClassId> seen_classes;
  std::vector<ClassId> unseen_classes;
};

// Projections from feature space into the augmented attribute space:
// w_att maps onto user-defined attributes, w_lat onto latent attributes.
struct EmbeddingModel {
  Matrix w_att;  // d x k
  Matrix w_lat;  // d x k_lat
  int scale_id = 1;

  std::size_t feature_dim() const { return w_att.rows(); }
  std::size_t attr_dim() const { return w_att.cols(); }
  std::size_t latent_dim() const { return w_lat.cols(); }
};

struct EmbeddedFeature {
  std::vector<double> att;
  std::vector<double> lat;
};

// att = w_att^T f, lat = w_lat^T f.
EmbeddedFeature project(const EmbeddingModel& model, std::span<const double> feature);

// First k entries become att, the rest lat; both parts must be non-empty.
EmbeddedFeature split_embedding(std::span<const double> phi_e, std::size_t k);

// Unit vector when the norm exceeds 1e-12, the input unchanged otherwise.
std::vector<double> l2_normalize(std::span<const double> v);

struct Violation {
  enum class Kind {
    kUnknownLabel,
    kSplitOverlap,
    kDimensionMismatch,
    kNonFinite,
    kMissingAttribute,
    kScaleMismatch,
  };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Cross-checks a dataset: label coverage, split disjointness, per-scale
// consistency, attribute coverage and finiteness. Violations are data, not
// errors; an empty report means the dataset is usable.
ValidationReport validate_dataset(const std::vector<FeatureSet>& features,
                                  const AttributeMatrix& attrs, const Split& split);

}  // namespace zsl

#endif  // ZSL_CORE_HPP_
