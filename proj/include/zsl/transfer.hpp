#ifndef ZSL_TRANSFER_HPP_
#define ZSL_TRANSFER_HPP_

#include <span>
#include <vector>

#include "zsl/core.hpp"
#include "zsl/matrix.hpp"

namespace zsl {

struct TransferConfig {
  double lambda = 1.0;  // ridge coefficient, >= 0
};

// Per-unseen-class combination weights over the seen classes, from the ridge
// relationship in UA space. Row u of betas is beta^u.
struct TransferWeights {
  std::vector<ClassId> unseen_ids;
  std::vector<ClassId> seen_ids;
  Matrix betas;  // c_u x c_s
};

enum class PrototypeProvenance { kEmpiricalMean, kTransferred };

struct PrototypeSet {
  std::vector<ClassId> class_ids;
  Matrix prototypes;  // c x k_lat
  PrototypeProvenance provenance = PrototypeProvenance::kEmpiricalMean;

  int row_of(ClassId id) const;
};

// beta = (A A^T + lambda I)^{-1} A a_u, the unique minimizer of
// ||a_u - A^T beta||^2 + lambda ||beta||^2 over combinations of seen rows.
// lambda = 0 requires a nonsingular Gram matrix (NumericFailure otherwise).
std::vector<double> ridge_betas(const Matrix& seen_attrs, std::span<const double> unseen_attr,
                                double lambda);

// ridge_betas for every unseen class of the split.
TransferWeights transfer_weights(const AttributeMatrix& attrs, const Split& split,
                                 const TransferConfig& cfg);

// Per-class arithmetic means of arbitrary per-sample vectors. Every class in
// `class_ids` must own at least one sample (InvalidArgument naming the class
// otherwise).
PrototypeSet mean_prototypes(const Matrix& vectors, std::span<const ClassId> labels,
                             std::span<const ClassId> class_ids);

// Empirical latent prototypes of the seen classes: mean of phi_lat over each
// class's training samples. `normalize_first` l2-normalizes each latent
// vector before averaging.
PrototypeSet seen_prototypes(const EmbeddingModel& model, const FeatureSet& features,
                             std::span<const ClassId> seen_ids, bool normalize_first = false);

// Unseen prototypes by carrying the UA-space relationship into LA space:
// prototype(u) = sum_c beta^u_c * prototype(c).
PrototypeSet unseen_prototypes(const TransferWeights& betas, const PrototypeSet& seen);

}  // namespace zsl

#endif  // ZSL_TRANSFER_HPP_
