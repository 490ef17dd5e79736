#include "zsl/transfer.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <unordered_map>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"

namespace zsl {

int PrototypeSet::row_of(ClassId id) const {
  for (std::size_t i = 0; i < class_ids.size(); ++i) {
    if (class_ids[i] == id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> ridge_betas(const Matrix& seen_attrs, std::span<const double> unseen_attr,
                                double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("ridge_betas: lambda must be >= 0");
  if (unseen_attr.size() != seen_attrs.cols()) {
    throw InvalidArgument("ridge_betas: attribute dim " + std::to_string(unseen_attr.size()) +
                          " != seen attribute dim " + std::to_string(seen_attrs.cols()));
  }
  const std::size_t c_s = seen_attrs.rows();
  if (c_s == 0) throw InvalidArgument("ridge_betas: no seen classes");

  // Gram matrix of the seen attribute rows, shifted by lambda on the diagonal.
  Matrix gram(c_s, c_s);
  for (std::size_t i = 0; i < c_s; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = kernels::dot(seen_attrs.row(i), seen_attrs.row(j), seen_attrs.cols());
      gram(i, j) = g;
      gram(j, i) = g;
    }
    gram(i, i) += lambda;
  }
  const std::vector<double> rhs = matvec(seen_attrs, unseen_attr);
  return cholesky_solve(gram, rhs);
}

TransferWeights transfer_weights(const AttributeMatrix& attrs, const Split& split,
                                 const TransferConfig& cfg) {
  const AttributeMatrix seen = attrs.subset(split.seen_classes);
  TransferWeights weights;
  weights.seen_ids = split.seen_classes;
  weights.unseen_ids = split.unseen_classes;
  weights.betas = Matrix(split.unseen_classes.size(), split.seen_classes.size());
  for (std::size_t u = 0; u < split.unseen_classes.size(); ++u) {
    const int row = attrs.row_of(split.unseen_classes[u]);
    if (row < 0) {
      throw InvalidArgument("transfer_weights: unseen class " +
                            std::to_string(split.unseen_classes[u]) + " has no attribute row");
    }
    const std::vector<double> beta =
        ridge_betas(seen.values, attrs.values.row_span(static_cast<std::size_t>(row)), cfg.lambda);
    std::memcpy(weights.betas.row(u), beta.data(), beta.size() * sizeof(double));
  }
  return weights;
}

PrototypeSet mean_prototypes(const Matrix& vectors, std::span<const ClassId> labels,
                             std::span<const ClassId> class_ids) {
  if (vectors.rows() != labels.size()) {
    throw InvalidArgument("mean_prototypes: one label per vector required");
  }
  std::unordered_map<ClassId, std::size_t> row_of;
  for (std::size_t r = 0; r < class_ids.size(); ++r) row_of[class_ids[r]] = r;

  PrototypeSet protos;
  protos.class_ids.assign(class_ids.begin(), class_ids.end());
  protos.prototypes = Matrix(class_ids.size(), vectors.cols());
  protos.provenance = PrototypeProvenance::kEmpiricalMean;

  std::vector<std::size_t> counts(class_ids.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = row_of.find(labels[i]);
    if (it == row_of.end()) continue;  // samples of other classes are ignored
    kernels::axpy(1.0, vectors.row(i), protos.prototypes.row(it->second), vectors.cols());
    ++counts[it->second];
  }
  for (std::size_t r = 0; r < class_ids.size(); ++r) {
    if (counts[r] == 0) {
      throw InvalidArgument("mean_prototypes: class " + std::to_string(class_ids[r]) +
                            " has no samples");
    }
    kernels::scale(1.0 / static_cast<double>(counts[r]), protos.prototypes.row(r),
                   vectors.cols());
  }
  return protos;
}

PrototypeSet seen_prototypes(const EmbeddingModel& model, const FeatureSet& features,
                             std::span<const ClassId> seen_ids, bool normalize_first) {
  Matrix lat(features.count(), model.latent_dim());
  for (std::size_t i = 0; i < features.count(); ++i) {
    std::vector<double> v = matvec_t(model.w_lat, features.features.row_span(i));
    if (normalize_first) v = l2_normalize(v);
    std::memcpy(lat.row(i), v.data(), v.size() * sizeof(double));
  }
  return mean_prototypes(lat, features.labels, seen_ids);
}

PrototypeSet unseen_prototypes(const TransferWeights& betas, const PrototypeSet& seen) {
  if (betas.seen_ids != seen.class_ids) {
    throw InvalidArgument(
        "unseen_prototypes: transfer weights are not indexed over the seen prototype classes");
  }
  PrototypeSet out;
  out.class_ids = betas.unseen_ids;
  out.prototypes = matmul(betas.betas, seen.prototypes);
  out.provenance = PrototypeProvenance::kTransferred;
  return out;
}

}  // namespace zsl
