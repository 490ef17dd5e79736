#include "zsl/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_set>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"

namespace zsl {

int AttributeMatrix::row_of(ClassId id) const {
  for (std::size_t i = 0; i < class_ids.size(); ++i) {
    if (class_ids[i] == id) return static_cast<int>(i);
  }
  return -1;
}

AttributeMatrix AttributeMatrix::subset(std::span<const ClassId> ids) const {
  AttributeMatrix out;
  out.class_ids.assign(ids.begin(), ids.end());
  out.values = Matrix(ids.size(), dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int r = row_of(ids[i]);
    if (r < 0) throw InvalidArgument("attribute subset: unknown class id " + std::to_string(ids[i]));
    std::memcpy(out.values.row(i), values.row(static_cast<std::size_t>(r)), dim() * sizeof(double));
  }
  return out;
}

EmbeddedFeature project(const EmbeddingModel& model, std::span<const double> feature) {
  if (feature.size() != model.w_att.rows() || feature.size() != model.w_lat.rows()) {
    throw InvalidArgument("project: feature dimension " + std::to_string(feature.size()) +
                          " does not match model dimension " + std::to_string(model.w_att.rows()));
  }
  return {matvec_t(model.w_att, feature), matvec_t(model.w_lat, feature)};
}

EmbeddedFeature split_embedding(std::span<const double> phi_e, std::size_t k) {
  if (k < 1 || phi_e.size() < k + 1) {
    throw InvalidArgument("split_embedding: embedded length " + std::to_string(phi_e.size()) +
                          " cannot split into k=" + std::to_string(k) + " plus k_lat >= 1");
  }
  EmbeddedFeature out;
  out.att.assign(phi_e.begin(), phi_e.begin() + static_cast<std::ptrdiff_t>(k));
  out.lat.assign(phi_e.begin() + static_cast<std::ptrdiff_t>(k), phi_e.end());
  return out;
}

std::vector<double> l2_normalize(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  const double norm = norm2(v);
  if (norm > 1e-12) {
    for (double& x : out) x /= norm;
  }
  return out;
}

namespace {

void add(ValidationReport& report, Violation::Kind kind, std::string msg) {
  report.violations.push_back({kind, std::move(msg)});
}

}  // namespace

std::string ValidationReport::to_string() const {
  if (ok()) return "dataset valid\n";
  std::string out;
  for (const auto& v : violations) {
    out += v.message;
    out += '\n';
  }
  return out;
}

ValidationReport validate_dataset(const std::vector<FeatureSet>& features,
                                  const AttributeMatrix& attrs, const Split& split) {
  ValidationReport report;

  const std::set<ClassId> seen(split.seen_classes.begin(), split.seen_classes.end());
  const std::set<ClassId> unseen(split.unseen_classes.begin(), split.unseen_classes.end());
  for (ClassId id : seen) {
    if (unseen.count(id) != 0) {
      add(report, Violation::Kind::kSplitOverlap,
          "class " + std::to_string(id) + " listed as both seen and unseen");
    }
  }
  if (seen.empty()) add(report, Violation::Kind::kSplitOverlap, "seen class list is empty");
  if (unseen.empty()) add(report, Violation::Kind::kSplitOverlap, "unseen class list is empty");

  std::unordered_set<ClassId> attr_ids;
  for (ClassId id : attrs.class_ids) {
    if (!attr_ids.insert(id).second) {
      add(report, Violation::Kind::kMissingAttribute,
          "duplicate attribute row for class " + std::to_string(id));
    }
  }
  for (ClassId id : seen) {
    if (attr_ids.count(id) == 0) {
      add(report, Violation::Kind::kMissingAttribute,
          "seen class " + std::to_string(id) + " has no attribute row");
    }
  }
  for (ClassId id : unseen) {
    if (attr_ids.count(id) == 0) {
      add(report, Violation::Kind::kMissingAttribute,
          "unseen class " + std::to_string(id) + " has no attribute row");
    }
  }
  if (!attrs.values.all_finite()) {
    add(report, Violation::Kind::kNonFinite, "attribute matrix contains non-finite entries");
  }
  if (attrs.class_ids.size() != attrs.values.rows()) {
    add(report, Violation::Kind::kDimensionMismatch,
        "attribute row count does not match class id count");
  }

  for (const FeatureSet& fs : features) {
    const std::string tag = "scale " + std::to_string(fs.scale_id);
    if (fs.labels.size() != fs.count()) {
      add(report, Violation::Kind::kScaleMismatch, tag + ": label count != sample count");
    }
    if (fs.count() == 0) add(report, Violation::Kind::kScaleMismatch, tag + ": no samples");
    if (!fs.features.all_finite()) {
      add(report, Violation::Kind::kNonFinite, tag + ": features contain non-finite entries");
    }
    std::set<ClassId> flagged;
    for (ClassId y : fs.labels) {
      if (seen.count(y) == 0 && unseen.count(y) == 0 && flagged.insert(y).second) {
        add(report, Violation::Kind::kUnknownLabel,
            tag + ": label " + std::to_string(y) + " appears in neither class list");
      }
    }
  }

  for (std::size_t s = 1; s < features.size(); ++s) {
    const FeatureSet& first = features[0];
    const FeatureSet& cur = features[s];
    if (cur.dim() != first.dim()) {
      add(report, Violation::Kind::kDimensionMismatch,
          "scale " + std::to_string(cur.scale_id) + " feature dim " + std::to_string(cur.dim()) +
              " differs from scale " + std::to_string(first.scale_id) + " dim " +
              std::to_string(first.dim()));
    }
    if (cur.count() != first.count() || cur.labels != first.labels) {
      add(report, Violation::Kind::kScaleMismatch,
          "scale " + std::to_string(cur.scale_id) + " samples are not aligned with scale " +
              std::to_string(first.scale_id));
    }
  }

  return report;
}

}  // namespace zsl
