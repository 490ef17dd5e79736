#ifndef ZSL_IO_HPP_
#define ZSL_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "zsl/core.hpp"
#include "zsl/embedding.hpp"
#include "zsl/matrix.hpp"
#include "zsl/predict_eval.hpp"
#include "zsl/transfer.hpp"

namespace zsl {

// Binary matrix container (extension-independent, .csv switches to text):
//   offset 0   magic "ZSLM"
//   offset 4   version  u16 = 1
//   offset 6   rows     u32
//   offset 10  cols     u32
//   offset 14  dtype    u8 (0 = f32, 1 = f64)
//   offset 15  reserved u8 = 0
//   offset 16  row-major payload
// All integers and floats little-endian. f64 round-trips bit-exactly.
enum class MatrixDType : std::uint8_t { kF32 = 0, kF64 = 1 };

void save_matrix(const Matrix& m, const std::string& path,
                 MatrixDType dtype = MatrixDType::kF64);
Matrix load_matrix(const std::string& path);

void save_split(const Split& split, const std::string& path);
Split load_split(const std::string& path);

// Prototype sets pair a JSON header (class ids + provenance) with a matrix
// file holding the vectors; `path` is the JSON side.
void save_prototypes(const PrototypeSet& protos, const std::string& path);
PrototypeSet load_prototypes(const std::string& path);

enum class AttrNormalization { kNone, kMinMax, kL2 };

struct Dataset {
  std::vector<FeatureSet> scales;
  AttributeMatrix attrs;
  Split split;
};

struct RunConfig {
  std::vector<std::string> scale_paths;
  std::string labels_path;
  std::string attrs_path;
  std::string split_path;
  std::string out_dir = "out";
  PredictionSpace space = PredictionSpace::kCombined;
  AttrNormalization attr_norm = AttrNormalization::kNone;
  bool normalize_prototypes = false;  // l2 before averaging seen LA features
  double gzsl_holdout = 0.2;          // per-class fraction held out of training
  TrainConfig train;
  TransferConfig transfer;
};

// Parses the JSON run configuration. The training seed is mandatory; every
// referenced path must exist. Failures throw FormatError/InvalidArgument.
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

Dataset load_dataset(const RunConfig& cfg);

// Model bundle: a JSON manifest next to one matrix file per projection.
void save_models(const std::vector<EmbeddingModel>& models, const MultiScaleCombiner* combiner,
                 const std::string& dir);
struct LoadedModels {
  std::vector<EmbeddingModel> models;
  MultiScaleCombiner combiner;
  bool has_combiner = false;
};
LoadedModels load_models(const std::string& dir);

void save_train_report(const TrainReport& report, const std::string& path);
void save_mca_report(const McaReport& report, const std::string& path);
void save_predictions(const std::vector<std::size_t>& sample_ids,
                      const std::vector<ClassId>& labels, const std::vector<ClassId>& predictions,
                      PredictionSpace space, const std::string& path);

}  // namespace zsl

#endif  // ZSL_IO_HPP_
