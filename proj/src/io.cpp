#include "zsl/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "zsl/error.hpp"

namespace zsl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'Z', 'S', 'L', 'M'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 16;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int s = 0; s < 64; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

bool has_csv_extension(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path);
}

Matrix parse_csv_matrix(const std::string& text, const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError(path + ": unparsable cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path + ": ragged csv row " + std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path + ": empty csv matrix");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (std::isnan(rows[i][j])) throw DataError(path + ": NaN in csv payload");
      m(i, j) = rows[i][j];
    }
  }
  return m;
}

}  // namespace

void save_matrix(const Matrix& m, const std::string& path, MatrixDType dtype) {
  if (has_csv_extension(path)) {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
        out += buf;
        out.push_back(j + 1 == m.cols() ? '\n' : ',');
      }
    }
    write_file(path, out);
    return;
  }

  std::string out;
  out.reserve(kHeaderSize + m.size() * (dtype == MatrixDType::kF64 ? 8 : 4));
  out.append(kMagic, 4);
  put_u16(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  out.push_back(static_cast<char>(dtype));
  out.push_back('\0');
  if (dtype == MatrixDType::kF64) {
    for (std::size_t i = 0; i < m.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
  } else {
    for (std::size_t i = 0; i < m.size(); ++i) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[i])));
    }
  }
  write_file(path, out);
}

Matrix load_matrix(const std::string& path) {
  const std::string bytes = read_file(path);
  if (has_csv_extension(path)) return parse_csv_matrix(bytes, path);

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 4 || std::memcmp(p, kMagic, 4) != 0) {
    throw FormatError(path + ": bad magic", 0);
  }
  if (bytes.size() < kHeaderSize) {
    throw FormatError(path + ": truncated header", static_cast<std::int64_t>(bytes.size()));
  }
  if (get_u16(p + 4) != kVersion) throw FormatError(path + ": unsupported version", 4);
  const std::size_t rows = get_u32(p + 6);
  const std::size_t cols = get_u32(p + 10);
  const std::uint8_t dtype = p[14];
  if (dtype != 0 && dtype != 1) throw FormatError(path + ": unknown dtype", 14);

  const std::size_t elem = dtype == 1 ? 8 : 4;
  const std::size_t expected = kHeaderSize + rows * cols * elem;
  if (bytes.size() < expected) {
    throw FormatError(path + ": truncated payload, expected " + std::to_string(expected) +
                          " bytes",
                      static_cast<std::int64_t>(bytes.size()));
  }

  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    double v;
    if (dtype == 1) {
      v = std::bit_cast<double>(get_u64(p + kHeaderSize + i * 8));
    } else {
      v = std::bit_cast<float>(get_u32(p + kHeaderSize + i * 4));
    }
    if (std::isnan(v)) {
      throw DataError(path + ": NaN at element " + std::to_string(i));
    }
    m.data()[i] = v;
  }
  return m;
}

void save_split(const Split& split, const std::string& path) {
  json j;
  j["seen"] = split.seen_classes;
  j["unseen"] = split.unseen_classes;
  write_file(path, j.dump(2) + "\n");
}

Split load_split(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (!j.contains("seen") || !j.contains("unseen")) {
    throw FormatError(path + ": split file needs 'seen' and 'unseen' lists");
  }
  Split split;
  split.seen_classes = j["seen"].get<std::vector<ClassId>>();
  split.unseen_classes = j["unseen"].get<std::vector<ClassId>>();
  return split;
}

namespace {

std::string sibling_path(const std::string& json_path, const std::string& name) {
  fs::path p(json_path);
  return (p.parent_path() / name).string();
}

}  // namespace

void save_prototypes(const PrototypeSet& protos, const std::string& path) {
  const std::string matrix_name = fs::path(path).stem().string() + ".zslm";
  json j;
  j["provenance"] = protos.provenance == PrototypeProvenance::kEmpiricalMean ? "empirical-mean"
                                                                             : "transferred";
  j["class_ids"] = protos.class_ids;
  j["matrix"] = matrix_name;
  write_file(path, j.dump(2) + "\n");
  save_matrix(protos.prototypes, sibling_path(path, matrix_name));
}

PrototypeSet load_prototypes(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  PrototypeSet protos;
  protos.class_ids = j.at("class_ids").get<std::vector<ClassId>>();
  protos.provenance = j.at("provenance").get<std::string>() == "transferred"
                          ? PrototypeProvenance::kTransferred
                          : PrototypeProvenance::kEmpiricalMean;
  protos.prototypes = load_matrix(sibling_path(path, j.at("matrix").get<std::string>()));
  if (protos.prototypes.rows() != protos.class_ids.size()) {
    throw DataError(path + ": prototype rows do not match class id count");
  }
  return protos;
}

namespace {

PredictionSpace parse_space(const std::string& s) {
  if (s == "ua") return PredictionSpace::kUA;
  if (s == "la") return PredictionSpace::kLA;
  if (s == "ua+la" || s == "combined") return PredictionSpace::kCombined;
  throw InvalidArgument("unknown prediction space '" + s + "' (use ua | la | ua+la)");
}

AttrNormalization parse_attr_norm(const std::string& s) {
  if (s == "none") return AttrNormalization::kNone;
  if (s == "minmax") return AttrNormalization::kMinMax;
  if (s == "l2") return AttrNormalization::kL2;
  throw InvalidArgument("unknown attr normalization '" + s + "' (use none | minmax | l2)");
}

TripletStrategy parse_strategy(const std::string& s) {
  if (s == "random") return TripletStrategy::kRandom;
  if (s == "semi-hard") return TripletStrategy::kSemiHard;
  throw InvalidArgument("unknown triplet strategy '" + s + "' (use random | semi-hard)");
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }

  RunConfig cfg;
  try {
    cfg.scale_paths = j.at("scales").get<std::vector<std::string>>();
    cfg.labels_path = j.at("labels").get<std::string>();
    cfg.attrs_path = j.at("attrs").get<std::string>();
    cfg.split_path = j.at("split").get<std::string>();
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("space")) cfg.space = parse_space(j["space"].get<std::string>());
    if (j.contains("attr_normalization")) {
      cfg.attr_norm = parse_attr_norm(j["attr_normalization"].get<std::string>());
    }
    cfg.normalize_prototypes = j.value("normalize_prototypes", false);
    cfg.gzsl_holdout = j.value("gzsl_holdout", 0.2);

    const json& t = j.at("train");
    if (!t.contains("seed")) {
      throw InvalidArgument(path + ": train.seed is mandatory, runs must be reproducible");
    }
    cfg.train.seed = t["seed"].get<std::uint64_t>();
    cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.margin = t.value("margin", cfg.train.margin);
    cfg.train.att_weight = t.value("att_weight", cfg.train.att_weight);
    cfg.train.lat_weight = t.value("lat_weight", cfg.train.lat_weight);
    cfg.train.momentum = t.value("momentum", cfg.train.momentum);
    cfg.train.latent_dim = t.value("latent_dim", cfg.train.latent_dim);
    if (t.contains("triplet_strategy")) {
      cfg.train.triplet_strategy = parse_strategy(t["triplet_strategy"].get<std::string>());
    }
    if (j.contains("transfer")) cfg.transfer.lambda = j["transfer"].value("lambda", 1.0);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }

  if (cfg.scale_paths.empty()) throw InvalidArgument(path + ": at least one scale required");
  for (const std::string& p : cfg.scale_paths) {
    if (!fs::exists(p)) throw InvalidArgument(path + ": missing scale file " + p);
  }
  for (const std::string& p : {cfg.labels_path, cfg.attrs_path, cfg.split_path}) {
    if (!fs::exists(p)) throw InvalidArgument(path + ": missing file " + p);
  }
  return cfg;
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  json j;
  j["scales"] = cfg.scale_paths;
  j["labels"] = cfg.labels_path;
  j["attrs"] = cfg.attrs_path;
  j["split"] = cfg.split_path;
  j["out_dir"] = cfg.out_dir;
  j["space"] = to_string(cfg.space);
  j["attr_normalization"] = cfg.attr_norm == AttrNormalization::kNone
                                ? "none"
                                : (cfg.attr_norm == AttrNormalization::kMinMax ? "minmax" : "l2");
  j["normalize_prototypes"] = cfg.normalize_prototypes;
  j["gzsl_holdout"] = cfg.gzsl_holdout;
  j["train"] = {
      {"seed", cfg.train.seed},
      {"epochs", cfg.train.epochs},
      {"learning_rate", cfg.train.learning_rate},
      {"batch_size", cfg.train.batch_size},
      {"margin", cfg.train.margin},
      {"att_weight", cfg.train.att_weight},
      {"lat_weight", cfg.train.lat_weight},
      {"momentum", cfg.train.momentum},
      {"latent_dim", cfg.train.latent_dim},
      {"triplet_strategy",
       cfg.train.triplet_strategy == TripletStrategy::kRandom ? "random" : "semi-hard"},
  };
  j["transfer"] = {{"lambda", cfg.transfer.lambda}};
  write_file(path, j.dump(2) + "\n");
}

Dataset load_dataset(const RunConfig& cfg) {
  Dataset ds;
  const Matrix label_matrix = load_matrix(cfg.labels_path);
  if (label_matrix.cols() != 1) {
    throw DataError(cfg.labels_path + ": labels must be a single column");
  }
  std::vector<ClassId> labels(label_matrix.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = static_cast<ClassId>(label_matrix(i, 0));
  }

  for (std::size_t s = 0; s < cfg.scale_paths.size(); ++s) {
    FeatureSet fs_s;
    fs_s.scale_id = static_cast<int>(s) + 1;
    fs_s.features = load_matrix(cfg.scale_paths[s]);
    fs_s.labels = labels;
    ds.scales.push_back(std::move(fs_s));
  }

  ds.attrs.values = load_matrix(cfg.attrs_path);
  ds.attrs.class_ids.resize(ds.attrs.values.rows());
  for (std::size_t c = 0; c < ds.attrs.class_ids.size(); ++c) {
    ds.attrs.class_ids[c] = static_cast<ClassId>(c);
  }
  ds.split = load_split(cfg.split_path);

  if (cfg.attr_norm == AttrNormalization::kMinMax) {
    Matrix& a = ds.attrs.values;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double lo = a(0, j);
      double hi = a(0, j);
      for (std::size_t i = 1; i < a.rows(); ++i) {
        lo = std::min(lo, a(i, j));
        hi = std::max(hi, a(i, j));
      }
      const double range = hi - lo;
      for (std::size_t i = 0; i < a.rows(); ++i) {
        a(i, j) = range > 0.0 ? (a(i, j) - lo) / range : 0.0;
      }
    }
  } else if (cfg.attr_norm == AttrNormalization::kL2) {
    Matrix& a = ds.attrs.values;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const std::vector<double> r = l2_normalize(a.row_span(i));
      std::memcpy(a.row(i), r.data(), r.size() * sizeof(double));
    }
  }
  return ds;
}

void save_models(const std::vector<EmbeddingModel>& models, const MultiScaleCombiner* combiner,
                 const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["scales"] = json::array();
  for (const EmbeddingModel& m : models) {
    const std::string att_name = "model_s" + std::to_string(m.scale_id) + "_watt.zslm";
    const std::string lat_name = "model_s" + std::to_string(m.scale_id) + "_wlat.zslm";
    save_matrix(m.w_att, (fs::path(dir) / att_name).string());
    save_matrix(m.w_lat, (fs::path(dir) / lat_name).string());
    manifest["scales"].push_back(
        {{"scale_id", m.scale_id}, {"w_att", att_name}, {"w_lat", lat_name}});
  }
  if (combiner != nullptr) {
    save_matrix(combiner->w_com, (fs::path(dir) / "model_combiner.zslm").string());
    manifest["combiner"] = "model_combiner.zslm";
  }
  write_file((fs::path(dir) / "model.json").string(), manifest.dump(2) + "\n");
}

LoadedModels load_models(const std::string& dir) {
  const std::string manifest_path = (fs::path(dir) / "model.json").string();
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw FormatError(manifest_path + ": " + e.what());
  }
  LoadedModels out;
  for (const json& entry : manifest.at("scales")) {
    EmbeddingModel m;
    m.scale_id = entry.at("scale_id").get<int>();
    m.w_att = load_matrix((fs::path(dir) / entry.at("w_att").get<std::string>()).string());
    m.w_lat = load_matrix((fs::path(dir) / entry.at("w_lat").get<std::string>()).string());
    out.models.push_back(std::move(m));
  }
  if (manifest.contains("combiner")) {
    out.combiner.w_com =
        load_matrix((fs::path(dir) / manifest["combiner"].get<std::string>()).string());
    out.has_combiner = true;
  }
  return out;
}

void save_train_report(const TrainReport& report, const std::string& path) {
  std::string out = "epoch,scale,att_loss,lat_loss,total\n";
  char buf[160];
  for (const EpochRecord& r : report.records) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", r.epoch, r.scale_id, r.att_loss,
                  r.lat_loss, r.total);
    out += buf;
  }
  write_file(path, out);
}

void save_mca_report(const McaReport& report, const std::string& path) {
  std::string out = "class,accuracy\n";
  char buf[96];
  for (std::size_t i = 0; i < report.class_ids.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", report.class_ids[i], report.per_class[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "mca,%.17g\n", report.mca);
  out += buf;
  write_file(path, out);
}

void save_predictions(const std::vector<std::size_t>& sample_ids,
                      const std::vector<ClassId>& labels, const std::vector<ClassId>& predictions,
                      PredictionSpace space, const std::string& path) {
  std::string out = "sample,label,predicted,space\n";
  char buf[96];
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%d,%s\n", sample_ids[i], labels[i], predictions[i],
                  to_string(space));
    out += buf;
  }
  write_file(path, out);
}

}  // namespace zsl
