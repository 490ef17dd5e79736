#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "zsl/error.hpp"
#include "zsl/io.hpp"
#include "zsl/synth.hpp"
#include "test_util.hpp"

using namespace zsl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("zsl_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("matrix binary format") {
  TempDir tmp;
  Rng rng(1);

  SUBCASE("f64 round-trip is bit exact") {
    const Matrix m = zsl_test::random_matrix(rng, 7, 3, -100.0, 100.0);
    const std::string path = tmp.file("m.zslm");
    save_matrix(m, path);
    CHECK(load_matrix(path) == m);
  }

  SUBCASE("f32 round-trip keeps float-cast values") {
    const Matrix m = zsl_test::random_matrix(rng, 4, 5);
    const std::string path = tmp.file("m32.zslm");
    save_matrix(m, path, MatrixDType::kF32);
    const Matrix back = load_matrix(path);
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(back.data()[i] == static_cast<double>(static_cast<float>(m.data()[i])));
    }
  }

  SUBCASE("bad magic reports offset 0") {
    const std::string path = tmp.file("bad.zslm");
    std::ofstream(path) << "XXXXsomething";
    try {
      load_matrix(path);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 0);
    }
  }

  SUBCASE("truncated payload reports the file size") {
    const Matrix m = zsl_test::random_matrix(rng, 10, 10);
    const std::string path = tmp.file("trunc.zslm");
    save_matrix(m, path);
    fs::resize_file(path, 100);
    try {
      load_matrix(path);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 100);
    }
  }

  SUBCASE("NaN payload is a data error") {
    Matrix m(2, 2, 1.0);
    m(1, 1) = std::nan("");
    const std::string path = tmp.file("nan.zslm");
    save_matrix(m, path);
    CHECK_THROWS_AS(load_matrix(path), DataError);
  }

  SUBCASE("csv fallback parses by extension") {
    const std::string path = tmp.file("m.csv");
    std::ofstream(path) << "1,2\n3,4\n";
    const Matrix m = load_matrix(path);
    CHECK(m == Matrix::from_rows({{1, 2}, {3, 4}}));
  }

  SUBCASE("csv save/load round-trips doubles via 17 digits") {
    const Matrix m = zsl_test::random_matrix(rng, 3, 4);
    const std::string path = tmp.file("rt.csv");
    save_matrix(m, path);
    CHECK(load_matrix(path) == m);
  }
}

TEST_CASE("split and prototype serialization") {
  TempDir tmp;

  SUBCASE("split round-trip") {
    Split s;
    s.seen_classes = {0, 1, 2, 5};
    s.unseen_classes = {3, 4};
    save_split(s, tmp.file("split.json"));
    const Split back = load_split(tmp.file("split.json"));
    CHECK(back.seen_classes == s.seen_classes);
    CHECK(back.unseen_classes == s.unseen_classes);
  }

  SUBCASE("prototypes keep provenance and ids") {
    Rng rng(2);
    PrototypeSet p;
    p.class_ids = {4, 7, 9};
    p.prototypes = zsl_test::random_matrix(rng, 3, 6);
    p.provenance = PrototypeProvenance::kTransferred;
    save_prototypes(p, tmp.file("protos.json"));
    const PrototypeSet back = load_prototypes(tmp.file("protos.json"));
    CHECK(back.class_ids == p.class_ids);
    CHECK(back.prototypes == p.prototypes);
    CHECK(back.provenance == PrototypeProvenance::kTransferred);
  }
}

TEST_CASE("model bundle round-trip") {
  TempDir tmp;
  Rng rng(3);
  std::vector<EmbeddingModel> models(2);
  for (int s = 0; s < 2; ++s) {
    models[s].scale_id = s + 1;
    models[s].w_att = zsl_test::random_matrix(rng, 6, 4);
    models[s].w_lat = zsl_test::random_matrix(rng, 6, 3);
  }
  MultiScaleCombiner combiner;
  combiner.w_com = zsl_test::random_matrix(rng, 8, 4);

  save_models(models, &combiner, tmp.file("models"));
  const LoadedModels back = load_models(tmp.file("models"));
  REQUIRE(back.models.size() == 2);
  CHECK(back.models[0].w_att == models[0].w_att);
  CHECK(back.models[1].w_lat == models[1].w_lat);
  CHECK(back.has_combiner);
  CHECK(back.combiner.w_com == combiner.w_com);
}

TEST_CASE("run config") {
  TempDir tmp;

  // Minimal on-disk dataset so path checks pass.
  save_matrix(Matrix(4, 3, 0.5), tmp.file("f1.zslm"));
  save_matrix(Matrix(4, 3, 0.25), tmp.file("f2.zslm"));
  save_matrix(Matrix(4, 1, 0.0), tmp.file("labels.zslm"));
  save_matrix(Matrix(2, 2, 0.1), tmp.file("attrs.zslm"));
  Split split;
  split.seen_classes = {0};
  split.unseen_classes = {1};
  save_split(split, tmp.file("split.json"));

  SUBCASE("round-trips through save/load") {
    RunConfig cfg;
    cfg.scale_paths = {tmp.file("f1.zslm"), tmp.file("f2.zslm")};
    cfg.labels_path = tmp.file("labels.zslm");
    cfg.attrs_path = tmp.file("attrs.zslm");
    cfg.split_path = tmp.file("split.json");
    cfg.out_dir = tmp.file("out");
    cfg.space = PredictionSpace::kLA;
    cfg.train.seed = 77;
    cfg.train.epochs = 5;
    cfg.transfer.lambda = 2.5;
    save_run_config(cfg, tmp.file("run.json"));

    const RunConfig back = load_run_config(tmp.file("run.json"));
    CHECK(back.scale_paths == cfg.scale_paths);
    CHECK(back.space == PredictionSpace::kLA);
    CHECK(back.train.seed == 77);
    CHECK(back.train.epochs == 5);
    CHECK(back.transfer.lambda == 2.5);
  }

  SUBCASE("missing seed is rejected") {
    std::ofstream(tmp.file("noseed.json"))
        << "{\"scales\":[\"" << tmp.file("f1.zslm") << "\"],"
        << "\"labels\":\"" << tmp.file("labels.zslm") << "\","
        << "\"attrs\":\"" << tmp.file("attrs.zslm") << "\","
        << "\"split\":\"" << tmp.file("split.json") << "\","
        << "\"train\":{\"epochs\":3}}";
    CHECK_THROWS_AS(load_run_config(tmp.file("noseed.json")), InvalidArgument);
  }

  SUBCASE("missing referenced file is rejected") {
    std::ofstream(tmp.file("missing.json"))
        << "{\"scales\":[\"" << tmp.file("nope.zslm") << "\"],"
        << "\"labels\":\"" << tmp.file("labels.zslm") << "\","
        << "\"attrs\":\"" << tmp.file("attrs.zslm") << "\","
        << "\"split\":\"" << tmp.file("split.json") << "\","
        << "\"train\":{\"seed\":1}}";
    CHECK_THROWS_AS(load_run_config(tmp.file("missing.json")), InvalidArgument);
  }
}

TEST_CASE("gen_synthetic") {
  SynthConfig cfg;
  cfg.seen_classes = 5;
  cfg.unseen_classes = 2;
  cfg.attr_dim = 6;
  cfg.feature_dim = 10;
  cfg.samples_per_class = 4;
  cfg.seed = 123;

  SUBCASE("deterministic per seed") {
    const Dataset a = gen_synthetic(cfg);
    const Dataset b = gen_synthetic(cfg);
    CHECK(a.attrs.values == b.attrs.values);
    for (std::size_t s = 0; s < a.scales.size(); ++s) {
      CHECK(a.scales[s].features == b.scales[s].features);
      CHECK(a.scales[s].labels == b.scales[s].labels);
    }
  }

  SUBCASE("different seeds differ") {
    const Dataset a = gen_synthetic(cfg);
    cfg.seed = 124;
    const Dataset b = gen_synthetic(cfg);
    CHECK(!(a.attrs.values == b.attrs.values));
  }

  SUBCASE("passes validation") {
    const Dataset ds = gen_synthetic(cfg);
    CHECK(validate_dataset(ds.scales, ds.attrs, ds.split).ok());
  }

  SUBCASE("no noise and no trait collapse a class to one point") {
    cfg.noise_sigma = 0.0;
    cfg.latent_amplitude = 0.0;
    const Dataset ds = gen_synthetic(cfg);
    const FeatureSet& fs = ds.scales[0];
    for (std::size_t i = 1; i < cfg.samples_per_class; ++i) {
      for (std::size_t j = 0; j < fs.dim(); ++j) {
        CHECK(fs.features(i, j) == fs.features(0, j));
      }
    }
  }

  SUBCASE("split covers the class range") {
    const Dataset ds = gen_synthetic(cfg);
    CHECK(ds.split.seen_classes.size() == 5);
    CHECK(ds.split.unseen_classes == std::vector<ClassId>{5, 6});
  }
}
