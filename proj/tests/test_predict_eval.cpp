#include <doctest.h>

#include <cmath>
#include <vector>

#include "zsl/error.hpp"
#include "zsl/predict_eval.hpp"
#include "test_util.hpp"

using namespace zsl;

namespace {

AttributeMatrix make_attrs(std::vector<ClassId> ids,
                           std::initializer_list<std::initializer_list<double>> rows) {
  AttributeMatrix attrs;
  attrs.class_ids = std::move(ids);
  attrs.values = Matrix::from_rows(rows);
  return attrs;
}

PrototypeSet make_protos(std::vector<ClassId> ids,
                         std::initializer_list<std::initializer_list<double>> rows) {
  PrototypeSet p;
  p.class_ids = std::move(ids);
  p.prototypes = Matrix::from_rows(rows);
  return p;
}

}  // namespace

TEST_CASE("predict_ua") {
  SUBCASE("self-match under orthonormal rows") {
    const AttributeMatrix attrs = make_attrs({5, 6, 7}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const PredictionResult r = predict_ua(std::vector<double>{0, 0, 1}, attrs);
    CHECK(r.predicted == 7);
    CHECK(r.space == PredictionSpace::kUA);
  }
  SUBCASE("direct argmax") {
    const AttributeMatrix attrs = make_attrs({0, 1}, {{1, 0}, {0, 1}});
    CHECK(predict_ua(std::vector<double>{0.9, 0.1}, attrs).predicted == 0);
  }
  SUBCASE("all-equal scores pick the lowest class id") {
    const AttributeMatrix attrs = make_attrs({3, 1, 2}, {{1, 1}, {1, 1}, {1, 1}});
    CHECK(predict_ua(std::vector<double>{0.5, 0.5}, attrs).predicted == 1);
  }
  SUBCASE("empty class set throws") {
    AttributeMatrix attrs;
    CHECK_THROWS_AS(predict_ua(std::vector<double>{1.0}, attrs), InvalidArgument);
  }
}

TEST_CASE("predict_la") {
  SUBCASE("prototype match") {
    const PrototypeSet p = make_protos({0, 1}, {{1, 0}, {0, 1}});
    CHECK(predict_la(std::vector<double>{1, 0}, p).predicted == 0);
  }
  SUBCASE("zero feature ties to the lowest id") {
    const PrototypeSet p = make_protos({4, 2}, {{1, 0}, {0, 1}});
    CHECK(predict_la(std::vector<double>{0, 0}, p).predicted == 2);
  }
  SUBCASE("inner-product argmax") {
    const PrototypeSet p = make_protos({0, 1}, {{1, 0}, {0.6, 0.8}});
    const PredictionResult r = predict_la(std::vector<double>{1, 1}, p);
    CHECK(r.scores[0] == doctest::Approx(1.0));
    CHECK(r.scores[1] == doctest::Approx(1.4));
    CHECK(r.predicted == 1);
  }
  SUBCASE("dimension mismatch throws") {
    const PrototypeSet p = make_protos({0}, {{1, 0}});
    CHECK_THROWS_AS(predict_la(std::vector<double>{1.0, 2.0, 3.0}, p), InvalidArgument);
  }
}

TEST_CASE("predict_combined") {
  const AttributeMatrix attrs = make_attrs({0, 1}, {{1, 0}, {0.9, 0.1}});
  const PrototypeSet protos = make_protos({0, 1}, {{0.1, 0.0}, {0.0, 0.4}});

  SUBCASE("zero prototypes reduce to predict_ua") {
    const PrototypeSet zero = make_protos({0, 1}, {{0, 0}, {0, 0}});
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
      const std::vector<double> att = zsl_test::random_vector(rng, 2);
      const std::vector<double> lat = zsl_test::random_vector(rng, 2);
      CHECK(predict_combined(att, lat, attrs, zero).predicted ==
            predict_ua(att, attrs).predicted);
    }
  }
  SUBCASE("zero attributes reduce to predict_la") {
    const AttributeMatrix zero = make_attrs({0, 1}, {{0, 0}, {0, 0}});
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
      const std::vector<double> att = zsl_test::random_vector(rng, 2);
      const std::vector<double> lat = zsl_test::random_vector(rng, 2);
      CHECK(predict_combined(att, lat, zero, protos).predicted ==
            predict_la(lat, protos).predicted);
    }
  }
  SUBCASE("the LA term can flip the UA winner") {
    // UA scores (1.0, 0.9), LA scores (0.1, 0.4) -> combined (1.1, 1.3).
    const AttributeMatrix ua = make_attrs({0, 1}, {{1.0}, {0.9}});
    const PrototypeSet la = make_protos({0, 1}, {{0.1}, {0.4}});
    const PredictionResult r =
        predict_combined(std::vector<double>{1.0}, std::vector<double>{1.0}, ua, la);
    CHECK(predict_ua(std::vector<double>{1.0}, ua).predicted == 0);
    CHECK(r.scores[0] == doctest::Approx(1.1));
    CHECK(r.scores[1] == doctest::Approx(1.3));
    CHECK(r.predicted == 1);
  }
  SUBCASE("scores are exactly the sum of the parts") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      const std::vector<double> att = zsl_test::random_vector(rng, 2);
      const std::vector<double> lat = zsl_test::random_vector(rng, 2);
      const PredictionResult ua = predict_ua(att, attrs);
      const PredictionResult la = predict_la(lat, protos);
      const PredictionResult both = predict_combined(att, lat, attrs, protos);
      for (std::size_t c = 0; c < 2; ++c) {
        CHECK(both.scores[c] == ua.scores[c] + la.scores[c]);
      }
    }
  }
  SUBCASE("mismatched class lists throw") {
    const PrototypeSet other = make_protos({0, 2}, {{0.1, 0.0}, {0.0, 0.4}});
    CHECK_THROWS_AS(predict_combined(std::vector<double>{1, 0}, std::vector<double>{1, 0}, attrs,
                                     other),
                    InvalidArgument);
  }
}

TEST_CASE("argmax rules are shift and scale invariant") {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    PrototypeSet protos;
    protos.class_ids = {0, 1, 2, 3};
    protos.prototypes = zsl_test::random_matrix(rng, 4, 3);
    const std::vector<double> lat = zsl_test::random_vector(rng, 3);
    const ClassId base = predict_la(lat, protos).predicted;

    // Common shift of every prototype adds the same constant to all scores.
    PrototypeSet shifted = protos;
    const std::vector<double> v = zsl_test::random_vector(rng, 3);
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t j = 0; j < 3; ++j) shifted.prototypes(c, j) += v[j];
    }
    // A shift may reorder only if the added constant differs per class; here
    // it is <lat, v> for every class, so the argmax must not move.
    CHECK(predict_la(lat, shifted).predicted == base);

    std::vector<double> scaled = lat;
    for (double& x : scaled) x *= 12.5;
    CHECK(predict_la(scaled, protos).predicted == base);
  }
}

TEST_CASE("mca") {
  SUBCASE("all correct is 100") {
    const std::vector<ClassId> preds = {0, 1, 1};
    const std::vector<ClassId> labels = {0, 1, 1};
    const McaReport r = mca(preds, labels, std::vector<ClassId>{0, 1});
    CHECK(r.mca == doctest::Approx(100.0));
  }
  SUBCASE("per-class mean, not per-sample") {
    // class 0: 2/2 correct; class 1: 0/1 -> MCA 50, sample accuracy 66.7.
    const std::vector<ClassId> preds = {0, 0, 0};
    const std::vector<ClassId> labels = {0, 0, 1};
    const McaReport r = mca(preds, labels, std::vector<ClassId>{0, 1});
    CHECK(r.mca == doctest::Approx(50.0));
  }
  SUBCASE("order invariance") {
    const std::vector<ClassId> preds = {1, 0, 1, 0};
    const std::vector<ClassId> labels = {1, 1, 0, 0};
    const std::vector<ClassId> preds_r = {0, 1, 0, 1};
    const std::vector<ClassId> labels_r = {0, 0, 1, 1};
    const std::vector<ClassId> classes = {0, 1};
    CHECK(mca(preds, labels, classes).mca == mca(preds_r, labels_r, classes).mca);
  }
  SUBCASE("classes without samples stay out of the mean") {
    const std::vector<ClassId> preds = {0};
    const std::vector<ClassId> labels = {0};
    const McaReport r = mca(preds, labels, std::vector<ClassId>{0, 9});
    CHECK(r.class_ids == std::vector<ClassId>{0});
    CHECK(r.mca == doctest::Approx(100.0));
  }
  SUBCASE("mca equals the mean of per-class accuracies") {
    Rng rng(5);
    const std::vector<ClassId> classes = {0, 1, 2, 3};
    std::vector<ClassId> labels;
    std::vector<ClassId> preds;
    for (int i = 0; i < 200; ++i) {
      labels.push_back(static_cast<ClassId>(rng.uniform_int(4)));
      preds.push_back(static_cast<ClassId>(rng.uniform_int(4)));
    }
    const McaReport r = mca(preds, labels, classes);
    double mean = 0.0;
    for (double a : r.per_class) mean += a;
    mean /= static_cast<double>(r.per_class.size());
    CHECK(std::fabs(r.mca - mean) < 1e-10);
  }
  SUBCASE("label outside the class set throws") {
    CHECK_THROWS_AS(mca(std::vector<ClassId>{0}, std::vector<ClassId>{5},
                        std::vector<ClassId>{0, 1}),
                    InvalidArgument);
  }
  SUBCASE("empty input throws") {
    CHECK_THROWS_AS(
        mca(std::vector<ClassId>{}, std::vector<ClassId>{}, std::vector<ClassId>{0}),
        InvalidArgument);
  }
}

TEST_CASE("harmonic mean reproduces the published gZSL summary values") {
  // (A_U->T, A_S->T, printed H) rows for both benchmarks.
  const double table[][3] = {
      {2.4, 77.9, 4.7},  {1.7, 76.8, 3.3},  {9.5, 75.9, 16.9}, {0.3, 67.3, 0.6},
      {0.4, 81.0, 0.8},  {9.8, 87.4, 17.6}, {4.0, 55.1, 7.5},  {1.0, 69.4, 2.0},
      {1.8, 69.9, 3.5},  {8.4, 66.5, 14.9}, {13.2, 72.0, 22.3}, {26.4, 81.6, 39.9},
  };
  for (const auto& row : table) {
    CHECK(std::fabs(harmonic_mean(row[0], row[1]) - row[2]) <= 0.05);
  }

  SUBCASE("equal accuracies collapse to themselves") {
    for (double a : {0.0, 12.5, 50.0, 100.0}) {
      CHECK(harmonic_mean(a, a) == doctest::Approx(a));
    }
  }
  SUBCASE("harmonic bounds hold everywhere") {
    Rng rng(6);
    for (int t = 0; t < 500; ++t) {
      const double a = rng.uniform(0.0, 100.0);
      const double b = rng.uniform(0.0, 100.0);
      const double h = harmonic_mean(a, b);
      CHECK(h <= 2.0 * std::min(a, b) + 1e-12);
      CHECK(h <= (a + b) / 2.0 + 1e-12);
      CHECK(h >= 0.0);
      CHECK(h <= 100.0 + 1e-12);
    }
  }
}

TEST_CASE("gzsl_eval computes partition accuracies over the joint space") {
  // Classes: seen {0,1}, unseen {2}; one-hot attributes; UA space.
  AttributeMatrix joint = make_attrs({0, 1, 2}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  PrototypeSet protos = make_protos({0, 1, 2}, {{0.0}, {0.0}, {0.0}});
  Split split;
  split.seen_classes = {0, 1};
  split.unseen_classes = {2};

  EmbeddedSet unseen_test;
  unseen_test.att = Matrix::from_rows({{0, 0, 1}, {0, 0, 1}});  // both right
  unseen_test.lat = Matrix(2, 1, 0.0);
  unseen_test.labels = {2, 2};

  EmbeddedSet seen_test;
  seen_test.att = Matrix::from_rows({{1, 0, 0}, {0, 0, 1}});  // second one wrong
  seen_test.lat = Matrix(2, 1, 0.0);
  seen_test.labels = {0, 1};

  const GzslReport r =
      gzsl_eval(unseen_test, seen_test, joint, protos, split, PredictionSpace::kUA);
  CHECK(r.acc_unseen_to_joint == doctest::Approx(100.0));
  CHECK(r.acc_seen_to_joint == doctest::Approx(50.0));
  CHECK(r.harmonic == doctest::Approx(harmonic_mean(100.0, 50.0)));
  CHECK(r.harmonic <= 2.0 * std::min(r.acc_unseen_to_joint, r.acc_seen_to_joint));

  SUBCASE("empty partition throws") {
    EmbeddedSet empty;
    CHECK_THROWS_AS(gzsl_eval(empty, seen_test, joint, protos, split, PredictionSpace::kUA),
                    InvalidArgument);
  }
}

TEST_CASE("activation_report") {
  EmbeddingModel model;
  model.w_att = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});  // att = feature
  model.w_lat = Matrix::from_rows({{1.0}, {0.0}});            // lat = first coordinate

  SUBCASE("constant element ranks by sample index") {
    const Matrix features = Matrix::from_rows({{3.0, 1.0}, {3.0, 2.0}, {3.0, 3.0}});
    const std::vector<ClassId> labels = {0, 1, 2};
    const ActivationReport r =
        activation_report(model, features, labels, PredictionSpace::kLA, 0, 2);
    REQUIRE(r.largest.size() == 2);
    CHECK(r.largest[0].sample == 0);
    CHECK(r.largest[1].sample == 1);
    CHECK(r.smallest[0].sample == 0);
  }

  SUBCASE("one-hot indicator element surfaces only its class") {
    // Element 1 of att equals feature[1], set to 1 exactly for class 7.
    const Matrix features =
        Matrix::from_rows({{0.5, 1.0}, {0.1, 0.0}, {0.9, 1.0}, {0.2, 0.0}});
    const std::vector<ClassId> labels = {7, 3, 7, 3};
    const ActivationReport r =
        activation_report(model, features, labels, PredictionSpace::kUA, 1, 2);
    REQUIRE(r.largest.size() == 2);
    CHECK(r.largest[0].label == 7);
    CHECK(r.largest[1].label == 7);
    CHECK(r.smallest[0].label == 3);
  }

  SUBCASE("top_k larger than n returns everything ordered") {
    const Matrix features = Matrix::from_rows({{1.0, 0.0}, {2.0, 0.0}});
    const std::vector<ClassId> labels = {0, 1};
    const ActivationReport r =
        activation_report(model, features, labels, PredictionSpace::kLA, 0, 10);
    CHECK(r.largest.size() == 2);
    CHECK(r.largest[0].sample == 1);
    CHECK(r.largest[1].sample == 0);
  }

  SUBCASE("element out of range throws") {
    const Matrix features = Matrix(1, 2, 0.0);
    const std::vector<ClassId> labels = {0};
    CHECK_THROWS_AS(activation_report(model, features, labels, PredictionSpace::kLA, 5, 1),
                    InvalidArgument);
  }
}
