#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"
#include "zsl/zoom_kernel.hpp"
#include "test_util.hpp"

using namespace zsl;

namespace {

double zoom_loss(const ImageGrid& image, const ZoomParams& z, const MaskConfig& cfg,
                 const ImageGrid& upstream) {
  const ImageGrid out = zoom_forward(image, z, cfg, upstream.height, upstream.width);
  return kernels::dot(out.values.data(), upstream.values.data(), out.values.size());
}

// Deliberately naive re-enumeration used as the window_search oracle.
ZoomParams brute_force_window(const ImageGrid& grid, double frac) {
  const std::size_t shorter = std::min(grid.height, grid.width);
  const std::size_t side = static_cast<std::size_t>(std::ceil(frac * shorter));
  double best = -1e300;
  std::size_t bi = 0;
  std::size_t bj = 0;
  for (std::size_t i = 0; i + side <= grid.height; ++i) {
    for (std::size_t j = 0; j + side <= grid.width; ++j) {
      double s = 0.0;
      for (std::size_t dj = 0; dj < side; ++dj) {
        for (std::size_t di = 0; di < side; ++di) {
          for (std::size_t c = 0; c < grid.channels; ++c) s += grid.at(c, i + di, j + dj);
        }
      }
      if (s > best) {
        best = s;
        bi = i;
        bj = j;
      }
    }
  }
  ZoomParams z;
  z.z_x = (bj + 0.5 * side) / static_cast<double>(grid.width);
  z.z_y = (bi + 0.5 * side) / static_cast<double>(grid.height);
  z.z_s = std::max(kMinZoomSide, static_cast<double>(side) / static_cast<double>(shorter));
  return z;
}

}  // namespace

TEST_CASE("mask profile reproduces the sigmoid-difference values") {
  // zoom (0.5, 0.5, 0.5) at steepness 10: sigma(2.5) - sigma(-2.5) at the center.
  const double center = mask_profile(0.5, 0.5, 0.5, 10.0);
  CHECK(center == doctest::Approx(0.8482836399575131).epsilon(1e-12));
  CHECK(center * center == doctest::Approx(0.7196).epsilon(1e-3));

  const double corner = mask_profile(0.0, 0.5, 0.5, 10.0);
  CHECK(corner * corner == doctest::Approx(0.00567).epsilon(1e-2));
  CHECK(corner * corner < 0.05);
}

TEST_CASE("soft_mask is the outer product of the axis profiles") {
  const ZoomParams z{0.4, 0.6, 0.3};
  MaskConfig cfg;  // k_eff = 10 * 14/14 = 10 on a 14x14 grid
  const SoftMask mask = soft_mask(z, cfg, 14, 14);
  for (std::size_t i = 0; i < 14; ++i) {
    for (std::size_t j = 0; j < 14; ++j) {
      const double u = (j + 0.5) / 14.0;
      const double v = (i + 0.5) / 14.0;
      const double expected =
          mask_profile(v, z.z_y, z.z_s, 10.0) * mask_profile(u, z.z_x, z.z_s, 10.0);
      CHECK(mask.values(i, j) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("zoom parameter validation") {
  CHECK_THROWS_AS(soft_mask({0.0, 0.5, 0.5}, MaskConfig{}, 4, 4), InvalidArgument);
  CHECK_THROWS_AS(soft_mask({0.5, 1.0, 0.5}, MaskConfig{}, 4, 4), InvalidArgument);
  CHECK_THROWS_AS(soft_mask({0.5, 0.5, 0.01}, MaskConfig{}, 4, 4), InvalidArgument);
  CHECK_THROWS_AS(soft_mask({0.5, 0.5, 1.2}, MaskConfig{}, 4, 4), InvalidArgument);
  MaskConfig bad;
  bad.steepness = 0.0;
  CHECK_THROWS_AS(soft_mask({0.5, 0.5, 0.5}, bad, 4, 4), InvalidArgument);
  CHECK_THROWS_AS(bilinear_zoom(ImageGrid(4, 4, 1, 1.0), {0.5, 0.5, 0.5}, 1, 4),
                  InvalidArgument);
}

TEST_CASE("full-size mask peaks at the center") {
  const SoftMask mask = soft_mask({0.5, 0.5, 1.0}, MaskConfig{}, 14, 14);
  const double center = mask.values(7, 7);
  CHECK(center > mask.values(0, 0));
  CHECK(center > mask.values(0, 13));
  CHECK(center > mask.values(13, 0));
  CHECK(center > mask.values(13, 13));
}

TEST_CASE("mask entries stay strictly inside (0,1)") {
  Rng rng(2024);
  for (int t = 0; t < 60; ++t) {
    const std::size_t h = 2 + rng.uniform_int(30);
    const std::size_t w = 2 + rng.uniform_int(30);
    ZoomParams z;
    z.z_x = rng.uniform(0.05, 0.95);
    z.z_y = rng.uniform(0.05, 0.95);
    z.z_s = rng.uniform(kMinZoomSide, 1.0);
    const SoftMask mask = soft_mask(z, MaskConfig{}, h, w);
    for (std::size_t i = 0; i < mask.values.size(); ++i) {
      CHECK(mask.values.data()[i] > 0.0);
      CHECK(mask.values.data()[i] < 1.0);
    }
  }
}

TEST_CASE("steep mask approaches the crop indicator") {
  // k_eff = 1000, crop square [0.25, 0.75]^2 on a 28x28 grid. Points at least
  // two pixels inside the square read > 0.99, two pixels outside < 0.01.
  MaskConfig cfg;
  cfg.steepness = 1000.0;
  cfg.rescale_steepness = false;
  const ZoomParams z{0.5, 0.5, 0.5};
  const SoftMask mask = soft_mask(z, cfg, 28, 28);
  const double margin = 2.0 / 28.0;
  for (std::size_t i = 0; i < 28; ++i) {
    for (std::size_t j = 0; j < 28; ++j) {
      const double u = (j + 0.5) / 28.0;
      const double v = (i + 0.5) / 28.0;
      const bool inside = u > 0.25 + margin && u < 0.75 - margin && v > 0.25 + margin &&
                          v < 0.75 - margin;
      const bool outside = u < 0.25 - margin || u > 0.75 + margin || v < 0.25 - margin ||
                           v > 0.75 + margin;
      if (inside) CHECK(mask.values(i, j) > 0.99);
      if (outside) CHECK(mask.values(i, j) < 0.01);
    }
  }
}

TEST_CASE("apply_mask multiplies pointwise") {
  SUBCASE("all-ones mask is the identity") {
    Rng rng(3);
    const ImageGrid image = zsl_test::random_grid(rng, 4, 5, 2);
    SoftMask ones{Matrix(4, 5, 1.0)};
    CHECK(apply_mask(image, ones).values == image.values);
  }
  SUBCASE("zero image stays zero") {
    const ImageGrid zero(3, 3, 1, 0.0);
    const SoftMask mask = soft_mask({0.5, 0.5, 0.5}, MaskConfig{}, 3, 3);
    for (double v : apply_mask(zero, mask).values) CHECK(v == 0.0);
  }
  SUBCASE("constant times constant") {
    const ImageGrid image(2, 2, 1, 2.0);
    SoftMask quarter{Matrix(2, 2, 0.25)};
    for (double v : apply_mask(image, quarter).values) CHECK(v == doctest::Approx(0.5));
  }
  SUBCASE("dimension mismatch throws") {
    const ImageGrid image(2, 2, 1, 1.0);
    SoftMask mask{Matrix(3, 3, 0.5)};
    CHECK_THROWS_AS(apply_mask(image, mask), InvalidArgument);
  }
}

TEST_CASE("bilinear_zoom") {
  SUBCASE("constant image stays constant") {
    Rng rng(7);
    const ImageGrid image(6, 9, 2, 3.25);
    for (int t = 0; t < 10; ++t) {
      const ZoomParams z = zsl_test::safe_zoom_fixture(rng, 6, 9, 5, 7);
      for (double v : bilinear_zoom(image, z, 5, 7).values) {
        CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
      }
    }
  }

  SUBCASE("identity transform at full side") {
    Rng rng(8);
    const ImageGrid image = zsl_test::random_grid(rng, 7, 4, 3);
    const ImageGrid out = bilinear_zoom(image, {0.5, 0.5, 1.0}, 7, 4);
    for (std::size_t i = 0; i < image.values.size(); ++i) {
      CHECK(std::fabs(out.values[i] - image.values[i]) < 1e-10);
    }
  }

  SUBCASE("3x3 upsample of a 2x2 ramp hits the bilinear midpoint") {
    ImageGrid image(2, 2, 1);
    image.at(0, 0, 0) = 0.0;
    image.at(0, 0, 1) = 1.0;
    image.at(0, 1, 0) = 2.0;
    image.at(0, 1, 1) = 3.0;
    const ImageGrid out = bilinear_zoom(image, {0.5, 0.5, 1.0}, 3, 3);
    CHECK(out.at(0, 1, 1) == doctest::Approx(1.5).epsilon(1e-12));
  }

  SUBCASE("output stays inside the input value range") {
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
      const ImageGrid image = zsl_test::random_grid(rng, 5, 6, 1, -4.0, 4.0);
      ZoomParams z;
      z.z_x = rng.uniform(0.1, 0.9);
      z.z_y = rng.uniform(0.1, 0.9);
      z.z_s = rng.uniform(kMinZoomSide, 1.0);
      double lo = 1e300;
      double hi = -1e300;
      for (double v : image.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      for (double v : bilinear_zoom(image, z, 8, 8).values) {
        CHECK(v >= lo - 1e-10);
        CHECK(v <= hi + 1e-10);
      }
    }
  }
}

TEST_CASE("zoom_backward gradients") {
  SUBCASE("zero upstream gives zero gradient") {
    Rng rng(21);
    const ImageGrid image = zsl_test::random_grid(rng, 6, 6, 2);
    const ImageGrid upstream(5, 5, 2, 0.0);
    const ZoomGrad g = zoom_backward(image, {0.4, 0.6, 0.5}, MaskConfig{}, upstream);
    CHECK(g.dz_x == 0.0);
    CHECK(g.dz_y == 0.0);
    CHECK(g.dz_s == 0.0);
  }

  SUBCASE("matches central finite differences") {
    const MaskConfig cfg;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      const std::size_t in_h = 6 + rng.uniform_int(4);
      const std::size_t in_w = 6 + rng.uniform_int(4);
      const std::size_t channels = 1 + rng.uniform_int(2);
      const ImageGrid image = zsl_test::random_grid(rng, in_h, in_w, channels);
      const ImageGrid upstream = zsl_test::random_grid(rng, 5, 6, channels);
      const ZoomParams z = zsl_test::safe_zoom_fixture(rng, in_h, in_w, 5, 6);

      const ZoomGrad g = zoom_backward(image, z, cfg, upstream);
      const double h = 1e-5;
      const double fd_x = zsl_test::central_diff(
          [&](double v) { return zoom_loss(image, {v, z.z_y, z.z_s}, cfg, upstream); }, z.z_x, h);
      const double fd_y = zsl_test::central_diff(
          [&](double v) { return zoom_loss(image, {z.z_x, v, z.z_s}, cfg, upstream); }, z.z_y, h);
      const double fd_s = zsl_test::central_diff(
          [&](double v) { return zoom_loss(image, {z.z_x, z.z_y, v}, cfg, upstream); }, z.z_s, h);

      CHECK(zsl_test::rel_err(g.dz_x, fd_x) < 1e-4);
      CHECK(zsl_test::rel_err(g.dz_y, fd_y) < 1e-4);
      CHECK(zsl_test::rel_err(g.dz_s, fd_s) < 1e-4);
    }
  }

  SUBCASE("symmetric fixture has no center gradient") {
    ImageGrid image(8, 8, 1);
    const double profile[8] = {1, 2, 3, 4, 4, 3, 2, 1};
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 8; ++j) image.at(0, i, j) = profile[i] * profile[j];
    }
    const ImageGrid upstream(8, 8, 1, 1.0);
    // z_s = 0.7 keeps every sample position off the integer crossings, where
    // only a one-sided subgradient exists.
    const ZoomGrad g = zoom_backward(image, {0.5, 0.5, 0.7}, MaskConfig{}, upstream);
    CHECK(std::fabs(g.dz_x) < 1e-8);
    CHECK(std::fabs(g.dz_y) < 1e-8);
  }

  SUBCASE("channel mismatch throws") {
    const ImageGrid image(4, 4, 2, 1.0);
    const ImageGrid upstream(4, 4, 1, 1.0);
    CHECK_THROWS_AS(zoom_backward(image, {0.5, 0.5, 0.5}, MaskConfig{}, upstream),
                    InvalidArgument);
  }
}

TEST_CASE("window_search") {
  SUBCASE("hot cell in the bottom-right corner") {
    ImageGrid grid(4, 4, 1, 0.0);
    grid.at(0, 3, 3) = 5.0;
    const ZoomParams z = window_search(grid, 0.5);
    CHECK(z.z_x == doctest::Approx(0.75));
    CHECK(z.z_y == doctest::Approx(0.75));
    CHECK(z.z_s == doctest::Approx(0.5));
  }
  SUBCASE("uniform grid ties break to the top-left") {
    const ImageGrid grid(5, 5, 1, 1.0);
    const ZoomParams z = window_search(grid, 0.5);
    // side = ceil(2.5) = 3, origin (0,0)
    CHECK(z.z_x == doctest::Approx(1.5 / 5.0));
    CHECK(z.z_y == doctest::Approx(1.5 / 5.0));
  }
  SUBCASE("hot cell at the origin") {
    ImageGrid grid(6, 6, 1, 0.0);
    grid.at(0, 0, 0) = 2.0;
    const ZoomParams z = window_search(grid, 0.5);
    CHECK(z.z_y == doctest::Approx(1.5 / 6.0));
    CHECK(z.z_x == doctest::Approx(1.5 / 6.0));
  }
  SUBCASE("window larger than the grid throws") {
    const ImageGrid grid(4, 4, 1, 1.0);
    CHECK_THROWS_AS(window_search(grid, 1.3), InvalidArgument);
  }
  SUBCASE("agrees with brute-force enumeration on integer grids") {
    Rng rng(404);
    const double fracs[] = {0.3, 0.5, 0.75, 1.0};
    for (int t = 0; t < 50; ++t) {
      const std::size_t h = 2 + rng.uniform_int(15);
      const std::size_t w = 2 + rng.uniform_int(15);
      const std::size_t c = 1 + rng.uniform_int(2);
      ImageGrid grid(h, w, c);
      // Small integer values make ties common and sums exact.
      for (double& v : grid.values) v = static_cast<double>(rng.uniform_int(4));
      const double frac = fracs[rng.uniform_int(4)];
      const ZoomParams got = window_search(grid, frac);
      const ZoomParams want = brute_force_window(grid, frac);
      CHECK(got.z_x == want.z_x);
      CHECK(got.z_y == want.z_y);
      CHECK(got.z_s == want.z_s);
    }
  }
}

TEST_CASE("extractors are exact adjoints") {
  Rng rng(55);
  const ImageGrid grid = zsl_test::random_grid(rng, 6, 8, 2);

  const BlockMeanExtractor block(6, 8, 2, 2, 2);
  const RandomLinearExtractor linear(6, 8, 2, 10, 77);
  const DifferentiableFeatureExtractor* extractors[] = {&block, &linear};

  for (const auto* ex : extractors) {
    const std::vector<double> upstream = zsl_test::random_vector(rng, ex->feature_dim());
    const std::vector<double> feat = ex->forward(grid);
    const ImageGrid back = ex->backward(grid, upstream);
    // <u, F g> == <F^T u, g> for a linear extractor F.
    const double lhs = kernels::dot(upstream.data(), feat.data(), feat.size());
    const double rhs = kernels::dot(back.values.data(), grid.values.data(), grid.values.size());
    CHECK(zsl_test::rel_err(lhs, rhs) < 1e-12);
  }
}

namespace {

struct QuadrantFixture {
  ImageGrid image{8, 8, 1, 0.05};
  BlockMeanExtractor extractor{8, 8, 1, 2, 2};
  EmbeddingModel model;
  AttributeMatrix attrs;

  QuadrantFixture() {
    for (std::size_t i = 4; i < 8; ++i) {
      for (std::size_t j = 4; j < 8; ++j) image.at(0, i, j) = 1.0;
    }
    model.w_att = Matrix(4, 1, 0.0);
    model.w_att(3, 0) = 1.0;  // bottom-right block mean
    model.w_lat = Matrix(4, 1, 0.0);
    attrs.class_ids = {0};
    attrs.values = Matrix(1, 1, 1.0);
  }
};

}  // namespace

TEST_CASE("optimize_zoom") {
  const QuadrantFixture fx;

  SUBCASE("zero learning rate keeps the trajectory constant") {
    ZoomOptConfig opt;
    opt.steps = 5;
    opt.learning_rate = 0.0;
    const auto traj = optimize_zoom(fx.image, fx.extractor, fx.model, fx.attrs, 0, opt);
    REQUIRE(traj.size() == 6);
    for (const ZoomStep& s : traj) {
      CHECK(s.params.z_x == opt.init.z_x);
      CHECK(s.params.z_y == opt.init.z_y);
      CHECK(s.params.z_s == opt.init.z_s);
    }
  }

  SUBCASE("center moves toward the hot quadrant") {
    ZoomOptConfig opt;
    opt.steps = 150;
    opt.learning_rate = 0.01;
    const auto traj = optimize_zoom(fx.image, fx.extractor, fx.model, fx.attrs, 0, opt);
    const auto dist = [](const ZoomParams& z) {
      return std::hypot(z.z_x - 0.75, z.z_y - 0.75);
    };
    CHECK(dist(traj.back().params) < dist(traj.front().params));
  }

  SUBCASE("score is non-decreasing at a small learning rate") {
    ZoomOptConfig opt;
    opt.steps = 100;
    opt.learning_rate = 1e-3;
    const auto traj = optimize_zoom(fx.image, fx.extractor, fx.model, fx.attrs, 0, opt);
    for (std::size_t t = 1; t < traj.size(); ++t) {
      CHECK(traj[t].score >= traj[t - 1].score - 1e-12);
    }
  }

  SUBCASE("non-finite values abort with the step index") {
    ImageGrid bad = fx.image;
    bad.at(0, 0, 0) = std::numeric_limits<double>::infinity();
    ZoomOptConfig opt;
    opt.steps = 3;
    try {
      optimize_zoom(bad, fx.extractor, fx.model, fx.attrs, 0, opt);
      FAIL("expected NumericFailure");
    } catch (const NumericFailure& e) {
      CHECK(e.where() == 0);
    }
  }

  SUBCASE("unknown class throws") {
    ZoomOptConfig opt;
    CHECK_THROWS_AS(optimize_zoom(fx.image, fx.extractor, fx.model, fx.attrs, 9, opt),
                    InvalidArgument);
  }
}

TEST_CASE("end-to-end compatibility gradient matches finite differences") {
  const MaskConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 100);
    const ImageGrid image = zsl_test::random_grid(rng, 8, 8, 1, 0.0, 1.0);
    const RandomLinearExtractor extractor(6, 6, 1, 5, seed);
    const Matrix w_att = zsl_test::random_matrix(rng, 5, 3);
    const std::vector<double> attr = zsl_test::random_vector(rng, 3);
    const ZoomParams z = zsl_test::safe_zoom_fixture(rng, 8, 8, 6, 6);

    const ZoomScore res = compatibility_zoom_grad(image, z, cfg, extractor, w_att, attr, 6, 6);
    const auto score_at = [&](const ZoomParams& p) {
      return compatibility_zoom_grad(image, p, cfg, extractor, w_att, attr, 6, 6).score;
    };
    const double h = 1e-5;
    const double fd_x = zsl_test::central_diff(
        [&](double v) { return score_at({v, z.z_y, z.z_s}); }, z.z_x, h);
    const double fd_y = zsl_test::central_diff(
        [&](double v) { return score_at({z.z_x, v, z.z_s}); }, z.z_y, h);
    const double fd_s = zsl_test::central_diff(
        [&](double v) { return score_at({z.z_x, z.z_y, v}); }, z.z_s, h);
    CHECK(zsl_test::rel_err(res.grad.dz_x, fd_x) < 1e-4);
    CHECK(zsl_test::rel_err(res.grad.dz_y, fd_y) < 1e-4);
    CHECK(zsl_test::rel_err(res.grad.dz_s, fd_s) < 1e-4);
  }
}
