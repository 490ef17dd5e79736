#include "zsl/zoom_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"
#include "zsl/rng.hpp"

namespace zsl {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

struct ProfileEval {
  double value;
  double d_center;
  double d_side;
};

ProfileEval eval_profile(double coord, double center, double side, double k_eff) {
  const double a = k_eff * (coord - center + 0.5 * side);
  const double b = k_eff * (coord - center - 0.5 * side);
  const double sa = sigmoid(a);
  const double sb = sigmoid(b);
  const double da = sa * (1.0 - sa);
  const double db = sb * (1.0 - sb);
  return {sa - sb, k_eff * (db - da), 0.5 * k_eff * (da + db)};
}

// Pixel-center sample positions of one output axis inside the crop span,
// in input pixel units, plus their partials w.r.t. the zoom parameters.
struct SampleAxis {
  std::vector<std::ptrdiff_t> lo;    // floor(position)
  std::vector<double> frac;          // position - floor(position)
  std::vector<double> dpos_dside;    // per-sample
  double dpos_dcenter = 0.0;         // constant along the axis
};

SampleAxis build_axis(std::size_t n_out, std::size_t n_in, double center, double side) {
  SampleAxis axis;
  axis.lo.resize(n_out);
  axis.frac.resize(n_out);
  axis.dpos_dside.resize(n_out);
  axis.dpos_dcenter = static_cast<double>(n_in);
  const double span = side * static_cast<double>(n_in);
  const double origin = (center - 0.5 * side) * static_cast<double>(n_in);
  for (std::size_t t = 0; t < n_out; ++t) {
    const double rel = (static_cast<double>(t) + 0.5) / static_cast<double>(n_out);
    const double pos = rel * span + origin - 0.5;
    const double lo = std::floor(pos);
    axis.lo[t] = static_cast<std::ptrdiff_t>(lo);
    axis.frac[t] = pos - lo;
    axis.dpos_dside[t] = (rel - 0.5) * static_cast<double>(n_in);
  }
  return axis;
}

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
  if (i < 0) return 0;
  if (i >= static_cast<std::ptrdiff_t>(n)) return n - 1;
  return static_cast<std::size_t>(i);
}

void check_grid(const ImageGrid& grid, const char* what) {
  if (grid.height < 2 || grid.width < 2 || grid.channels < 1) {
    throw InvalidArgument(std::string(what) + ": grid must be at least 2x2 with channels >= 1");
  }
  if (grid.values.size() != grid.height * grid.width * grid.channels) {
    throw InvalidArgument(std::string(what) + ": value buffer does not match grid dimensions");
  }
}

}  // namespace

double MaskConfig::effective_steepness(std::size_t height, std::size_t width) const {
  if (!rescale_steepness) return steepness;
  return steepness * static_cast<double>(std::min(height, width)) / 14.0;
}

double mask_profile(double coord, double center, double side, double k_eff) {
  return eval_profile(coord, center, side, k_eff).value;
}

void validate_zoom(const ZoomParams& zoom) {
  if (!(zoom.z_x > 0.0 && zoom.z_x < 1.0) || !(zoom.z_y > 0.0 && zoom.z_y < 1.0)) {
    throw InvalidArgument("zoom center (" + std::to_string(zoom.z_x) + ", " +
                          std::to_string(zoom.z_y) + ") must lie strictly inside (0,1)");
  }
  if (!(zoom.z_s >= kMinZoomSide && zoom.z_s <= 1.0)) {
    throw InvalidArgument("zoom side " + std::to_string(zoom.z_s) + " outside [" +
                          std::to_string(kMinZoomSide) + ", 1]");
  }
}

SoftMask soft_mask(const ZoomParams& zoom, const MaskConfig& cfg, std::size_t height,
                   std::size_t width) {
  validate_zoom(zoom);
  if (height < 2 || width < 2) throw InvalidArgument("soft_mask: grid must be at least 2x2");
  if (!(cfg.steepness > 0.0)) throw InvalidArgument("soft_mask: steepness must be positive");

  const double k_eff = cfg.effective_steepness(height, width);
  std::vector<double> mx(width);
  std::vector<double> my(height);
  for (std::size_t j = 0; j < width; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(width);
    mx[j] = mask_profile(u, zoom.z_x, zoom.z_s, k_eff);
  }
  for (std::size_t i = 0; i < height; ++i) {
    const double v = (static_cast<double>(i) + 0.5) / static_cast<double>(height);
    my[i] = mask_profile(v, zoom.z_y, zoom.z_s, k_eff);
  }

  SoftMask mask{Matrix(height, width)};
  for (std::size_t i = 0; i < height; ++i) {
    double* row = mask.values.row(i);
    for (std::size_t j = 0; j < width; ++j) row[j] = my[i] * mx[j];
  }
  return mask;
}

ImageGrid apply_mask(const ImageGrid& image, const SoftMask& mask) {
  check_grid(image, "apply_mask");
  if (mask.values.rows() != image.height || mask.values.cols() != image.width) {
    throw InvalidArgument("apply_mask: mask is " + std::to_string(mask.values.rows()) + "x" +
                          std::to_string(mask.values.cols()) + " but image is " +
                          std::to_string(image.height) + "x" + std::to_string(image.width));
  }
  ImageGrid out(image.height, image.width, image.channels);
  for (std::size_t c = 0; c < image.channels; ++c) {
    kernels::hadamard(image.plane(c), mask.values.data(), out.plane(c), image.plane_size());
  }
  return out;
}

ImageGrid bilinear_zoom(const ImageGrid& crop, const ZoomParams& zoom, std::size_t out_h,
                        std::size_t out_w) {
  check_grid(crop, "bilinear_zoom");
  validate_zoom(zoom);
  if (out_h < 2 || out_w < 2) throw InvalidArgument("bilinear_zoom: output must be at least 2x2");

  const SampleAxis rows = build_axis(out_h, crop.height, zoom.z_y, zoom.z_s);
  const SampleAxis cols = build_axis(out_w, crop.width, zoom.z_x, zoom.z_s);

  ImageGrid out(out_h, out_w, crop.channels);
  for (std::size_t c = 0; c < crop.channels; ++c) {
    const double* src = crop.plane(c);
    double* dst = out.plane(c);
    for (std::size_t i = 0; i < out_h; ++i) {
      const std::size_t r0 = clamp_index(rows.lo[i], crop.height);
      const std::size_t r1 = clamp_index(rows.lo[i] + 1, crop.height);
      const double fy = rows.frac[i];
      const double* row0 = src + r0 * crop.width;
      const double* row1 = src + r1 * crop.width;
      for (std::size_t j = 0; j < out_w; ++j) {
        const std::size_t c0 = clamp_index(cols.lo[j], crop.width);
        const std::size_t c1 = clamp_index(cols.lo[j] + 1, crop.width);
        const double fx = cols.frac[j];
        const double top = (1.0 - fx) * row0[c0] + fx * row0[c1];
        const double bottom = (1.0 - fx) * row1[c0] + fx * row1[c1];
        dst[i * out_w + j] = (1.0 - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

ImageGrid zoom_forward(const ImageGrid& image, const ZoomParams& zoom, const MaskConfig& cfg,
                       std::size_t out_h, std::size_t out_w) {
  const SoftMask mask = soft_mask(zoom, cfg, image.height, image.width);
  return bilinear_zoom(apply_mask(image, mask), zoom, out_h, out_w);
}

ZoomGrad zoom_backward(const ImageGrid& image, const ZoomParams& zoom, const MaskConfig& cfg,
                       const ImageGrid& upstream) {
  check_grid(image, "zoom_backward");
  check_grid(upstream, "zoom_backward upstream");
  validate_zoom(zoom);
  if (upstream.channels != image.channels) {
    throw InvalidArgument("zoom_backward: upstream has " + std::to_string(upstream.channels) +
                          " channels, image has " + std::to_string(image.channels));
  }

  const std::size_t in_h = image.height;
  const std::size_t in_w = image.width;
  const std::size_t out_h = upstream.height;
  const std::size_t out_w = upstream.width;
  const double k_eff = cfg.effective_steepness(in_h, in_w);

  // Mask profiles and their partials on the input grid.
  std::vector<ProfileEval> px(in_w);
  std::vector<ProfileEval> py(in_h);
  for (std::size_t j = 0; j < in_w; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(in_w);
    px[j] = eval_profile(u, zoom.z_x, zoom.z_s, k_eff);
  }
  for (std::size_t i = 0; i < in_h; ++i) {
    const double v = (static_cast<double>(i) + 0.5) / static_cast<double>(in_h);
    py[i] = eval_profile(v, zoom.z_y, zoom.z_s, k_eff);
  }

  // Cropped values (mask applied) for the sampling-position path.
  ImageGrid crop(in_h, in_w, image.channels);
  for (std::size_t c = 0; c < image.channels; ++c) {
    const double* src = image.plane(c);
    double* dst = crop.plane(c);
    for (std::size_t i = 0; i < in_h; ++i) {
      for (std::size_t j = 0; j < in_w; ++j) {
        dst[i * in_w + j] = src[i * in_w + j] * py[i].value * px[j].value;
      }
    }
  }

  const SampleAxis rows = build_axis(out_h, in_h, zoom.z_y, zoom.z_s);
  const SampleAxis cols = build_axis(out_w, in_w, zoom.z_x, zoom.z_s);

  ZoomGrad grad;
  // Upstream weight each input pixel receives through the bilinear stencil.
  ImageGrid backprojected(in_h, in_w, image.channels);

  for (std::size_t c = 0; c < image.channels; ++c) {
    const double* cr = crop.plane(c);
    const double* up = upstream.plane(c);
    double* bp = backprojected.plane(c);
    for (std::size_t i = 0; i < out_h; ++i) {
      const std::size_t r0 = clamp_index(rows.lo[i], in_h);
      const std::size_t r1 = clamp_index(rows.lo[i] + 1, in_h);
      const double fy = rows.frac[i];
      for (std::size_t j = 0; j < out_w; ++j) {
        const std::size_t c0 = clamp_index(cols.lo[j], in_w);
        const std::size_t c1 = clamp_index(cols.lo[j] + 1, in_w);
        const double fx = cols.frac[j];
        const double g = up[i * out_w + j];

        const double v00 = cr[r0 * in_w + c0];
        const double v01 = cr[r0 * in_w + c1];
        const double v10 = cr[r1 * in_w + c0];
        const double v11 = cr[r1 * in_w + c1];

        // Output value as a function of the continuous sample position.
        const double dval_dsy = (1.0 - fx) * (v10 - v00) + fx * (v11 - v01);
        const double dval_dsx = (1.0 - fy) * (v01 - v00) + fy * (v11 - v10);
        grad.dz_y += g * dval_dsy * rows.dpos_dcenter;
        grad.dz_x += g * dval_dsx * cols.dpos_dcenter;
        grad.dz_s += g * (dval_dsy * rows.dpos_dside[i] + dval_dsx * cols.dpos_dside[j]);

        bp[r0 * in_w + c0] += g * (1.0 - fy) * (1.0 - fx);
        bp[r0 * in_w + c1] += g * (1.0 - fy) * fx;
        bp[r1 * in_w + c0] += g * fy * (1.0 - fx);
        bp[r1 * in_w + c1] += g * fy * fx;
      }
    }
  }

  // Mask path: the crop value at (i,j) is image * M_y(i) * M_x(j).
  for (std::size_t i = 0; i < in_h; ++i) {
    for (std::size_t j = 0; j < in_w; ++j) {
      double coeff = 0.0;
      for (std::size_t c = 0; c < image.channels; ++c) {
        coeff += backprojected.at(c, i, j) * image.at(c, i, j);
      }
      grad.dz_x += coeff * py[i].value * px[j].d_center;
      grad.dz_y += coeff * px[j].value * py[i].d_center;
      grad.dz_s += coeff * (py[i].value * px[j].d_side + px[j].value * py[i].d_side);
    }
  }

  return grad;
}

ZoomParams window_search(const ImageGrid& activations, double window_frac) {
  check_grid(activations, "window_search");
  if (!(window_frac > 0.0)) throw InvalidArgument("window_search: window_frac must be positive");
  const std::size_t shorter = std::min(activations.height, activations.width);
  const std::size_t side =
      static_cast<std::size_t>(std::ceil(window_frac * static_cast<double>(shorter)));
  if (side < 1 || side > activations.height || side > activations.width) {
    throw InvalidArgument("window_search: window side " + std::to_string(side) +
                          " exceeds grid " + std::to_string(activations.height) + "x" +
                          std::to_string(activations.width));
  }

  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  std::size_t best_j = 0;
  for (std::size_t i = 0; i + side <= activations.height; ++i) {
    for (std::size_t j = 0; j + side <= activations.width; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < activations.channels; ++c) {
        const double* plane = activations.plane(c);
        for (std::size_t di = 0; di < side; ++di) {
          const double* row = plane + (i + di) * activations.width + j;
          for (std::size_t dj = 0; dj < side; ++dj) acc += row[dj];
        }
      }
      if (acc > best) {
        best = acc;
        best_i = i;
        best_j = j;
      }
    }
  }

  ZoomParams zoom;
  zoom.z_x = (static_cast<double>(best_j) + 0.5 * static_cast<double>(side)) /
             static_cast<double>(activations.width);
  zoom.z_y = (static_cast<double>(best_i) + 0.5 * static_cast<double>(side)) /
             static_cast<double>(activations.height);
  zoom.z_s = std::max(kMinZoomSide, static_cast<double>(side) / static_cast<double>(shorter));
  return zoom;
}

BlockMeanExtractor::BlockMeanExtractor(std::size_t height, std::size_t width,
                                       std::size_t channels, std::size_t blocks_y,
                                       std::size_t blocks_x)
    : height_(height), width_(width), channels_(channels), blocks_y_(blocks_y),
      blocks_x_(blocks_x) {
  if (blocks_y_ < 1 || blocks_x_ < 1 || blocks_y_ > height_ || blocks_x_ > width_) {
    throw InvalidArgument("BlockMeanExtractor: block grid does not fit the image");
  }
}

std::size_t BlockMeanExtractor::feature_dim() const { return channels_ * blocks_y_ * blocks_x_; }

namespace {

// Partition [0, n) into `blocks` contiguous chunks with sizes differing by <= 1.
std::size_t block_edge(std::size_t b, std::size_t blocks, std::size_t n) {
  return b * n / blocks;
}

}  // namespace

std::vector<double> BlockMeanExtractor::forward(const ImageGrid& grid) const {
  if (grid.height != height_ || grid.width != width_ || grid.channels != channels_) {
    throw InvalidArgument("BlockMeanExtractor: grid shape does not match extractor");
  }
  std::vector<double> feat(feature_dim(), 0.0);
  std::size_t idx = 0;
  for (std::size_t c = 0; c < channels_; ++c) {
    const double* plane = grid.plane(c);
    for (std::size_t by = 0; by < blocks_y_; ++by) {
      const std::size_t i0 = block_edge(by, blocks_y_, height_);
      const std::size_t i1 = block_edge(by + 1, blocks_y_, height_);
      for (std::size_t bx = 0; bx < blocks_x_; ++bx) {
        const std::size_t j0 = block_edge(bx, blocks_x_, width_);
        const std::size_t j1 = block_edge(bx + 1, blocks_x_, width_);
        double acc = 0.0;
        for (std::size_t i = i0; i < i1; ++i) {
          for (std::size_t j = j0; j < j1; ++j) acc += plane[i * width_ + j];
        }
        feat[idx++] = acc / static_cast<double>((i1 - i0) * (j1 - j0));
      }
    }
  }
  return feat;
}

ImageGrid BlockMeanExtractor::backward(const ImageGrid& grid,
                                       std::span<const double> upstream) const {
  if (grid.height != height_ || grid.width != width_ || grid.channels != channels_) {
    throw InvalidArgument("BlockMeanExtractor: grid shape does not match extractor");
  }
  if (upstream.size() != feature_dim()) {
    throw InvalidArgument("BlockMeanExtractor: upstream length does not match feature dim");
  }
  ImageGrid out(height_, width_, channels_);
  std::size_t idx = 0;
  for (std::size_t c = 0; c < channels_; ++c) {
    double* plane = out.plane(c);
    for (std::size_t by = 0; by < blocks_y_; ++by) {
      const std::size_t i0 = block_edge(by, blocks_y_, height_);
      const std::size_t i1 = block_edge(by + 1, blocks_y_, height_);
      for (std::size_t bx = 0; bx < blocks_x_; ++bx) {
        const std::size_t j0 = block_edge(bx, blocks_x_, width_);
        const std::size_t j1 = block_edge(bx + 1, blocks_x_, width_);
        const double g = upstream[idx++] / static_cast<double>((i1 - i0) * (j1 - j0));
        for (std::size_t i = i0; i < i1; ++i) {
          for (std::size_t j = j0; j < j1; ++j) plane[i * width_ + j] += g;
        }
      }
    }
  }
  return out;
}

RandomLinearExtractor::RandomLinearExtractor(std::size_t height, std::size_t width,
                                             std::size_t channels, std::size_t out_dim,
                                             std::uint64_t seed)
    : height_(height), width_(width), channels_(channels) {
  const std::size_t in_dim = height * width * channels;
  if (in_dim == 0 || out_dim == 0) {
    throw InvalidArgument("RandomLinearExtractor: dimensions must be positive");
  }
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  map_ = Matrix(out_dim, in_dim);
  for (std::size_t i = 0; i < out_dim; ++i) {
    for (std::size_t j = 0; j < in_dim; ++j) map_(i, j) = scale * rng.normal();
  }
}

std::size_t RandomLinearExtractor::feature_dim() const { return map_.rows(); }

std::vector<double> RandomLinearExtractor::forward(const ImageGrid& grid) const {
  if (grid.height != height_ || grid.width != width_ || grid.channels != channels_) {
    throw InvalidArgument("RandomLinearExtractor: grid shape does not match extractor");
  }
  return matvec(map_, grid.values);
}

ImageGrid RandomLinearExtractor::backward(const ImageGrid& grid,
                                          std::span<const double> upstream) const {
  if (grid.height != height_ || grid.width != width_ || grid.channels != channels_) {
    throw InvalidArgument("RandomLinearExtractor: grid shape does not match extractor");
  }
  ImageGrid out(height_, width_, channels_);
  out.values = matvec_t(map_, upstream);
  return out;
}

ZoomScore compatibility_zoom_grad(const ImageGrid& image, const ZoomParams& zoom,
                                  const MaskConfig& cfg,
                                  const DifferentiableFeatureExtractor& extractor,
                                  const Matrix& w_att, std::span<const double> attr,
                                  std::size_t out_h, std::size_t out_w) {
  const ImageGrid zoomed = zoom_forward(image, zoom, cfg, out_h, out_w);
  const std::vector<double> feat = extractor.forward(zoomed);
  if (feat.size() != w_att.rows()) {
    throw InvalidArgument("compatibility_zoom_grad: extractor dim does not match w_att rows");
  }
  const std::vector<double> proj = matvec_t(w_att, feat);
  if (attr.size() != proj.size()) {
    throw InvalidArgument("compatibility_zoom_grad: attribute dim does not match w_att cols");
  }

  ZoomScore result;
  result.score = kernels::dot(proj.data(), attr.data(), attr.size());

  const std::vector<double> dscore_dfeat = matvec(w_att, attr);
  const ImageGrid upstream = extractor.backward(zoomed, dscore_dfeat);
  result.grad = zoom_backward(image, zoom, cfg, upstream);
  return result;
}

std::vector<ZoomStep> optimize_zoom(const ImageGrid& image,
                                    const DifferentiableFeatureExtractor& extractor,
                                    const EmbeddingModel& model, const AttributeMatrix& attrs,
                                    ClassId true_class, const ZoomOptConfig& opt,
                                    const MaskConfig& cfg) {
  const int row = attrs.row_of(true_class);
  if (row < 0) {
    throw InvalidArgument("optimize_zoom: class " + std::to_string(true_class) +
                          " has no attribute row");
  }
  const std::span<const double> attr = attrs.values.row_span(static_cast<std::size_t>(row));
  const std::size_t out_h = opt.out_height != 0 ? opt.out_height : image.height;
  const std::size_t out_w = opt.out_width != 0 ? opt.out_width : image.width;

  ZoomParams z = opt.init;
  std::vector<ZoomStep> trajectory;
  trajectory.reserve(static_cast<std::size_t>(opt.steps) + 1);
  for (int step = 0; step < opt.steps; ++step) {
    const ZoomScore eval =
        compatibility_zoom_grad(image, z, cfg, extractor, model.w_att, attr, out_h, out_w);
    if (!std::isfinite(eval.score) || !std::isfinite(eval.grad.dz_x) ||
        !std::isfinite(eval.grad.dz_y) || !std::isfinite(eval.grad.dz_s)) {
      throw NumericFailure("optimize_zoom: non-finite gradient at step " + std::to_string(step),
                           step);
    }
    trajectory.push_back({z, eval.score});
    z.z_x = std::clamp(z.z_x + opt.learning_rate * eval.grad.dz_x, kMinZoomCenter,
                       1.0 - kMinZoomCenter);
    z.z_y = std::clamp(z.z_y + opt.learning_rate * eval.grad.dz_y, kMinZoomCenter,
                       1.0 - kMinZoomCenter);
    z.z_s = std::clamp(z.z_s + opt.learning_rate * eval.grad.dz_s, kMinZoomSide, 1.0);
  }
  const ZoomScore final_eval =
      compatibility_zoom_grad(image, z, cfg, extractor, model.w_att, attr, out_h, out_w);
  trajectory.push_back({z, final_eval.score});
  return trajectory;
}

}  // namespace zsl
