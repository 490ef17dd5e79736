#ifndef ZSL_ZOOM_KERNEL_HPP_
#define ZSL_ZOOM_KERNEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zsl/core.hpp"
#include "zsl/matrix.hpp"

// Differentiable soft-crop machinery.
//
// Coordinate conventions used throughout:
//   * x runs along columns, y along rows.
//   * Normalized coordinates in [0,1]; the center of pixel (i,j) sits at
//     u = (j+0.5)/W, v = (i+0.5)/H.
//   * A zoom (z_x, z_y, z_s) selects the square
//     [z_x - z_s/2, z_x + z_s/2] x [z_y - z_s/2, z_y + z_s/2].
//   * Resampling positions are pixel-center aligned; source reads outside the
//     grid clamp to the border, so interpolation never leaves the value range.

namespace zsl {

// Lower bound on the crop side: the upsampling factor 1/z_s blows up as the
// side shrinks, so the side is clamped away from zero.
inline constexpr double kMinZoomSide = 0.05;
// Clamp range for the crop center during gradient-based optimization.
inline constexpr double kMinZoomCenter = 0.01;

struct ZoomParams {
  double z_x = 0.5;  // normalized center, x axis (columns), in (0,1)
  double z_y = 0.5;  // normalized center, y axis (rows), in (0,1)
  double z_s = 1.0;  // normalized side length, in [kMinZoomSide, 1]
};

// Sigmoid steepness for the soft mask. The reference value 10 is tuned for a
// 14x14 grid; with rescaling enabled the effective steepness grows with
// resolution so the transition stays equally sharp relative to the grid.
struct MaskConfig {
  double steepness = 10.0;
  bool rescale_steepness = true;

  double effective_steepness(std::size_t height, std::size_t width) const;
};

// Planar H x W x C grid of doubles; plane c is a contiguous H*W block.
struct ImageGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<double> values;

  ImageGrid() = default;
  ImageGrid(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
      : height(h), width(w), channels(c), values(h * w * c, fill) {}

  std::size_t plane_size() const { return height * width; }
  double* plane(std::size_t c) { return values.data() + c * plane_size(); }
  const double* plane(std::size_t c) const { return values.data() + c * plane_size(); }
  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return values[(c * height + i) * width + j];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return values[(c * height + i) * width + j];
  }
};

// Continuous 2-D crop mask; entries lie strictly inside (0,1).
struct SoftMask {
  Matrix values;  // H x W
};

// One axis of the mask: f(c - center + side/2) - f(c - center - side/2) with
// f the logistic sigmoid at steepness k_eff. Exposed for direct evaluation at
// arbitrary coordinates.
double mask_profile(double coord, double center, double side, double k_eff);

// Throws InvalidArgument when params are outside their valid ranges.
void validate_zoom(const ZoomParams& zoom);

SoftMask soft_mask(const ZoomParams& zoom, const MaskConfig& cfg, std::size_t height,
                   std::size_t width);

// out(c,i,j) = image(c,i,j) * mask(i,j).
ImageGrid apply_mask(const ImageGrid& image, const SoftMask& mask);

// Resamples the crop square of `crop` to out_h x out_w with bilinear weights.
ImageGrid bilinear_zoom(const ImageGrid& crop, const ZoomParams& zoom, std::size_t out_h,
                        std::size_t out_w);

// soft_mask + apply_mask + bilinear_zoom in one call.
ImageGrid zoom_forward(const ImageGrid& image, const ZoomParams& zoom, const MaskConfig& cfg,
                       std::size_t out_h, std::size_t out_w);

struct ZoomGrad {
  double dz_x = 0.0;
  double dz_y = 0.0;
  double dz_s = 0.0;
};

// Exact analytic partials of zoom_forward w.r.t. the three zoom parameters,
// contracted with `upstream` (the gradient w.r.t. the zoomed output). The
// chain runs through both the sigmoid mask and the bilinear sample positions.
ZoomGrad zoom_backward(const ImageGrid& image, const ZoomParams& zoom, const MaskConfig& cfg,
                       const ImageGrid& upstream);

// Slides a square window of side ceil(window_frac * min(H,W)) over the
// channel-summed activations and returns the highest-sum position as zoom
// params; ties pick the smallest (row, col). Stride is 1.
ZoomParams window_search(const ImageGrid& activations, double window_frac = 0.5);

// Maps a grid to a d-dim feature vector and pulls gradients back to the grid.
// Stands in for a conv backbone so the zoom gradient chain stays testable.
class DifferentiableFeatureExtractor {
 public:
  virtual ~DifferentiableFeatureExtractor() = default;

  virtual std::size_t feature_dim() const = 0;
  virtual std::vector<double> forward(const ImageGrid& grid) const = 0;
  // Returns d(upstream . feature)/d(grid) for the given input grid.
  virtual ImageGrid backward(const ImageGrid& grid, std::span<const double> upstream) const = 0;
};

// Per-block channel means over a blocks_y x blocks_x partition of the grid.
class BlockMeanExtractor : public DifferentiableFeatureExtractor {
 public:
  BlockMeanExtractor(std::size_t height, std::size_t width, std::size_t channels,
                     std::size_t blocks_y, std::size_t blocks_x);

  std::size_t feature_dim() const override;
  std::vector<double> forward(const ImageGrid& grid) const override;
  ImageGrid backward(const ImageGrid& grid, std::span<const double> upstream) const override;

 private:
  std::size_t height_, width_, channels_, blocks_y_, blocks_x_;
};

// Fixed seeded random linear map from the flattened grid to out_dim features.
class RandomLinearExtractor : public DifferentiableFeatureExtractor {
 public:
  RandomLinearExtractor(std::size_t height, std::size_t width, std::size_t channels,
                        std::size_t out_dim, std::uint64_t seed);

  std::size_t feature_dim() const override;
  std::vector<double> forward(const ImageGrid& grid) const override;
  ImageGrid backward(const ImageGrid& grid, std::span<const double> upstream) const override;

 private:
  std::size_t height_, width_, channels_;
  Matrix map_;  // out_dim x (H*W*C)
};

// True-class compatibility of the zoomed region and its gradient w.r.t. the
// zoom parameters: score = <w_att^T extractor(zoom_forward(image, z)), attr>.
struct ZoomScore {
  double score = 0.0;
  ZoomGrad grad;
};
ZoomScore compatibility_zoom_grad(const ImageGrid& image, const ZoomParams& zoom,
                                  const MaskConfig& cfg,
                                  const DifferentiableFeatureExtractor& extractor,
                                  const Matrix& w_att, std::span<const double> attr,
                                  std::size_t out_h, std::size_t out_w);

struct ZoomOptConfig {
  int steps = 40;
  double learning_rate = 0.01;
  ZoomParams init{0.5, 0.5, 0.5};
  std::size_t out_height = 0;  // 0 means same as input
  std::size_t out_width = 0;
};

struct ZoomStep {
  ZoomParams params;
  double score = 0.0;
};

// Gradient ascent on the true-class compatibility score. The returned
// trajectory holds steps+1 entries; entry t is the state before step t.
// Throws NumericFailure (with the step index) if a gradient turns non-finite.
std::vector<ZoomStep> optimize_zoom(const ImageGrid& image,
                                    const DifferentiableFeatureExtractor& extractor,
                                    const EmbeddingModel& model, const AttributeMatrix& attrs,
                                    ClassId true_class, const ZoomOptConfig& opt,
                                    const MaskConfig& cfg = {});

}  // namespace zsl

#endif  // ZSL_ZOOM_KERNEL_HPP_
