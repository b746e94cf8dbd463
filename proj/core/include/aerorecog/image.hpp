#pragma once

#include <cstddef>
#include <vector>

#include "aerorecog/warp.hpp"

namespace aerorecog {

/// Single-channel intensity raster. Samples are real-valued in [0,1],
/// stored row-major. All pipeline stages exchange pixels through this type.
class Image {
public:
    Image() = default;
    Image(int width, int height, double fill = 0.0)
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * height, fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    /// Clamp every sample into [0,1]; NaN becomes 0.
    void clamp01();

    double mean() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Bilinear interpolation of the 4 neighbors of (x,y). Coordinates outside
/// [0,w-1]x[0,h-1] are clamped to the border and `out_of_bounds` is set,
/// so callers can discount border-escaping pixels.
double sample_bilinear(const Image& img, double x, double y, bool& out_of_bounds);
double sample_bilinear(const Image& img, double x, double y);

/// Resample src through w: out(x,y) = src(W(x,y;w)). Throws SingularWarp
/// when the linear part of w is degenerate (|det| < 1e-12).
Image warp_image(const Image& src, const AffineWarp& w, int out_width, int out_height);

/// Central differences on the interior, one-sided at the borders.
/// Returns (dI/dx, dI/dy). Throws ImageTooSmall below 3x3.
std::pair<Image, Image> gradient(const Image& img);

/// One pyramid reduction: [1 2 1]/4 separable blur, then 2x decimation.
Image downsample_half(const Image& img);

/// Pyramid with `levels` entries; level 0 is the input, each further level
/// is downsample_half of the previous. Levels stop early if an image side
/// would fall below min_dim.
std::vector<Image> build_pyramid(const Image& img, int levels, int min_dim = 16);

}  // namespace aerorecog
