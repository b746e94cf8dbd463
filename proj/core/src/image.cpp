#include "aerorecog/image.hpp"

#include <algorithm>
#include <cmath>

#include "aerorecog/errors.hpp"

namespace aerorecog {

void Image::clamp01() {
    for (double& v : data_) {
        if (std::isnan(v)) v = 0.0;
        v = std::clamp(v, 0.0, 1.0);
    }
}

double Image::mean() const {
    if (data_.empty()) return 0.0;
    double s = 0.0;
    for (double v : data_) s += v;
    return s / static_cast<double>(data_.size());
}

double sample_bilinear(const Image& img, double x, double y, bool& out_of_bounds) {
    const int w = img.width();
    const int h = img.height();
    out_of_bounds = x < 0.0 || y < 0.0 || x > w - 1.0 || y > h - 1.0;
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    const int x0 = std::min(static_cast<int>(x), w - 2 >= 0 ? w - 2 : 0);
    const int y0 = std::min(static_cast<int>(y), h - 2 >= 0 ? h - 2 : 0);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
    const double bot = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
    return (1.0 - fy) * top + fy * bot;
}

double sample_bilinear(const Image& img, double x, double y) {
    bool oob = false;
    return sample_bilinear(img, x, y, oob);
}

Image warp_image(const Image& src, const AffineWarp& w, int out_width, int out_height) {
    if (std::abs(w.det()) < 1e-12) {
        throw SingularWarp("warp_image: degenerate linear part");
    }
    Image out(out_width, out_height);
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            const Point q = w.apply(static_cast<double>(x), static_cast<double>(y));
            out.at(x, y) = sample_bilinear(src, q.x, q.y);
        }
    }
    return out;
}

std::pair<Image, Image> gradient(const Image& img) {
    const int w = img.width();
    const int h = img.height();
    if (w < 3 || h < 3) {
        throw ImageTooSmall("gradient: need at least 3x3");
    }
    Image gx(w, h), gy(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (x == 0) {
                gx.at(x, y) = img.at(1, y) - img.at(0, y);
            } else if (x == w - 1) {
                gx.at(x, y) = img.at(w - 1, y) - img.at(w - 2, y);
            } else {
                gx.at(x, y) = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));
            }
            if (y == 0) {
                gy.at(x, y) = img.at(x, 1) - img.at(x, 0);
            } else if (y == h - 1) {
                gy.at(x, y) = img.at(x, h - 1) - img.at(x, h - 2);
            } else {
                gy.at(x, y) = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));
            }
        }
    }
    return {std::move(gx), std::move(gy)};
}

Image downsample_half(const Image& img) {
    const int w = img.width();
    const int h = img.height();
    // horizontal [1 2 1]/4 with clamped borders
    Image tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, w - 1);
            tmp.at(x, y) = 0.25 * img.at(xm, y) + 0.5 * img.at(x, y) + 0.25 * img.at(xp, y);
        }
    }
    Image blur(w, h);
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            blur.at(x, y) = 0.25 * tmp.at(x, ym) + 0.5 * tmp.at(x, y) + 0.25 * tmp.at(x, yp);
        }
    }
    const int ow = (w + 1) / 2;
    const int oh = (h + 1) / 2;
    Image out(ow, oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            out.at(x, y) = blur.at(std::min(2 * x, w - 1), std::min(2 * y, h - 1));
        }
    }
    return out;
}

std::vector<Image> build_pyramid(const Image& img, int levels, int min_dim) {
    std::vector<Image> pyr;
    pyr.push_back(img);
    for (int l = 1; l < levels; ++l) {
        const Image& prev = pyr.back();
        if (prev.width() / 2 < min_dim || prev.height() / 2 < min_dim) break;
        pyr.push_back(downsample_half(prev));
    }
    return pyr;
}

}  // namespace aerorecog
