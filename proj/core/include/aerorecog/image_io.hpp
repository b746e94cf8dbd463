#pragma once

#include <filesystem>

#include "aerorecog/image.hpp"

namespace aerorecog {

/// Load a grayscale image from PNG or binary PGM (P5), chosen by file
/// signature. 8-bit samples map to [0,1] by division with 255; color PNG
/// inputs are reduced with luma = 0.299 R + 0.587 G + 0.114 B.
/// Throws IoError on unreadable or malformed files.
Image load_image(const std::filesystem::path& path);

/// Write as 8-bit grayscale PNG (values rounded to v*255, clamped).
void save_png(const Image& img, const std::filesystem::path& path);

/// Write as binary PGM (P5), maxval 255.
void save_pgm(const Image& img, const std::filesystem::path& path);

}  // namespace aerorecog
