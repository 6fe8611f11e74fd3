#pragma once

#include <filesystem>
#include <stdexcept>

#include "iovpr/image.hpp"

namespace iovpr {

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reading converts any PNG colour type to 8-bit RGB (alpha dropped).
RasterImage read_png_rgb(const std::filesystem::path& path);
void write_png_rgb(const std::filesystem::path& path, const RasterImage& image);

// Masks are single-channel PNGs; values >= 128 read as window.
LayoutMask read_png_mask(const std::filesystem::path& path);
void write_png_mask(const std::filesystem::path& path, const LayoutMask& mask);

// Class-id annotation raster, single 8-bit channel.
LabelRaster read_png_labels(const std::filesystem::path& path);
void write_png_labels(const std::filesystem::path& path, const LabelRaster& labels);

}  // namespace iovpr
