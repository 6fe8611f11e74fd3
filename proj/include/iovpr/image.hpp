#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace iovpr {

/// Thrown when an operation receives images or masks whose shapes disagree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Rgb {
    std::uint8_t r{0};
    std::uint8_t g{0};
    std::uint8_t b{0};

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB image, row-major, interleaved channels.
class RasterImage {
public:
    static constexpr int kChannels = 3;

    RasterImage() = default;
    RasterImage(int height, int width, Rgb fill = {});
    RasterImage(int height, int width, std::vector<std::uint8_t> pixels);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    bool empty() const noexcept { return pixels_.empty(); }

    Rgb at(int row, int col) const noexcept {
        const auto* p = &pixels_[offset(row, col)];
        return {p[0], p[1], p[2]};
    }
    void set(int row, int col, Rgb value) noexcept {
        auto* p = &pixels_[offset(row, col)];
        p[0] = value.r;
        p[1] = value.g;
        p[2] = value.b;
    }

    std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }
    std::span<std::uint8_t> bytes() noexcept { return pixels_; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t offset(int row, int col) const noexcept {
        return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(col)) * kChannels;
    }

    int height_{0};
    int width_{0};
    std::vector<std::uint8_t> pixels_;
};

/// Binary window mask; 1 marks a window pixel.
class LayoutMask {
public:
    LayoutMask() = default;
    LayoutMask(int height, int width, bool fill = false);
    LayoutMask(int height, int width, std::vector<std::uint8_t> bits);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    bool at(int row, int col) const noexcept {
        return bits_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                     static_cast<std::size_t>(col)] != 0;
    }
    void set(int row, int col, bool value) noexcept {
        bits_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
              static_cast<std::size_t>(col)] = value ? 1 : 0;
    }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::size_t count_ones() const noexcept;

    friend bool operator==(const LayoutMask&, const LayoutMask&) = default;

private:
    int height_{0};
    int width_{0};
    std::vector<std::uint8_t> bits_;
};

/// Single-channel 8-bit raster, used for class-id annotations and grayscale buffers.
struct LabelRaster {
    int height{0};
    int width{0};
    std::vector<std::uint8_t> values;

    std::uint8_t at(int row, int col) const noexcept {
        return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(col)];
    }
};

RasterImage resize_bilinear(const RasterImage& src, int height, int width);
LayoutMask resize_nearest(const LayoutMask& src, int height, int width);

/// Samples `src` at a continuous pixel-centre coordinate. Columns wrap around,
/// rows clamp to the image.
void sample_bilinear_wrap(const RasterImage& src, double row, double col, double out[3]) noexcept;

std::uint64_t checksum(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace iovpr
