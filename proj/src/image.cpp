#include "iovpr/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace iovpr {

namespace {

void check_dims(int height, int width) {
    if (height < 0 || width < 0) {
        throw DimensionError("negative image dimensions");
    }
}

std::uint8_t to_byte(double v) noexcept {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

RasterImage::RasterImage(int height, int width, Rgb fill) : height_(height), width_(width) {
    check_dims(height, width);
    pixels_.resize(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * kChannels);
    for (std::size_t i = 0; i < pixels_.size(); i += kChannels) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
    }
}

RasterImage::RasterImage(int height, int width, std::vector<std::uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
    check_dims(height, width);
    const auto expected =
        static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * kChannels;
    if (pixels_.size() != expected) {
        throw DimensionError("pixel buffer length " + std::to_string(pixels_.size()) +
                             " does not match " + std::to_string(height) + "x" +
                             std::to_string(width) + "x3");
    }
}

LayoutMask::LayoutMask(int height, int width, bool fill)
    : height_(height), width_(width),
      bits_(static_cast<std::size_t>(std::max(height, 0)) * static_cast<std::size_t>(std::max(width, 0)),
            fill ? 1 : 0) {
    check_dims(height, width);
}

LayoutMask::LayoutMask(int height, int width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
    check_dims(height, width);
    if (bits_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw DimensionError("mask buffer length does not match dimensions");
    }
    for (auto& b : bits_) {
        b = b != 0 ? 1 : 0;
    }
}

std::size_t LayoutMask::count_ones() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

RasterImage resize_bilinear(const RasterImage& src, int height, int width) {
    if (src.empty() || height <= 0 || width <= 0) {
        throw DimensionError("resize_bilinear: empty source or target");
    }
    if (src.height() == height && src.width() == width) {
        return src;
    }
    RasterImage out(height, width);
    const double sy = static_cast<double>(src.height()) / height;
    const double sx = static_cast<double>(src.width()) / width;
    const auto in = src.bytes();
    auto dst = out.bytes();
    const std::size_t stride = static_cast<std::size_t>(src.width()) * 3;
    for (int r = 0; r < height; ++r) {
        const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height() - 1);
        const double wy = fy - y0;
        for (int c = 0; c < width; ++c) {
            const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width() - 1);
            const double wx = fx - x0;
            const auto* p00 = &in[y0 * stride + x0 * 3];
            const auto* p01 = &in[y0 * stride + x1 * 3];
            const auto* p10 = &in[y1 * stride + x0 * 3];
            const auto* p11 = &in[y1 * stride + x1 * 3];
            auto* q = &dst[(static_cast<std::size_t>(r) * width + c) * 3];
            for (int ch = 0; ch < 3; ++ch) {
                const double top = p00[ch] + (p01[ch] - p00[ch]) * wx;
                const double bot = p10[ch] + (p11[ch] - p10[ch]) * wx;
                q[ch] = to_byte(top + (bot - top) * wy);
            }
        }
    }
    return out;
}

LayoutMask resize_nearest(const LayoutMask& src, int height, int width) {
    if (src.height() <= 0 || src.width() <= 0 || height <= 0 || width <= 0) {
        throw DimensionError("resize_nearest: empty source or target");
    }
    if (src.height() == height && src.width() == width) {
        return src;
    }
    LayoutMask out(height, width);
    for (int r = 0; r < height; ++r) {
        const int sr = std::min(static_cast<int>((r + 0.5) * src.height() / height), src.height() - 1);
        for (int c = 0; c < width; ++c) {
            const int sc = std::min(static_cast<int>((c + 0.5) * src.width() / width), src.width() - 1);
            out.set(r, c, src.at(sr, sc));
        }
    }
    return out;
}

void sample_bilinear_wrap(const RasterImage& src, double row, double col, double out[3]) noexcept {
    const int h = src.height();
    const int w = src.width();
    row = std::clamp(row, 0.0, h - 1.0);
    const int y0 = static_cast<int>(std::floor(row));
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = row - y0;
    const double fx = std::floor(col);
    const double wx = col - fx;
    int x0 = static_cast<int>(static_cast<long long>(fx) % w);
    if (x0 < 0) {
        x0 += w;
    }
    const int x1 = x0 + 1 == w ? 0 : x0 + 1;
    const auto in = src.bytes();
    const std::size_t stride = static_cast<std::size_t>(w) * 3;
    const auto* p00 = &in[y0 * stride + x0 * 3];
    const auto* p01 = &in[y0 * stride + x1 * 3];
    const auto* p10 = &in[y1 * stride + x0 * 3];
    const auto* p11 = &in[y1 * stride + x1 * 3];
    for (int ch = 0; ch < 3; ++ch) {
        const double top = p00[ch] + (p01[ch] - p00[ch]) * wx;
        const double bot = p10[ch] + (p11[ch] - p10[ch]) * wx;
        out[ch] = top + (bot - top) * wy;
    }
}

std::uint64_t checksum(std::span<const std::uint8_t> bytes) noexcept {
    // FNV-1a, 64-bit.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace iovpr
