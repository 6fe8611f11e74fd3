#include "iovpr/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

namespace iovpr {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw ImageIoError("cannot open " + path.string());
    }
    return f;
}

[[noreturn]] void png_error_fn(png_structp, png_const_charp msg) { throw ImageIoError(msg); }
void png_warning_fn(png_structp, png_const_charp) {}

struct Decoded {
    int height{0};
    int width{0};
    int channels{0};
    std::vector<std::uint8_t> data;
};

// Decodes to 8-bit gray (channels = 1) or RGB (channels = 3).
Decoded decode(const std::filesystem::path& path, bool want_rgb) {
    auto file = open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw ImageIoError("not a PNG file: " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_read_struct(p, i, nullptr); }
    } guard{&png, &info};

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (depth == 16) {
        png_set_strip_16(png);
    }
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) {
        png_set_strip_alpha(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
        png_set_strip_alpha(png);
    }
    const bool is_gray = (color & PNG_COLOR_MASK_COLOR) == 0 && color != PNG_COLOR_TYPE_PALETTE;
    if (want_rgb && is_gray) {
        png_set_gray_to_rgb(png);
    } else if (!want_rgb && !is_gray) {
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);

    Decoded out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = want_rgb ? 3 : 1;
    const auto rowbytes = png_get_rowbytes(png, info);
    if (rowbytes != static_cast<std::size_t>(out.width) * out.channels) {
        throw ImageIoError("unexpected PNG row layout: " + path.string());
    }
    out.data.resize(rowbytes * static_cast<std::size_t>(out.height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(out.height));
    for (int r = 0; r < out.height; ++r) {
        rows[r] = out.data.data() + rowbytes * static_cast<std::size_t>(r);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return out;
}

void encode(const std::filesystem::path& path, int height, int width, int channels,
            const std::uint8_t* data) {
    auto file = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_write_struct(p, i); }
    } guard{&png, &info};

    png_init_io(png, file.get());
    // Fixed settings keep the encoded bytes reproducible.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_SUB);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t rowbytes = static_cast<std::size_t>(width) * channels;
    for (int r = 0; r < height; ++r) {
        png_write_row(png, const_cast<png_bytep>(data + rowbytes * static_cast<std::size_t>(r)));
    }
    png_write_end(png, nullptr);
}

}  // namespace

RasterImage read_png_rgb(const std::filesystem::path& path) {
    auto d = decode(path, true);
    return RasterImage(d.height, d.width, std::move(d.data));
}

void write_png_rgb(const std::filesystem::path& path, const RasterImage& image) {
    if (image.empty()) {
        throw ImageIoError("refusing to write empty image " + path.string());
    }
    encode(path, image.height(), image.width(), 3, image.bytes().data());
}

LayoutMask read_png_mask(const std::filesystem::path& path) {
    auto d = decode(path, false);
    for (auto& v : d.data) {
        v = v >= 128 ? 1 : 0;
    }
    return LayoutMask(d.height, d.width, std::move(d.data));
}

void write_png_mask(const std::filesystem::path& path, const LayoutMask& mask) {
    std::vector<std::uint8_t> gray(mask.bits().begin(), mask.bits().end());
    for (auto& v : gray) {
        v = v != 0 ? 255 : 0;
    }
    encode(path, mask.height(), mask.width(), 1, gray.data());
}

LabelRaster read_png_labels(const std::filesystem::path& path) {
    auto d = decode(path, false);
    return LabelRaster{d.height, d.width, std::move(d.data)};
}

void write_png_labels(const std::filesystem::path& path, const LabelRaster& labels) {
    encode(path, labels.height, labels.width, 1, labels.values.data());
}

}  // namespace iovpr
