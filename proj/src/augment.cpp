#include "iovpr/augment.hpp"

#include <stdexcept>

#include "iovpr/png_io.hpp"

namespace iovpr::augment {

std::string_view to_string(LayoutKind kind) noexcept {
    return kind == LayoutKind::Gray ? "gray" : "real";
}

LayoutKind parse_layout_kind(std::string_view text) {
    if (text == "real" || text == "REAL") {
        return LayoutKind::Real;
    }
    if (text == "gray" || text == "GRAY") {
        return LayoutKind::Gray;
    }
    throw std::invalid_argument("unknown layout kind '" + std::string(text) + "'");
}

LayoutMask binarize_annotation(const LabelRaster& annotation, const std::set<std::uint8_t>& window_ids) {
    if (annotation.values.size() !=
        static_cast<std::size_t>(annotation.height) * static_cast<std::size_t>(annotation.width)) {
        throw DimensionError("annotation buffer does not match its dimensions");
    }
    std::vector<std::uint8_t> bits(annotation.values.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = window_ids.contains(annotation.values[i]) ? 1 : 0;
    }
    return LayoutMask(annotation.height, annotation.width, std::move(bits));
}

double window_proportion(const LayoutMask& mask) {
    const auto total = mask.bits().size();
    if (total == 0) {
        throw std::invalid_argument("window_proportion of an empty mask");
    }
    return static_cast<double>(mask.count_ones()) / static_cast<double>(total);
}

LayoutRecord make_layout(std::string layout_id, const RasterImage& image, const LayoutMask& mask) {
    LayoutRecord rec;
    rec.layout_id = std::move(layout_id);
    rec.image = resize_bilinear(image, kLayoutHeight, kLayoutWidth);
    rec.mask = resize_nearest(mask, kLayoutHeight, kLayoutWidth);
    rec.window_proportion = window_proportion(rec.mask);
    rec.kind = LayoutKind::Real;
    return rec;
}

LayoutRecord make_gray_layout(const LayoutRecord& layout) {
    if (layout.kind != LayoutKind::Real) {
        throw std::invalid_argument("make_gray_layout expects a REAL layout");
    }
    if (layout.image.height() != layout.mask.height() || layout.image.width() != layout.mask.width()) {
        throw DimensionError("layout image and mask dimensions differ");
    }
    LayoutRecord out = layout;
    out.kind = LayoutKind::Gray;
    for (int r = 0; r < out.image.height(); ++r) {
        for (int c = 0; c < out.image.width(); ++c) {
            if (!out.mask.at(r, c)) {
                out.image.set(r, c, kGrayFill);
            }
        }
    }
    return out;
}

RasterImage composite(const RasterImage& query, const LayoutMask& mask, const RasterImage& layout) {
    if (query.height() != mask.height() || query.width() != mask.width() ||
        layout.height() != mask.height() || layout.width() != mask.width()) {
        throw DimensionError("composite: query, mask and layout must share dimensions");
    }
    RasterImage out = layout;
    const auto q = query.bytes();
    const auto bits = mask.bits();
    auto dst = out.bytes();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            dst[3 * i] = q[3 * i];
            dst[3 * i + 1] = q[3 * i + 1];
            dst[3 * i + 2] = q[3 * i + 2];
        }
    }
    return out;
}

std::vector<LayoutRecord> filter_layouts(std::span<const LayoutRecord> layouts, double threshold) {
    if (!(threshold >= 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("filter threshold must lie in [0, 1)");
    }
    std::vector<LayoutRecord> out;
    for (const auto& rec : layouts) {
        if (rec.window_proportion > threshold) {
            out.push_back(rec);
        }
    }
    return out;
}

LayoutMask FullFrameMaskProvider::mask_for(const RasterImage& image, std::string_view) const {
    return LayoutMask(image.height(), image.width(), true);
}

LayoutMask ThresholdMaskProvider::mask_for(const RasterImage& image, std::string_view) const {
    LayoutMask mask(image.height(), image.width());
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            const Rgb p = image.at(r, c);
            mask.set(r, c, 0.299 * p.r + 0.587 * p.g + 0.114 * p.b >= threshold_);
        }
    }
    return mask;
}

LayoutMask FileMaskProvider::mask_for(const RasterImage& image, std::string_view key) const {
    auto mask = read_png_mask(directory_ / (std::string(key) + ".png"));
    return resize_nearest(mask, image.height(), image.width());
}

RasterImage gray_out_non_window(const RasterImage& image, const MaskProvider& provider, std::string_view key) {
    const auto mask = provider.mask_for(image, key);
    const RasterImage gray(image.height(), image.width(), kGrayFill);
    return composite(image, mask, gray);
}

}  // namespace iovpr::augment
