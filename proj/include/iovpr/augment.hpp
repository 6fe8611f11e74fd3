#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iovpr/image.hpp"

namespace iovpr::augment {

inline constexpr int kLayoutHeight = 480;
inline constexpr int kLayoutWidth = 640;

/// ImageNet mean colour, (0.485, 0.456, 0.406) x 255 rounded.
inline constexpr Rgb kGrayFill{124, 116, 104};

/// Window-proportion presets: candidate filter and the three training sets.
inline constexpr double kCandidateThreshold = 0.05;
inline constexpr double kThresholdPresets[] = {0.10, 0.20, 0.30};

enum class LayoutKind { Real, Gray };

std::string_view to_string(LayoutKind kind) noexcept;
LayoutKind parse_layout_kind(std::string_view text);

struct LayoutRecord {
    std::string layout_id;
    RasterImage image;
    LayoutMask mask;
    double window_proportion{0.0};
    LayoutKind kind{LayoutKind::Real};
};

/// Bit = 1 iff the class id is one of `window_ids`.
LayoutMask binarize_annotation(const LabelRaster& annotation, const std::set<std::uint8_t>& window_ids);

/// Fraction of window pixels. Throws std::invalid_argument on an empty mask.
double window_proportion(const LayoutMask& mask);

/// Builds a REAL record, resizing the image (bilinear) and mask (nearest) to 480x640.
LayoutRecord make_layout(std::string layout_id, const RasterImage& image, const LayoutMask& mask);

/// Recolours every non-window pixel to kGrayFill. Throws if the record is already gray.
LayoutRecord make_gray_layout(const LayoutRecord& layout);

/// q where the mask is set, `layout` elsewhere. All operands must share dimensions.
RasterImage composite(const RasterImage& query, const LayoutMask& mask, const RasterImage& layout);

inline RasterImage composite(const RasterImage& query, const LayoutRecord& layout) {
    return composite(query, layout.mask, layout.image);
}

/// Keeps records whose proportion is strictly greater than `threshold`.
std::vector<LayoutRecord> filter_layouts(std::span<const LayoutRecord> layouts, double threshold);

/// Source of window masks for arbitrary images.
class MaskProvider {
public:
    virtual ~MaskProvider() = default;
    /// `key` identifies the image (e.g. its file stem); the result matches the image's dimensions.
    virtual LayoutMask mask_for(const RasterImage& image, std::string_view key) const = 0;
};

/// Marks every pixel as window.
class FullFrameMaskProvider final : public MaskProvider {
public:
    LayoutMask mask_for(const RasterImage& image, std::string_view key) const override;
};

/// Window where the pixel's luminance (0.299, 0.587, 0.114) is at least the
/// threshold; a crude stand-in for a segmenter on bright outdoor views.
class ThresholdMaskProvider final : public MaskProvider {
public:
    explicit ThresholdMaskProvider(double threshold) : threshold_(threshold) {}
    LayoutMask mask_for(const RasterImage& image, std::string_view key) const override;

private:
    double threshold_;
};

/// Reads `<directory>/<key>.png`, resizing nearest-neighbour when dimensions differ.
class FileMaskProvider final : public MaskProvider {
public:
    explicit FileMaskProvider(std::filesystem::path directory) : directory_(std::move(directory)) {}
    LayoutMask mask_for(const RasterImage& image, std::string_view key) const override;

private:
    std::filesystem::path directory_;
};

/// Inference-time gray processing: predicted window pixels are kept and
/// everything else becomes kGrayFill.
RasterImage gray_out_non_window(const RasterImage& image, const MaskProvider& provider, std::string_view key);

}  // namespace iovpr::augment
