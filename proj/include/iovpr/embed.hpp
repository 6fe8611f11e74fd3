#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "iovpr/image.hpp"

namespace iovpr::embed {

inline constexpr int kWorkingSize = 64;
inline constexpr int kIntensityGrid = 16;
inline constexpr int kOrientationGrid = 4;
inline constexpr int kOrientationBins = 8;
inline constexpr int kIntensityFeatures = kIntensityGrid * kIntensityGrid;                      // 256
inline constexpr int kOrientationFeatures = kOrientationGrid * kOrientationGrid * kOrientationBins;  // 128
inline constexpr int kFeatureDim = kIntensityFeatures + kOrientationFeatures;                    // 384
inline constexpr int kDefaultEmbedDim = 64;

using FeatureVector = std::vector<double>;
using Embedding = std::vector<double>;

/// Handcrafted descriptor of an image:
///  - [0, 256): 16x16 block-mean grayscale intensities in [0, 1], row-major;
///  - [256, 384): for each of the 4x4 blocks (row-major), an 8-bin histogram of
///    Sobel gradient orientation weighted by magnitude, L1-normalised (all zero
///    when the block has no gradient). Bin k is centred on k * 45 degrees, with
///    0 degrees pointing along +x (a vertical edge).
/// The image is first resized to 64x64 (bilinear).
FeatureVector extract_features(const RasterImage& image);

/// Linear map theta: F x D matrix, row-major.
struct EmbedderParams {
    int feature_dim{kFeatureDim};
    int embed_dim{kDefaultEmbedDim};
    std::uint64_t seed{0};
    std::vector<double> weights;

    double& at(int f, int d) { return weights[static_cast<std::size_t>(f) * embed_dim + d]; }
    double at(int f, int d) const { return weights[static_cast<std::size_t>(f) * embed_dim + d]; }
    bool finite() const noexcept;
    std::uint64_t checksum() const noexcept;

    friend bool operator==(const EmbedderParams&, const EmbedderParams&) = default;
};

/// Entries i.i.d. uniform in [-1/sqrt(F), 1/sqrt(F)] drawn row-major from Rng(seed).
EmbedderParams init_params(std::uint64_t seed, int feature_dim = kFeatureDim, int embed_dim = kDefaultEmbedDim);

/// u = W^T f (length D), before normalisation.
std::vector<double> project(const EmbedderParams& params, std::span<const double> features);

/// normalize(W^T f). A zero projection yields the unit vector e1; `fallback` (if
/// given) is set and the process-wide degenerate counter is incremented.
Embedding embed_features(const EmbedderParams& params, std::span<const double> features,
                         bool* fallback = nullptr);

inline Embedding embed(const EmbedderParams& params, const RasterImage& image, bool* fallback = nullptr) {
    return embed_features(params, extract_features(image), fallback);
}

std::uint64_t degenerate_embedding_count() noexcept;

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
double distance(std::span<const double> a, std::span<const double> b) noexcept;

class ParamsFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary layout, little-endian: "IOVP", u32 version (1), u32 F, u32 D, u64 seed,
/// then F*D float64 row-major.
void save_params(const std::filesystem::path& path, const EmbedderParams& params);
EmbedderParams load_params(const std::filesystem::path& path);

}  // namespace iovpr::embed
