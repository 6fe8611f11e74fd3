#include "iovpr/embed.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "binary_io.hpp"
#include "iovpr/rng.hpp"

namespace iovpr::embed {

namespace {

std::atomic<std::uint64_t> g_degenerate{0};

constexpr char kParamsMagic[4] = {'I', 'O', 'V', 'P'};
constexpr std::uint32_t kParamsVersion = 1;

}  // namespace

FeatureVector extract_features(const RasterImage& image) {
    if (image.empty()) {
        throw DimensionError("extract_features: zero-size image");
    }
    constexpr int n = kWorkingSize;
    const RasterImage small = resize_bilinear(image, n, n);
    std::array<double, n * n> gray{};
    const auto px = small.bytes();
    for (int i = 0; i < n * n; ++i) {
        gray[i] = (0.299 * px[3 * i] + 0.587 * px[3 * i + 1] + 0.114 * px[3 * i + 2]) / 255.0;
    }

    FeatureVector f(kFeatureDim, 0.0);

    constexpr int ib = n / kIntensityGrid;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            f[(r / ib) * kIntensityGrid + c / ib] += gray[r * n + c];
        }
    }
    for (int i = 0; i < kIntensityFeatures; ++i) {
        f[i] /= ib * ib;
    }

    auto g = [&](int r, int c) {
        r = std::clamp(r, 0, n - 1);
        c = std::clamp(c, 0, n - 1);
        return gray[r * n + c];
    };
    constexpr int ob = n / kOrientationGrid;
    constexpr double bin_width = 2.0 * std::numbers::pi / kOrientationBins;
    double* hist = f.data() + kIntensityFeatures;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const double gx = (g(r - 1, c + 1) + 2 * g(r, c + 1) + g(r + 1, c + 1)) -
                              (g(r - 1, c - 1) + 2 * g(r, c - 1) + g(r + 1, c - 1));
            // Image rows grow downward; flip so +y points up.
            const double gy = (g(r - 1, c - 1) + 2 * g(r - 1, c) + g(r - 1, c + 1)) -
                              (g(r + 1, c - 1) + 2 * g(r + 1, c) + g(r + 1, c + 1));
            const double mag = std::hypot(gx, gy);
            if (mag <= 0.0) {
                continue;
            }
            const double angle = std::atan2(gy, gx);
            int bin = static_cast<int>(std::floor((angle + bin_width / 2) / bin_width));
            bin = ((bin % kOrientationBins) + kOrientationBins) % kOrientationBins;
            const int block = (r / ob) * kOrientationGrid + c / ob;
            hist[block * kOrientationBins + bin] += mag;
        }
    }
    for (int b = 0; b < kOrientationGrid * kOrientationGrid; ++b) {
        double* h = hist + b * kOrientationBins;
        double sum = 0.0;
        for (int k = 0; k < kOrientationBins; ++k) {
            sum += h[k];
        }
        if (sum > 1e-12) {
            for (int k = 0; k < kOrientationBins; ++k) {
                h[k] /= sum;
            }
        } else {
            std::fill(h, h + kOrientationBins, 0.0);
        }
    }
    return f;
}

bool EmbedderParams::finite() const noexcept {
    return std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
}

std::uint64_t EmbedderParams::checksum() const noexcept {
    return iovpr::checksum({reinterpret_cast<const std::uint8_t*>(weights.data()), weights.size() * sizeof(double)});
}

EmbedderParams init_params(std::uint64_t seed, int feature_dim, int embed_dim) {
    if (feature_dim < 1 || embed_dim < 1) {
        throw std::invalid_argument("init_params: dimensions must be >= 1");
    }
    EmbedderParams p;
    p.feature_dim = feature_dim;
    p.embed_dim = embed_dim;
    p.seed = seed;
    p.weights.resize(static_cast<std::size_t>(feature_dim) * embed_dim);
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    for (auto& w : p.weights) {
        w = rng.uniform(-bound, bound);
    }
    return p;
}

std::vector<double> project(const EmbedderParams& params, std::span<const double> features) {
    if (static_cast<int>(features.size()) != params.feature_dim) {
        throw DimensionError("feature length " + std::to_string(features.size()) + " != F = " +
                             std::to_string(params.feature_dim));
    }
    const int d_dim = params.embed_dim;
    std::vector<double> u(static_cast<std::size_t>(d_dim), 0.0);
    const double* w = params.weights.data();
    for (int f = 0; f < params.feature_dim; ++f) {
        const double x = features[f];
        if (x == 0.0) {
            continue;
        }
        const double* row = w + static_cast<std::size_t>(f) * d_dim;
        for (int d = 0; d < d_dim; ++d) {
            u[d] += x * row[d];
        }
    }
    return u;
}

Embedding embed_features(const EmbedderParams& params, std::span<const double> features, bool* fallback) {
    auto u = project(params, features);
    double norm2 = 0.0;
    for (double v : u) {
        norm2 += v * v;
    }
    const bool degenerate = !(norm2 > 0.0) || !std::isfinite(norm2);
    if (fallback) {
        *fallback = degenerate;
    }
    if (degenerate) {
        g_degenerate.fetch_add(1, std::memory_order_relaxed);
        std::fill(u.begin(), u.end(), 0.0);
        u[0] = 1.0;
        return u;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : u) {
        v *= inv;
    }
    return u;
}

std::uint64_t degenerate_embedding_count() noexcept { return g_degenerate.load(std::memory_order_relaxed); }

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double distance(std::span<const double> a, std::span<const double> b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

void save_params(const std::filesystem::path& path, const EmbedderParams& params) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw ParamsFormatError("cannot write " + path.string());
    }
    os.write(kParamsMagic, 4);
    detail::put_u32(os, kParamsVersion);
    detail::put_u32(os, static_cast<std::uint32_t>(params.feature_dim));
    detail::put_u32(os, static_cast<std::uint32_t>(params.embed_dim));
    detail::put_u64(os, params.seed);
    for (double w : params.weights) {
        detail::put_f64(os, w);
    }
    if (!os) {
        throw ParamsFormatError("write failed: " + path.string());
    }
}

EmbedderParams load_params(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ParamsFormatError("cannot open " + path.string());
    }
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kParamsMagic, 4) != 0) {
        throw ParamsFormatError("bad magic in " + path.string());
    }
    const auto version = detail::get_u32<ParamsFormatError>(is);
    if (version != kParamsVersion) {
        throw ParamsFormatError("unsupported params version " + std::to_string(version));
    }
    EmbedderParams p;
    p.feature_dim = static_cast<int>(detail::get_u32<ParamsFormatError>(is));
    p.embed_dim = static_cast<int>(detail::get_u32<ParamsFormatError>(is));
    p.seed = detail::get_u64<ParamsFormatError>(is);
    if (p.feature_dim < 1 || p.embed_dim < 1) {
        throw ParamsFormatError("invalid dimensions in " + path.string());
    }
    p.weights.resize(static_cast<std::size_t>(p.feature_dim) * p.embed_dim);
    for (auto& w : p.weights) {
        w = detail::get_f64<ParamsFormatError>(is);
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw ParamsFormatError("trailing bytes in " + path.string());
    }
    return p;
}

}  // namespace iovpr::embed
