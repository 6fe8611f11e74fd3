#include "iovpr/panorama.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace iovpr::panorama {

namespace {

struct Basis {
    std::array<double, 3> forward;
    std::array<double, 3> right;
    std::array<double, 3> up;
};

Basis face_basis(Face face) {
    switch (face) {
        case Face::Front: return {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}};
        case Face::Right: return {{1, 0, 0}, {0, 0, -1}, {0, 1, 0}};
        case Face::Back: return {{0, 0, -1}, {-1, 0, 0}, {0, 1, 0}};
        case Face::Left: return {{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}};
        case Face::Top: return {{0, 1, 0}, {1, 0, 0}, {0, 0, -1}};
        case Face::Bottom: return {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}};
    }
    throw std::invalid_argument("unknown face");
}

std::uint8_t to_byte(double v) noexcept {
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5);
}

}  // namespace

std::array<double, 3> face_direction(Face face, double row, double col, int face_size) {
    const Basis b = face_basis(face);
    const double x = 2.0 * col / (face_size - 1) - 1.0;
    const double y = 1.0 - 2.0 * row / (face_size - 1);
    std::array<double, 3> d{};
    for (int i = 0; i < 3; ++i) {
        d[i] = b.forward[i] + x * b.right[i] + y * b.up[i];
    }
    const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    for (auto& v : d) {
        v /= n;
    }
    return d;
}

std::array<double, 2> direction_to_equirect(const std::array<double, 3>& dir, int pano_height,
                                            int pano_width) {
    const double yaw = std::atan2(dir[0], dir[2]);
    const double pitch = std::atan2(dir[1], std::hypot(dir[0], dir[2]));
    const double col = (pano_width - 1) / 2.0 + yaw * pano_width / (2.0 * std::numbers::pi);
    const double row = (pano_height - 1) / 2.0 - pitch * pano_height / std::numbers::pi;
    return {row, col};
}

RasterImage project_face(const RasterImage& pano, Face face, int face_size) {
    if (pano.empty() || face_size < 2) {
        throw DimensionError("project_face: empty panorama or face size < 2");
    }
    RasterImage out(face_size, face_size);
    double px[3];
    const Basis b = face_basis(face);
    const double col_scale = pano.width() / (2.0 * std::numbers::pi);
    const double row_scale = pano.height() / std::numbers::pi;
    const double col0 = (pano.width() - 1) / 2.0;
    const double row0 = (pano.height() - 1) / 2.0;
    if (b.up[1] != 1.0) {
        // Rays need not be normalised: both angles are ratios.
        for (int r = 0; r < face_size; ++r) {
            const double y = 1.0 - 2.0 * r / (face_size - 1);
            for (int c = 0; c < face_size; ++c) {
                const double x = 2.0 * c / (face_size - 1) - 1.0;
                double d[3];
                for (int i = 0; i < 3; ++i) {
                    d[i] = b.forward[i] + x * b.right[i] + y * b.up[i];
                }
                const double col = col0 + std::atan2(d[0], d[2]) * col_scale;
                const double row = row0 - std::atan2(d[1], std::sqrt(d[0] * d[0] + d[2] * d[2])) * row_scale;
                sample_bilinear_wrap(pano, row, col, px);
                out.set(r, c, {to_byte(px[0]), to_byte(px[1]), to_byte(px[2])});
            }
        }
        return out;
    }
    // Side faces: yaw and the horizontal extent of the ray depend on the column only.
    std::vector<double> cols(static_cast<std::size_t>(face_size)), horiz(static_cast<std::size_t>(face_size));
    for (int c = 0; c < face_size; ++c) {
        const double x = 2.0 * c / (face_size - 1) - 1.0;
        const double dx = b.forward[0] + x * b.right[0];
        const double dz = b.forward[2] + x * b.right[2];
        cols[c] = col0 + std::atan2(dx, dz) * col_scale;
        horiz[c] = std::hypot(dx, dz);
    }
    for (int r = 0; r < face_size; ++r) {
        const double y = 1.0 - 2.0 * r / (face_size - 1);
        for (int c = 0; c < face_size; ++c) {
            const double row = row0 - std::atan2(y, horiz[c]) * row_scale;
            sample_bilinear_wrap(pano, row, cols[c], px);
            out.set(r, c, {to_byte(px[0]), to_byte(px[1]), to_byte(px[2])});
        }
    }
    return out;
}

std::array<RasterImage, 6> project_to_faces(const PanoramaRecord& pano) {
    if (pano.image.height() != kPanoHeight || pano.image.width() != kPanoWidth) {
        throw DimensionError("panorama " + pano.pano_id + " is " + std::to_string(pano.image.height()) +
                             "x" + std::to_string(pano.image.width()) + ", expected 2000x4000");
    }
    std::array<RasterImage, 6> faces;
    for (int f = 0; f < 6; ++f) {
        faces[f] = project_face(pano.image, static_cast<Face>(f), kFaceSize);
    }
    return faces;
}

RasterImage stitch_and_crop(const std::array<RasterImage, 6>& faces) {
    for (int f = 0; f < 4; ++f) {
        if (faces[f].height() != kFaceSize || faces[f].width() != kFaceSize) {
            throw DimensionError("stitch_and_crop: lateral faces must be 960x960");
        }
    }
    RasterImage strip(kStripHeight, kStripWidth);
    auto dst = strip.bytes();
    const std::size_t face_row = static_cast<std::size_t>(kFaceSize) * 3;
    const std::size_t strip_row = static_cast<std::size_t>(kStripWidth) * 3;
    for (int f = 0; f < 4; ++f) {
        const auto src = faces[f].bytes();
        for (int r = 0; r < kStripHeight; ++r) {
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(r * face_row), face_row,
                        dst.begin() + static_cast<std::ptrdiff_t>(r * strip_row + f * face_row));
        }
    }
    return strip;
}

std::vector<PerspectiveTile> cut_tiles(const RasterImage& strip, const std::string& pano_id,
                                       const GeoPoint& location) {
    if (strip.height() != kStripHeight || strip.width() != kStripWidth) {
        throw DimensionError("cut_tiles: strip must be 720x3840");
    }
    std::vector<PerspectiveTile> tiles;
    tiles.reserve(kTilesPerPanorama);
    const auto src = strip.bytes();
    const std::size_t strip_row = static_cast<std::size_t>(kStripWidth) * 3;
    for (int pitch = 0; pitch < kPitchLevels; ++pitch) {
        const int y0 = pitch * kTileRowStride;
        for (int yaw = 0; yaw < kYawSteps; ++yaw) {
            const int x0 = yaw * kTileColStride;
            RasterImage tile(kTileHeight, kTileWidth);
            auto dst = tile.bytes();
            for (int r = 0; r < kTileHeight; ++r) {
                const auto* in = &src[static_cast<std::size_t>(y0 + r) * strip_row];
                auto* out = &dst[static_cast<std::size_t>(r) * kTileWidth * 3];
                const int first = std::min(kTileWidth, kStripWidth - x0);
                std::copy_n(in + static_cast<std::size_t>(x0) * 3, static_cast<std::size_t>(first) * 3, out);
                if (first < kTileWidth) {
                    std::copy_n(in, static_cast<std::size_t>(kTileWidth - first) * 3,
                                out + static_cast<std::size_t>(first) * 3);
                }
            }
            tiles.push_back({std::move(tile), pano_id, yaw, pitch, location});
        }
    }
    return tiles;
}

std::vector<PerspectiveTile> process_panorama(const PanoramaRecord& pano) {
    return cut_tiles(stitch_and_crop(project_to_faces(pano)), pano.pano_id, pano.location);
}

std::string tile_filename(const std::string& pano_id, int pitch_index, int yaw_index) {
    return pano_id + "_p" + std::to_string(pitch_index) + "_y" + std::to_string(yaw_index) + ".png";
}

}  // namespace iovpr::panorama
