#pragma once

#include <array>
#include <string>
#include <vector>

#include "iovpr/geo.hpp"
#include "iovpr/image.hpp"

namespace iovpr::panorama {

inline constexpr int kPanoHeight = 2000;
inline constexpr int kPanoWidth = 4000;
inline constexpr int kFaceSize = 960;
inline constexpr int kCroppedRows = 240;
inline constexpr int kStripHeight = kFaceSize - kCroppedRows;  // 720
inline constexpr int kStripWidth = 4 * kFaceSize;               // 3840
inline constexpr int kTileHeight = 480;
inline constexpr int kTileWidth = 640;
inline constexpr int kTileRowStride = 240;
inline constexpr int kTileColStride = 320;
inline constexpr int kPitchLevels = 2;
inline constexpr int kYawSteps = 12;
inline constexpr int kTilesPerPanorama = kPitchLevels * kYawSteps;

enum class Face { Front = 0, Right = 1, Back = 2, Left = 3, Top = 4, Bottom = 5 };

struct PanoramaRecord {
    RasterImage image;
    GeoPoint location;
    int capture_year{0};
    std::string pano_id;
};

struct PerspectiveTile {
    RasterImage image;
    std::string pano_id;
    int yaw_index{0};
    int pitch_index{0};
    GeoPoint location;
};

/// Unit direction (x right, y up, z forward) seen by continuous face pixel
/// (row, col). Face corners (0, 0) and (S-1, S-1) lie exactly on the cube
/// corners, so the face centre is at ((S-1)/2, (S-1)/2).
std::array<double, 3> face_direction(Face face, double row, double col, int face_size = kFaceSize);

/// Continuous equirectangular coordinate (row, col) of a direction. Yaw 0 maps to
/// column (W-1)/2, pitch 0 to row (H-1)/2; one pixel spans 360/W degrees.
std::array<double, 2> direction_to_equirect(const std::array<double, 3>& dir, int pano_height,
                                            int pano_width);

/// Gnomonic 90-degree faces in Face order, bilinear with horizontal wraparound.
/// Requires a 2000x4000 panorama.
std::array<RasterImage, 6> project_to_faces(const PanoramaRecord& pano);

/// Same projection for any panorama size and face size; used by tests.
RasterImage project_face(const RasterImage& pano, Face face, int face_size);

/// Concatenates front, right, back, left and drops the bottom 240 rows.
RasterImage stitch_and_crop(const std::array<RasterImage, 6>& faces);

/// 2 pitch rows x 12 yaw columns of 480x640, wrapping the last column.
std::vector<PerspectiveTile> cut_tiles(const RasterImage& strip, const std::string& pano_id = {},
                                       const GeoPoint& location = {});

/// Full pipeline: faces, strip, tiles.
std::vector<PerspectiveTile> process_panorama(const PanoramaRecord& pano);

/// `<pano_id>_p<pitch>_y<yaw>.png`
std::string tile_filename(const std::string& pano_id, int pitch_index, int yaw_index);

}  // namespace iovpr::panorama
