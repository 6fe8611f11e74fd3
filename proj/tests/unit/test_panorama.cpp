#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "iovpr/panorama.hpp"
#include "iovpr/synthetic.hpp"
#include "support.hpp"

using namespace iovpr;
using namespace iovpr::panorama;

namespace {

constexpr double kPi = std::numbers::pi;

// Direction (x right, y up, z forward) at the centre of panorama pixel (row, col),
// from yaw = (col - (W-1)/2) * 2pi/W and pitch = ((H-1)/2 - row) * pi/H.
std::array<double, 3> pixel_direction(double row, double col, int h, int w) {
    const double yaw = (col - (w - 1) / 2.0) * 2.0 * kPi / w;
    const double pitch = ((h - 1) / 2.0 - row) * kPi / h;
    return {std::cos(pitch) * std::sin(yaw), std::sin(pitch), std::cos(pitch) * std::cos(yaw)};
}

// Smooth function of direction, one per channel.
std::array<double, 3> pattern(const std::array<double, 3>& d) {
    return {127.5 + 120.0 * d[0], 127.5 + 120.0 * d[1], 127.5 + 90.0 * d[2] + 30.0 * d[0] * d[1]};
}

RasterImage pattern_panorama(int h, int w) {
    RasterImage img(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const auto v = pattern(pixel_direction(r, c, h, w));
            img.set(r, c, {static_cast<std::uint8_t>(std::lround(v[0])), static_cast<std::uint8_t>(std::lround(v[1])),
                           static_cast<std::uint8_t>(std::lround(v[2]))});
        }
    }
    return img;
}

RasterImage random_strip(std::uint64_t seed) {
    testgen::Gen g(seed);
    return g.image(kStripHeight, kStripWidth);
}

}  // namespace

TEST_CASE("constant panorama gives constant faces and strip") {
    PanoramaRecord rec{RasterImage(kPanoHeight, kPanoWidth, Rgb{40, 90, 140}), {52.0, 4.0}, 2019, "pano"};
    const auto faces = project_to_faces(rec);
    for (const auto& f : faces) {
        CHECK(f.height() == 960);
        CHECK(f.width() == 960);
        CHECK(f == RasterImage(960, 960, Rgb{40, 90, 140}));
    }
    const auto strip = stitch_and_crop(faces);
    CHECK(strip.height() == 720);
    CHECK(strip.width() == 3840);
    CHECK(strip == RasterImage(720, 3840, Rgb{40, 90, 140}));
}

TEST_CASE("panorama dimensions are validated") {
    PanoramaRecord rec{RasterImage(1000, 2000), {}, 0, "small"};
    CHECK_THROWS_AS(project_to_faces(rec), DimensionError);
    CHECK_THROWS_AS(cut_tiles(RasterImage(720, 3000)), DimensionError);
    std::array<RasterImage, 6> faces;
    CHECK_THROWS_AS(stitch_and_crop(faces), DimensionError);
}

TEST_CASE("front face centre looks at the panorama centre") {
    const auto d = face_direction(Face::Front, 479.5, 479.5, 960);
    CHECK(d[0] == doctest::Approx(0.0));
    CHECK(d[1] == doctest::Approx(0.0));
    CHECK(d[2] == doctest::Approx(1.0));
    const auto rc = direction_to_equirect(d, 2000, 4000);
    CHECK(rc[0] == doctest::Approx(999.5));
    CHECK(rc[1] == doctest::Approx(1999.5));

    // With odd sizes the centre is a pixel on both sides: exact copy.
    testgen::Gen g(3);
    const auto pano = g.image(101, 201);
    const auto face = project_face(pano, Face::Front, 9);
    CHECK(face.at(4, 4) == pano.at(50, 100));
}

TEST_CASE("face corners hit the cube-corner angles") {
    // Top-left of the front face: azimuth -45 deg, elevation atan(1/sqrt 2) = 35.2644 deg.
    const double el = std::atan(1.0 / std::sqrt(2.0));
    CHECK(el * 180.0 / kPi == doctest::Approx(35.26439).epsilon(1e-6));
    const auto d = face_direction(Face::Front, 0, 0, 960);
    CHECK(std::atan2(d[0], d[2]) == doctest::Approx(-kPi / 4));
    CHECK(std::asin(d[1]) == doctest::Approx(el));
    const auto rc = direction_to_equirect(d, 2000, 4000);
    CHECK(rc[1] == doctest::Approx(1999.5 - 4000.0 / 8.0));
    CHECK(rc[0] == doctest::Approx(999.5 - el * 2000.0 / kPi));

    // Bottom-right of the right face: azimuth 135 deg, elevation -35.26 deg.
    const auto e = face_direction(Face::Right, 959, 959, 960);
    CHECK(std::atan2(e[0], e[2]) == doctest::Approx(3 * kPi / 4));
    CHECK(std::asin(e[1]) == doctest::Approx(-el));
}

TEST_CASE("projected faces match the analytic pattern") {
    PanoramaRecord rec{pattern_panorama(kPanoHeight, kPanoWidth), {}, 0, "pattern"};
    const auto faces = project_to_faces(rec);
    int worst = 0;
    for (int f = 0; f < 6; ++f) {
        for (int r = 0; r < 960; r += 7) {
            for (int c = 0; c < 960; c += 7) {
                const auto v = pattern(face_direction(static_cast<Face>(f), r, c, 960));
                const auto px = faces[f].at(r, c);
                const int got[3] = {px.r, px.g, px.b};
                for (int ch = 0; ch < 3; ++ch) {
                    worst = std::max(worst, static_cast<int>(std::abs(got[ch] - std::lround(v[ch]))));
                }
            }
        }
    }
    CHECK(worst <= 1);
}

TEST_CASE("strip concatenates front, right, back, left") {
    testgen::Gen g(8);
    std::array<RasterImage, 6> faces;
    for (auto& f : faces) {
        f = g.image(960, 960);
    }
    const auto strip = stitch_and_crop(faces);
    for (int k = 0; k < 4; ++k) {
        for (int i = 0; i < 500; ++i) {
            const int r = g.integer(0, 719), c = g.integer(0, 959);
            REQUIRE(strip.at(r, 960 * k + c) == faces[k].at(r, c));
        }
    }
}

TEST_CASE("tiles: count, size, origin and wraparound") {
    const auto strip = random_strip(5);
    const auto tiles = cut_tiles(strip, "x", {1.0, 2.0});
    REQUIRE(tiles.size() == 24);
    std::set<std::pair<int, int>> seen;
    for (const auto& t : tiles) {
        CHECK(t.image.height() == 480);
        CHECK(t.image.width() == 640);
        CHECK(t.pano_id == "x");
        CHECK(t.location == GeoPoint{1.0, 2.0});
        seen.insert({t.pitch_index, t.yaw_index});
        for (int i = 0; i < 50; ++i) {
            const int r = (i * 37) % 480, c = (i * 101) % 640;
            REQUIRE(t.image.at(r, c) == strip.at(240 * t.pitch_index + r, (320 * t.yaw_index + c) % 3840));
        }
    }
    CHECK(seen.size() == 24);
    CHECK(tiles[0].image.at(0, 0) == strip.at(0, 0));
    CHECK(tiles[11].image.at(0, 320) == strip.at(0, 0));
}

TEST_CASE("tiles reassemble into the strip and cover it evenly") {
    const auto strip = random_strip(6);
    const auto tiles = cut_tiles(strip);
    RasterImage rebuilt(kStripHeight, kStripWidth);
    std::vector<int> cover(static_cast<std::size_t>(kStripHeight) * kStripWidth, 0);
    std::vector<int> col_cover(kStripWidth, 0);
    for (const auto& t : tiles) {
        for (int r = 0; r < 480; ++r) {
            for (int c = 0; c < 640; ++c) {
                const int sr = 240 * t.pitch_index + r, sc = (320 * t.yaw_index + c) % 3840;
                rebuilt.set(sr, sc, t.image.at(r, c));
                ++cover[static_cast<std::size_t>(sr) * kStripWidth + sc];
            }
        }
        if (t.pitch_index == 0) {
            for (int c = 0; c < 640; ++c) {
                ++col_cover[(320 * t.yaw_index + c) % 3840];
            }
        }
    }
    CHECK(rebuilt == strip);
    for (int c = 0; c < kStripWidth; ++c) {
        REQUIRE(col_cover[c] == 2);
    }
    for (int r = 0; r < kStripHeight; ++r) {
        const int expected = (r >= 240 && r < 480) ? 4 : 2;
        REQUIRE(cover[static_cast<std::size_t>(r) * kStripWidth] == expected);
    }
}

TEST_CASE("processing is deterministic and names tiles") {
    PanoramaRecord rec{synthetic::make_panorama(3), {52.0, 4.9}, 2020, "abc"};
    const auto a = process_panorama(rec);
    const auto b = process_panorama(rec);
    REQUIRE(a.size() == 24);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].image == b[i].image);
    }
    CHECK(tile_filename("abc", 1, 11) == "abc_p1_y11.png");
}
