#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "iovpr/embed.hpp"
#include "support.hpp"

using namespace iovpr;
using namespace iovpr::embed;
namespace fs = std::filesystem;

namespace {

EmbedderParams identity_padded(int f, int d) {
    EmbedderParams p;
    p.feature_dim = f;
    p.embed_dim = d;
    p.weights.assign(static_cast<std::size_t>(f) * d, 0.0);
    for (int i = 0; i < std::min(f, d); ++i) {
        p.at(i, i) = 1.0;
    }
    return p;
}

double bin_mass(const FeatureVector& f, int bin) {
    double s = 0.0;
    for (int b = 0; b < 16; ++b) {
        s += f[kIntensityFeatures + b * kOrientationBins + bin];
    }
    return s;
}

}  // namespace

TEST_CASE("constant image features") {
    const auto f = extract_features(RasterImage(480, 640, Rgb{200, 100, 50}));
    REQUIRE(f.size() == 384);
    const double gray = (0.299 * 200 + 0.587 * 100 + 0.114 * 50) / 255.0;
    for (int i = 0; i < kIntensityFeatures; ++i) {
        CHECK(f[i] == doctest::Approx(gray).epsilon(1e-12));
    }
    for (int i = kIntensityFeatures; i < kFeatureDim; ++i) {
        CHECK(f[i] == 0.0);
    }
    CHECK_THROWS_AS(extract_features(RasterImage()), DimensionError);
}

TEST_CASE("features are a deterministic function of the bytes") {
    testgen::Gen g(1);
    const auto img = g.image(50, 70);
    const auto copy = img;
    CHECK(extract_features(img) == extract_features(copy));
}

TEST_CASE("features: scale and normalisation") {
    testgen::Gen g(2);
    for (int i = 0; i < 20; ++i) {
        const auto f = extract_features(g.image(g.integer(8, 100), g.integer(8, 100)));
        for (int k = 0; k < kIntensityFeatures; ++k) {
            REQUIRE(f[k] >= 0.0);
            REQUIRE(f[k] <= 1.0);
        }
        for (int b = 0; b < 16; ++b) {
            double s = 0.0;
            for (int k = 0; k < kOrientationBins; ++k) {
                s += f[kIntensityFeatures + b * kOrientationBins + k];
            }
            CHECK((s == doctest::Approx(1.0) || s == 0.0));
        }
    }
}

TEST_CASE("vertical step edge puts gradient mass in the horizontal bins") {
    // Dark left half, bright right half: the Sobel x-response points along +x (bin 0).
    RasterImage img(64, 64);
    for (int r = 0; r < 64; ++r) {
        for (int c = 32; c < 64; ++c) {
            img.set(r, c, {255, 255, 255});
        }
    }
    const auto f = extract_features(img);
    const double total = [&] {
        double s = 0;
        for (int k = 0; k < kOrientationBins; ++k) {
            s += bin_mass(f, k);
        }
        return s;
    }();
    CHECK(bin_mass(f, 0) == doctest::Approx(total));
    // Flipped edge: bright left, mass in the 180 degree bin.
    RasterImage flipped(64, 64, Rgb{255, 255, 255});
    for (int r = 0; r < 64; ++r) {
        for (int c = 32; c < 64; ++c) {
            flipped.set(r, c, {0, 0, 0});
        }
    }
    const auto h = extract_features(flipped);
    CHECK(bin_mass(h, 4) == doctest::Approx(bin_mass(f, 0)));
    // Horizontal edge, bright on top: gradient points up (bin 2).
    RasterImage top(64, 64);
    for (int r = 0; r < 32; ++r) {
        for (int c = 0; c < 64; ++c) {
            top.set(r, c, {255, 255, 255});
        }
    }
    const auto t = extract_features(top);
    CHECK(bin_mass(t, 2) == doctest::Approx(bin_mass(f, 0)));
}

TEST_CASE("init_params reference stream") {
    // Frozen from tests/oracles/reference_values.py.
    const auto p = init_params(0, 4, 2);
    const std::vector<double> expected{-0.3402066366295392, 0.4921452096298288, -0.46043097415513434,
                                       0.09749466269467166, 0.04228496999260445, -0.4428402085346764,
                                       0.13152837450995092, -0.07642947014618695};
    REQUIRE(p.weights.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(p.weights[i] == expected[i]);
    }
    CHECK(init_params(5) == init_params(5));
    CHECK(init_params(5).weights != init_params(6).weights);
    const auto big = init_params(9);
    const double bound = 1.0 / std::sqrt(384.0);
    for (double w : big.weights) {
        REQUIRE(std::abs(w) <= bound);
    }
    CHECK_THROWS(init_params(0, 0, 4));
}

TEST_CASE("embed normalises and is invariant to scaling W") {
    testgen::Gen g(3);
    const auto p = init_params(1);
    auto p5 = p;
    for (auto& w : p5.weights) {
        w *= 5.0;
    }
    std::vector<Embedding> base, scaled;
    for (int i = 0; i < 20; ++i) {
        const auto img = g.image(32, 48);
        const auto e = embed::embed(p, img);
        double n = 0;
        for (double v : e) {
            n += v * v;
        }
        CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
        base.push_back(e);
        scaled.push_back(embed::embed(p5, img));
        for (std::size_t k = 0; k < e.size(); ++k) {
            CHECK(scaled.back()[k] == doctest::Approx(e[k]).epsilon(1e-12));
        }
    }
    // Nearest neighbours agree under W and 5W.
    for (std::size_t i = 0; i < base.size(); ++i) {
        std::size_t a = 0, b = 0;
        double da = 1e9, db = 1e9;
        for (std::size_t j = 0; j < base.size(); ++j) {
            if (j == i) {
                continue;
            }
            if (squared_distance(base[i], base[j]) < da) {
                da = squared_distance(base[i], base[j]);
                a = j;
            }
            if (squared_distance(scaled[i], scaled[j]) < db) {
                db = squared_distance(scaled[i], scaled[j]);
                b = j;
            }
        }
        CHECK(a == b);
    }
}

TEST_CASE("identity-padded W on a constant image") {
    const auto p = identity_padded(kFeatureDim, 4);
    const auto e = embed::embed(p, RasterImage(10, 10, Rgb{90, 90, 90}));
    for (double v : e) {
        CHECK(v == doctest::Approx(0.5));
    }
}

TEST_CASE("zero projection falls back to e1") {
    const auto p = identity_padded(kFeatureDim, 4);
    const auto before = degenerate_embedding_count();
    bool flagged = false;
    const auto e = embed::embed(p, RasterImage(10, 10), &flagged);
    CHECK(flagged);
    CHECK(e == Embedding{1.0, 0.0, 0.0, 0.0});
    CHECK(degenerate_embedding_count() == before + 1);
}

TEST_CASE("distances between unit vectors") {
    const std::vector<double> a{1, 0}, b{0, 1}, c{-1, 0};
    CHECK(distance(a, a) == 0.0);
    CHECK(distance(a, b) == doctest::Approx(std::sqrt(2.0)));
    CHECK(distance(a, b) == distance(b, a));
    CHECK(distance(a, c) == 2.0);
    CHECK(squared_distance(a, c) == 4.0);
}

TEST_CASE("params file round trip and format errors") {
    const auto dir = fs::temp_directory_path() / "iovpr_test_params";
    fs::create_directories(dir);
    const auto p = init_params(77, 10, 3);
    save_params(dir / "p.bin", p);
    CHECK(load_params(dir / "p.bin") == p);
    CHECK(fs::file_size(dir / "p.bin") == 4 + 4 + 4 + 4 + 8 + 30 * 8);

    std::ifstream in(dir / "p.bin", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    CHECK(bytes.substr(0, 4) == "IOVP");
    auto write = [&](const std::string& name, const std::string& data) {
        std::ofstream(dir / name, std::ios::binary) << data;
        return dir / name;
    };
    CHECK_THROWS_AS(load_params(write("magic.bin", "XXXX" + bytes.substr(4))), ParamsFormatError);
    CHECK_THROWS_AS(load_params(write("short.bin", bytes.substr(0, bytes.size() - 3))), ParamsFormatError);
    CHECK_THROWS_AS(load_params(write("long.bin", bytes + "x")), ParamsFormatError);
    auto bad_version = bytes;
    bad_version[4] = 2;
    CHECK_THROWS_AS(load_params(write("version.bin", bad_version)), ParamsFormatError);
    CHECK_THROWS(load_params(dir / "absent.bin"));
}
