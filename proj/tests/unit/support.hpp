#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "iovpr/geo.hpp"
#include "iovpr/image.hpp"

// Hand-rolled generators for property tests. Independent of iovpr::Rng.
namespace testgen {

struct Gen {
    std::mt19937_64 engine;
    explicit Gen(std::uint64_t seed) : engine(seed) {}

    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }
    bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }

    // Point within `meters` of `origin` in both axes.
    iovpr::GeoPoint near(const iovpr::GeoPoint& origin, double meters) {
        return iovpr::offset_meters(origin, real(-meters, meters), real(-meters, meters));
    }

    iovpr::RasterImage image(int h, int w) {
        iovpr::RasterImage img(h, w);
        for (auto& b : img.bytes()) {
            b = static_cast<std::uint8_t>(integer(0, 255));
        }
        return img;
    }

    iovpr::LayoutMask mask(int h, int w, double p = 0.5) {
        iovpr::LayoutMask m(h, w);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                m.set(r, c, coin(p));
            }
        }
        return m;
    }

    std::vector<double> unit_vector(int dim) {
        std::vector<double> v(static_cast<std::size_t>(dim));
        double n = 0.0;
        std::normal_distribution<double> normal;
        while (n == 0.0) {
            n = 0.0;
            for (auto& x : v) {
                x = normal(engine);
                n += x * x;
            }
        }
        n = std::sqrt(n);
        for (auto& x : v) {
            x /= n;
        }
        return v;
    }
};

}  // namespace testgen
