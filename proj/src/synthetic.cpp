#include "iovpr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "iovpr/rng.hpp"

namespace iovpr::synthetic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint8_t clamp_byte(double v) noexcept {
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5);
}

constexpr const char* kGalleryPrefix = "synth:g:";
constexpr const char* kQueryPrefix = "synth:q:";

}  // namespace

City::City(const CityConfig& config) : config_(config) {
    if (config.columns < 1 || config.rows < 1 || !(config.spacing > 0.0)) {
        throw std::invalid_argument("City: grid must be non-empty with positive spacing");
    }
    // Each grid row is a street lined with buildings of random width and look.
    Rng rng(derive_seed(config.seed, "city-buildings"));
    const double street_length = (config.columns - 1) * config.spacing;
    streets_.resize(static_cast<std::size_t>(config.rows));
    for (auto& street : streets_) {
        double x = -kViewSpan;
        while (x < street_length + kViewSpan) {
            Building bld;
            bld.start = x;
            for (auto& band : bld.bands) {
                band.bottom = rng.uniform(0.0, 1.0);
                for (auto& ch : band.color) {
                    ch = rng.uniform(25.0, 230.0);
                }
            }
            std::sort(std::begin(bld.bands), std::end(bld.bands),
                      [](const Band& a, const Band& b) { return a.bottom < b.bottom; });
            bld.bands[std::size(bld.bands) - 1].bottom = 1.0;
            bld.angle = rng.uniform(0.0, std::numbers::pi);
            bld.period = rng.uniform(30.0, 110.0);
            bld.contrast = rng.uniform(15.0, 50.0);
            bld.phase = rng.uniform(0.0, kTwoPi);
            street.push_back(bld);
            x += rng.uniform(5.0, 12.0);
        }
    }

    for (int r = 0; r < config.rows; ++r) {
        for (int c = 0; c < config.columns; ++c) {
            const auto id = static_cast<ItemId>(r * config.columns + c);
            const Local local{c * config.spacing, r * config.spacing};
            gallery_local_.push_back(local);
            gallery_.push_back({id, offset_meters(config.origin, local.north, local.east),
                                kGalleryPrefix + std::to_string(id)});
        }
    }

    auto make_queries = [&](int count, ItemId base, std::string_view stage, std::vector<mining::QueryItem>& out,
                            std::vector<Local>& local_out) {
        Rng qrng(derive_seed(config.seed, stage));
        for (int i = 0; i < count; ++i) {
            const auto anchor = static_cast<std::size_t>(qrng.below(gallery_local_.size()));
            const Local local{gallery_local_[anchor].east + qrng.uniform(-config.query_offset, config.query_offset),
                              gallery_local_[anchor].north + qrng.uniform(-config.query_offset, config.query_offset)};
            const ItemId id = base + static_cast<ItemId>(i);
            local_out.push_back(local);
            out.push_back({id, offset_meters(config.origin, local.north, local.east), kQueryPrefix + std::to_string(id)});
        }
    };
    make_queries(config.train_queries, kTrainQueryBase, "city-train-queries", train_, train_local_);
    make_queries(config.test_queries, kTestQueryBase, "city-test-queries", test_, test_local_);
}

RasterImage City::render(double east, double north, std::uint64_t variant) const {
    const int h = config_.image_height;
    const int w = config_.image_width;
    const auto street_index = std::clamp(static_cast<long>(std::lround(north / config_.spacing)), 0L,
                                         static_cast<long>(streets_.size()) - 1);
    const auto& street = streets_[static_cast<std::size_t>(street_index)];

    double gain = 1.0;
    double bias = 0.0;
    double noise = 0.0;
    Rng rng(variant == 0 ? 0 : derive_seed(config_.seed, variant));
    if (variant != 0) {
        gain = rng.uniform(0.9, 1.1);
        bias = rng.uniform(-8.0, 8.0);
        noise = 6.0;
    }

    // Column c looks at facade coordinate east + (c - w/2) * span / w. The
    // grating sin(a_c + b_r) is split into per-column and per-row tables.
    const double px_per_meter = w / kViewSpan;
    std::vector<std::size_t> column_building(static_cast<std::size_t>(w));
    std::vector<double> column_sin(static_cast<std::size_t>(w)), column_cos(static_cast<std::size_t>(w));
    std::vector<std::size_t> visible;
    for (int c = 0; c < w; ++c) {
        const double x = east + (c - w / 2.0) / px_per_meter;
        auto it = std::upper_bound(street.begin(), street.end(), x,
                                   [](double v, const Building& b) { return v < b.start; });
        const auto bi = static_cast<std::size_t>(std::distance(street.begin(), it == street.begin() ? it : std::prev(it)));
        const Building& b = street[bi];
        const double a = kTwoPi * x * px_per_meter * std::cos(b.angle) / b.period + b.phase;
        column_building[c] = bi;
        column_sin[c] = std::sin(a);
        column_cos[c] = std::cos(a);
        if (visible.empty() || visible.back() != bi) {
            visible.push_back(bi);
        }
    }
    const std::size_t first = visible.front();
    std::vector<double> row_sin(visible.size() * h), row_cos(visible.size() * h);
    std::vector<std::uint8_t> row_band(visible.size() * h);
    for (std::size_t k = 0; k < visible.size(); ++k) {
        const Building& b = street[visible[k]];
        std::uint8_t band = 0;
        for (int r = 0; r < h; ++r) {
            const double a = kTwoPi * r * std::sin(b.angle) / b.period;
            row_sin[k * h + r] = b.contrast * std::sin(a);
            row_cos[k * h + r] = b.contrast * std::cos(a);
            while (b.bands[band].bottom < (r + 0.5) / h) {
                ++band;
            }
            row_band[k * h + r] = band;
        }
    }

    // Sensor noise from a xorshift64* stream seeded by the variant.
    std::uint64_t noise_state = rng.next_u64() | 1;
    RasterImage img(h, w);
    auto px = img.bytes();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t k = column_building[c] - first;
            const Building& b = street[column_building[c]];
            const double v = column_sin[c] * row_cos[k * h + r] + column_cos[c] * row_sin[k * h + r];
            const auto& color = b.bands[row_band[k * h + r]].color;
            const std::size_t o = (static_cast<std::size_t>(r) * w + c) * 3;
            std::uint64_t bits = 0;
            if (noise > 0.0) {
                noise_state ^= noise_state >> 12;
                noise_state ^= noise_state << 25;
                noise_state ^= noise_state >> 27;
                bits = noise_state * 0x2545F4914F6CDD1DULL;
            }
            for (int ch = 0; ch < 3; ++ch) {
                double value = gain * (color[ch] + v) + bias;
                if (noise > 0.0) {
                    // 21 random bits per channel, scaled to a unit-variance uniform.
                    const double u = static_cast<double>((bits >> (21 * ch)) & 0x1fffff) / 2097152.0;
                    value += noise * (u - 0.5) * 3.464;
                }
                px[o + ch] = clamp_byte(value);
            }
        }
    }
    return img;
}

mining::ImageLoader City::loader() const {
    return [this](const std::string& path) -> RasterImage {
        auto parse_id = [&](const char* prefix) -> std::optional<ItemId> {
            const std::string_view p(prefix);
            if (path.rfind(p, 0) != 0) {
                return std::nullopt;
            }
            return static_cast<ItemId>(std::stoull(path.substr(p.size())));
        };
        if (auto id = parse_id(kGalleryPrefix)) {
            const auto& l = gallery_local_.at(static_cast<std::size_t>(*id));
            return render(l.east, l.north, 0);
        }
        if (auto id = parse_id(kQueryPrefix)) {
            const Local* l = nullptr;
            if (*id >= kTestQueryBase) {
                l = &test_local_.at(static_cast<std::size_t>(*id - kTestQueryBase));
            } else if (*id >= kTrainQueryBase) {
                l = &train_local_.at(static_cast<std::size_t>(*id - kTrainQueryBase));
            } else {
                throw std::invalid_argument("unknown synthetic query " + path);
            }
            return render(l->east, l->north, *id);
        }
        throw std::invalid_argument("not a synthetic path: " + path);
    };
}

std::vector<augment::LayoutRecord> make_layouts(int count, std::uint64_t seed, const std::string& id_prefix) {
    constexpr int h = augment::kLayoutHeight;
    constexpr int w = augment::kLayoutWidth;
    std::vector<augment::LayoutRecord> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        auto rand_color = [&](double lo, double hi) {
            return Rgb{clamp_byte(rng.uniform(lo, hi)), clamp_byte(rng.uniform(lo, hi)), clamp_byte(rng.uniform(lo, hi))};
        };

        RasterImage img(h, w);
        LayoutMask mask(h, w);

        // Wall with wallpaper stripes.
        const Rgb wall = rand_color(60, 230);
        const double stripe_angle = rng.uniform(0.0, std::numbers::pi);
        const double stripe_period = rng.uniform(12.0, 60.0);
        const double stripe_contrast = rng.uniform(10.0, 45.0);
        const int floor_top = static_cast<int>(h * rng.uniform(0.62, 0.8));
        const Rgb floor = rand_color(30, 200);
        const int tile = static_cast<int>(rng.uniform(20.0, 70.0));
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                if (r >= floor_top) {
                    const bool dark = ((r / tile) + (c / tile)) % 2 == 0;
                    const double k = dark ? 0.75 : 1.0;
                    img.set(r, c, {clamp_byte(floor.r * k), clamp_byte(floor.g * k), clamp_byte(floor.b * k)});
                } else {
                    const double s = stripe_contrast *
                                     std::sin(kTwoPi * (c * std::cos(stripe_angle) + r * std::sin(stripe_angle)) / stripe_period);
                    img.set(r, c, {clamp_byte(wall.r + s), clamp_byte(wall.g + s), clamp_byte(wall.b + s)});
                }
            }
        }

        // One paned window over the upper centre of the frame.
        const int top = static_cast<int>(h * rng.uniform(0.02, 0.1));
        const int bottom = static_cast<int>(h * rng.uniform(0.5, 0.72));
        const double span = rng.uniform(0.5, 0.9);
        const double centre = rng.uniform(0.45, 0.55);
        const int left = std::max(0, static_cast<int>(w * (centre - span / 2)));
        const int right = std::min(w, static_cast<int>(w * (centre + span / 2)));
        const int panes_x = 1 + static_cast<int>(rng.below(3));
        const int panes_y = 1 + static_cast<int>(rng.below(2));
        const Rgb frame = rand_color(200, 255);
        const Rgb outside = rand_color(150, 255);
        auto on_bar = [](int v, int lo, int hi, int panes) {
            if (v < lo + 5 || v >= hi - 5) {
                return true;
            }
            for (int k = 1; k < panes; ++k) {
                if (std::abs(v - (lo + (hi - lo) * k / panes)) < 4) {
                    return true;
                }
            }
            return false;
        };
        for (int r = top; r < bottom; ++r) {
            for (int c = left; c < right; ++c) {
                const bool bar = on_bar(r, top, bottom, panes_y) || on_bar(c, left, right, panes_x);
                img.set(r, c, bar ? frame : outside);
                mask.set(r, c, !bar);
            }
        }

        // Furniture below the windows.
        const int pieces = 2 + static_cast<int>(rng.below(3));
        for (int k = 0; k < pieces; ++k) {
            const int ph = static_cast<int>(h * rng.uniform(0.12, 0.35));
            const int pw = static_cast<int>(w * rng.uniform(0.1, 0.3));
            const int r0 = static_cast<int>(h * rng.uniform(0.5, 0.95)) - ph / 2;
            const int c0 = static_cast<int>(rng.uniform(0.0, w - pw));
            const Rgb color = rand_color(10, 240);
            for (int r = std::max(0, r0); r < std::min(h, r0 + ph); ++r) {
                for (int c = c0; c < c0 + pw; ++c) {
                    img.set(r, c, color);
                    mask.set(r, c, false);
                }
            }
        }

        augment::LayoutRecord rec;
        rec.layout_id = id_prefix + "-" + std::to_string(i);
        rec.window_proportion = augment::window_proportion(mask);
        rec.image = std::move(img);
        rec.mask = std::move(mask);
        rec.kind = augment::LayoutKind::Real;
        out.push_back(std::move(rec));
    }
    return out;
}

RasterImage make_panorama(std::uint64_t seed, int height, int width) {
    Rng rng(seed);
    double freq[3], phase[3], vfreq[3];
    for (int ch = 0; ch < 3; ++ch) {
        freq[ch] = static_cast<double>(1 + rng.below(6));
        phase[ch] = rng.uniform(0.0, kTwoPi);
        vfreq[ch] = rng.uniform(0.5, 4.0);
    }
    std::vector<double> col_term(static_cast<std::size_t>(width) * 3), row_term(static_cast<std::size_t>(height) * 3);
    for (int ch = 0; ch < 3; ++ch) {
        for (int c = 0; c < width; ++c) {
            col_term[ch * width + c] = 60.0 * std::sin(kTwoPi * freq[ch] * c / width + phase[ch]);
        }
        for (int r = 0; r < height; ++r) {
            row_term[ch * height + r] = 40.0 * std::cos(kTwoPi * vfreq[ch] * r / height);
        }
    }
    RasterImage img(height, width);
    auto px = img.bytes();
    std::size_t o = 0;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const auto noise = rng.next_u64();
            for (int ch = 0; ch < 3; ++ch) {
                const double n = static_cast<double>((noise >> (ch * 8)) & 0xff) / 255.0 * 30.0 - 15.0;
                px[o++] = clamp_byte(128.0 + col_term[ch * width + c] + row_term[ch * height + r] + n);
            }
        }
    }
    return img;
}

}  // namespace iovpr::synthetic
