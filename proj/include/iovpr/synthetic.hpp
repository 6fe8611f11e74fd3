#pragma once

#include <string>
#include <vector>

#include "iovpr/augment.hpp"
#include "iovpr/geo.hpp"
#include "iovpr/mining.hpp"

// Deterministic fixtures: a synthetic city whose street-view tiles encode their
// location, indoor layouts with window masks, and synthetic panoramas.
namespace iovpr::synthetic {

struct CityConfig {
    GeoPoint origin{52.3550, 4.8900};
    int columns{50};
    int rows{40};
    double spacing{10.0};  // meters between gallery positions
    int train_queries{300};
    int test_queries{100};
    double query_offset{4.0};  // max |north|, |east| offset of a query from its seed position
    std::uint64_t seed{7};
    int image_height{480};
    int image_width{640};
};

inline constexpr ItemId kTrainQueryBase = 1'000'000;
inline constexpr ItemId kTestQueryBase = 2'000'000;

class City {
public:
    explicit City(const CityConfig& config);

    const CityConfig& config() const noexcept { return config_; }
    const std::vector<mining::GalleryItem>& gallery() const noexcept { return gallery_; }
    const std::vector<mining::QueryItem>& train_queries() const noexcept { return train_; }
    const std::vector<mining::QueryItem>& test_queries() const noexcept { return test_; }

    /// Renders the street view at a local position (meters east/north of the
    /// origin): the facade of the nearest street, 40 m wide, centred on `east`.
    /// `variant` 0 is the clean gallery capture; other values add a
    /// deterministic capture-time nuisance (exposure and sensor noise).
    RasterImage render(double east, double north, std::uint64_t variant) const;

    /// Resolves the `synth:` paths used by gallery() and the query lists.
    mining::ImageLoader loader() const;

private:
    static constexpr double kViewSpan = 40.0;  // meters of facade visible in one tile

    struct Band {
        double bottom;  // lower edge as a fraction of the image height
        double color[3];
    };
    struct Building {
        double start;  // facade coordinate (meters east) where the building begins
        Band bands[3];
        double angle, period, contrast, phase;
    };

    CityConfig config_;
    std::vector<std::vector<Building>> streets_;
    std::vector<mining::GalleryItem> gallery_;
    std::vector<mining::QueryItem> train_;
    std::vector<mining::QueryItem> test_;
    struct Local {
        double east, north;
    };
    std::vector<Local> gallery_local_;
    std::vector<Local> train_local_;
    std::vector<Local> test_local_;
};

/// Indoor layouts: wall, floor and furniture, with one paned window opening in
/// the upper centre of the frame. Window proportions spread roughly over 10-50%.
std::vector<augment::LayoutRecord> make_layouts(int count, std::uint64_t seed, const std::string& id_prefix = "layout");

/// Random 2000x4000 panorama made of smooth colour fields plus noise.
RasterImage make_panorama(std::uint64_t seed, int height = 2000, int width = 4000);

}  // namespace iovpr::synthetic
