#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace iovpr {

using ItemId = std::uint64_t;

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

/// WGS84 position in degrees.
struct GeoPoint {
    double lat{0.0};
    double lon{0.0};

    bool valid() const noexcept { return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0; }
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Great-circle distance in meters on a sphere of radius kEarthRadiusMeters.
double haversine(const GeoPoint& a, const GeoPoint& b) noexcept;

/// Moves `origin` by (north, east) meters using a local tangent approximation.
/// Used by fixtures and tests to plant points at known offsets.
GeoPoint offset_meters(const GeoPoint& origin, double north, double east) noexcept;

/// Uniform grid over lat/lon cells for radius queries. Immutable after build().
class SpatialIndex {
public:
    static constexpr double kDefaultCellSize = 50.0;

    explicit SpatialIndex(double cell_size_meters = kDefaultCellSize);

    /// Duplicate ids are rejected.
    void insert(ItemId id, const GeoPoint& location);

    /// Ids whose haversine distance to `center` is <= radius, ascending.
    std::vector<ItemId> radius_query(const GeoPoint& center, double radius) const;

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    const GeoPoint& location(ItemId id) const { return items_.at(id); }
    double cell_size() const noexcept { return cell_size_; }

private:
    struct CellKey {
        std::int64_t row;
        std::int64_t col;
        friend bool operator==(const CellKey&, const CellKey&) = default;
    };
    struct CellHash {
        std::size_t operator()(const CellKey& k) const noexcept {
            return std::hash<std::int64_t>{}(k.row * 0x9E3779B97F4A7C15LL ^ k.col);
        }
    };

    CellKey cell_of(const GeoPoint& p) const noexcept;

    double cell_size_;
    double step_deg_;
    std::int64_t num_cols_;
    std::unordered_map<CellKey, std::vector<ItemId>, CellHash> cells_;
    std::unordered_map<ItemId, GeoPoint> items_;
};

inline constexpr int kNoise = -1;

struct ClusterLabel {
    std::string item_id;
    int label{kNoise};
};

struct DbscanParams {
    double eps{5.0};
    int min_pts{1};
};

/// DBSCAN with the haversine metric and a strict `distance < eps` neighbourhood.
/// Clusters are numbered in order of their first core point in the input.
std::vector<ClusterLabel> dbscan(std::span<const GeoPoint> points, std::span<const std::string> ids,
                                 const DbscanParams& params = {});

/// One id per non-noise cluster: the lexicographically smallest member.
std::vector<std::string> select_representatives(std::span<const ClusterLabel> labels,
                                                std::span<const GeoPoint> points);

}  // namespace iovpr
