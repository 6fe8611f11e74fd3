#include "iovpr/geo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>

namespace iovpr {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMetersPerDegree = kEarthRadiusMeters * kDegToRad;

}  // namespace

double haversine(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = phi2 - phi1;
    const double dlambda = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    // Rounding can push h slightly above 1 for antipodal points.
    return 2.0 * kEarthRadiusMeters * std::asin(std::clamp(std::sqrt(h), -1.0, 1.0));
}

GeoPoint offset_meters(const GeoPoint& origin, double north, double east) noexcept {
    const double lat = origin.lat + north / kMetersPerDegree;
    const double lon = origin.lon + east / (kMetersPerDegree * std::cos(origin.lat * kDegToRad));
    return {lat, lon};
}

SpatialIndex::SpatialIndex(double cell_size_meters)
    : cell_size_(cell_size_meters), step_deg_(cell_size_meters / kMetersPerDegree) {
    if (!(cell_size_meters > 0.0)) {
        throw std::invalid_argument("SpatialIndex cell size must be positive");
    }
    num_cols_ = static_cast<std::int64_t>(std::ceil(360.0 / step_deg_));
}

SpatialIndex::CellKey SpatialIndex::cell_of(const GeoPoint& p) const noexcept {
    const auto row = static_cast<std::int64_t>(std::floor((p.lat + 90.0) / step_deg_));
    auto col = static_cast<std::int64_t>(std::floor((p.lon + 180.0) / step_deg_));
    col = ((col % num_cols_) + num_cols_) % num_cols_;
    return {row, col};
}

void SpatialIndex::insert(ItemId id, const GeoPoint& location) {
    if (!location.valid()) {
        throw std::invalid_argument("SpatialIndex: invalid GeoPoint for id " + std::to_string(id));
    }
    if (!items_.emplace(id, location).second) {
        throw std::invalid_argument("SpatialIndex: duplicate id " + std::to_string(id));
    }
    cells_[cell_of(location)].push_back(id);
}

std::vector<ItemId> SpatialIndex::radius_query(const GeoPoint& center, double radius) const {
    std::vector<ItemId> out;
    if (items_.empty() || radius < 0.0) {
        return out;
    }
    auto accept = [&](ItemId id) {
        if (haversine(center, items_.at(id)) <= radius) {
            out.push_back(id);
        }
    };

    // Bounding box of the spherical cap, padded by a small slack.
    const double angular = radius / kEarthRadiusMeters;
    const double dlat = angular / kDegToRad + 1e-9;
    const double lat_lo = center.lat - dlat;
    const double lat_hi = center.lat + dlat;
    bool full_lon = lat_lo <= -90.0 || lat_hi >= 90.0;
    double dlon = 0.0;
    if (!full_lon) {
        const double ratio = std::sin(angular) / std::cos(center.lat * kDegToRad);
        if (ratio >= 1.0) {
            full_lon = true;
        } else {
            dlon = std::asin(ratio) / kDegToRad + 1e-9;
        }
    }

    const auto row_lo = static_cast<std::int64_t>(std::floor((std::max(lat_lo, -90.0) + 90.0) / step_deg_));
    const auto row_hi = static_cast<std::int64_t>(std::floor((std::min(lat_hi, 90.0) + 90.0) / step_deg_));
    std::int64_t col_lo = 0;
    std::int64_t col_span = num_cols_;
    if (!full_lon) {
        col_lo = static_cast<std::int64_t>(std::floor((center.lon - dlon + 180.0) / step_deg_));
        const auto col_hi = static_cast<std::int64_t>(std::floor((center.lon + dlon + 180.0) / step_deg_));
        col_span = std::min(col_hi - col_lo + 1, num_cols_);
    }

    const auto cell_count = static_cast<double>(row_hi - row_lo + 1) * static_cast<double>(col_span);
    if (cell_count > static_cast<double>(cells_.size())) {
        for (const auto& [id, _] : items_) {
            accept(id);
        }
    } else {
        for (auto row = row_lo; row <= row_hi; ++row) {
            for (std::int64_t k = 0; k < col_span; ++k) {
                const auto col = (((col_lo + k) % num_cols_) + num_cols_) % num_cols_;
                const auto it = cells_.find({row, col});
                if (it == cells_.end()) {
                    continue;
                }
                for (auto id : it->second) {
                    accept(id);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ClusterLabel> dbscan(std::span<const GeoPoint> points, std::span<const std::string> ids,
                                 const DbscanParams& params) {
    if (points.size() != ids.size()) {
        throw std::invalid_argument("dbscan: points and ids differ in length");
    }
    if (!(params.eps > 0.0) || params.min_pts < 1) {
        throw std::invalid_argument("dbscan: eps must be > 0 and min_pts >= 1");
    }

    SpatialIndex index(std::max(params.eps, SpatialIndex::kDefaultCellSize));
    for (std::size_t i = 0; i < points.size(); ++i) {
        index.insert(i, points[i]);
    }
    auto region = [&](std::size_t i) {
        auto near = index.radius_query(points[i], params.eps);
        std::erase_if(near, [&](ItemId j) { return !(haversine(points[i], points[j]) < params.eps); });
        return near;
    };

    constexpr int kUnvisited = -2;
    std::vector<int> label(points.size(), kUnvisited);
    int next_cluster = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (label[i] != kUnvisited) {
            continue;
        }
        auto neighbours = region(i);
        if (static_cast<int>(neighbours.size()) < params.min_pts) {
            label[i] = kNoise;
            continue;
        }
        const int cluster = next_cluster++;
        label[i] = cluster;
        std::deque<ItemId> seeds(neighbours.begin(), neighbours.end());
        while (!seeds.empty()) {
            const auto j = seeds.front();
            seeds.pop_front();
            if (label[j] == kNoise) {
                label[j] = cluster;
            }
            if (label[j] != kUnvisited) {
                continue;
            }
            label[j] = cluster;
            auto more = region(j);
            if (static_cast<int>(more.size()) >= params.min_pts) {
                seeds.insert(seeds.end(), more.begin(), more.end());
            }
        }
    }

    std::vector<ClusterLabel> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        out.push_back({ids[i], label[i]});
    }
    return out;
}

std::vector<std::string> select_representatives(std::span<const ClusterLabel> labels,
                                                std::span<const GeoPoint> points) {
    if (!points.empty() && points.size() != labels.size()) {
        throw std::invalid_argument("select_representatives: labels and points differ in length");
    }
    std::map<int, std::string> best;
    for (const auto& l : labels) {
        if (l.label == kNoise) {
            continue;
        }
        auto [it, inserted] = best.emplace(l.label, l.item_id);
        if (!inserted && l.item_id < it->second) {
            it->second = l.item_id;
        }
    }
    std::vector<std::string> out;
    out.reserve(best.size());
    for (auto& [_, id] : best) {
        out.push_back(std::move(id));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace iovpr
