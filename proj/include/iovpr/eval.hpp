#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "iovpr/geo.hpp"
#include "iovpr/retrieval.hpp"
#include "iovpr/rng.hpp"

namespace iovpr::eval {

inline const std::vector<int> kSmallKSet{1, 5, 10, 15, 20, 25};
inline const std::vector<int> kExtendedKSet{1, 5, 10, 15, 20, 25, 50, 75, 100};
inline constexpr double kOutdoorRadius = 25.0;
inline constexpr double kIndoorRadius = 50.0;

struct EvalConfig {
    double radius{kOutdoorRadius};
    std::vector<int> k_set{kSmallKSet};
    std::string subset;  // label of the gallery subset, echoed into reports
};

struct RecallReport {
    std::string model;
    std::size_t gallery_size{0};
    std::size_t query_count{0};
    std::vector<int> k_set;       // as evaluated, after capping at the gallery size
    std::vector<double> recall;   // percentages, aligned with k_set
    double radius{0.0};
    std::vector<std::string> warnings;
    nlohmann::ordered_json config;  // free-form echo of the producing configuration

    friend bool operator==(const RecallReport&, const RecallReport&) = default;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using LocationMap = std::unordered_map<ItemId, GeoPoint>;

/// Recall@K = 100 * (#queries with any of the top K within `radius` of the
/// query's position) / #queries. K values beyond the gallery size are capped
/// with a warning.
RecallReport recall_at_k(std::span<const retrieval::Ranking> rankings, const LocationMap& query_locations,
                         const LocationMap& gallery_locations, const EvalConfig& config,
                         std::size_t gallery_size, std::string model = {});

/// Every gallery item within `radius` of any query, plus a seeded uniform sample
/// of the rest up to `target_size`. Subsets of increasing size drawn with the
/// same seed are nested. Result sorted ascending.
std::vector<ItemId> make_distractor_subset(std::span<const ItemId> gallery_ids, const LocationMap& gallery_locations,
                                           std::span<const GeoPoint> query_locations, std::size_t target_size,
                                           double radius, std::uint64_t seed);

/// Percentage with one decimal, e.g. "52.0".
std::string format_recall(double value);

/// `model,size,R@1,...` header plus one row per report. Reports must share a K set.
std::string to_csv(std::span<const RecallReport> reports);
std::vector<RecallReport> parse_csv(const std::string& text);

nlohmann::ordered_json to_json(const RecallReport& report);
RecallReport from_json(const nlohmann::ordered_json& j);

void write_report(const std::filesystem::path& path, const RecallReport& report);

}  // namespace iovpr::eval
