#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "iovpr/augment.hpp"
#include "iovpr/eval.hpp"
#include "iovpr/geo.hpp"
#include "iovpr/mining.hpp"
#include "iovpr/retrieval.hpp"
#include "iovpr/training.hpp"

namespace iovpr::io {

/// Malformed or missing data files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Role { Query, Gallery };

struct ManifestRecord {
    ItemId id{0};
    std::string image_path;
    double lat{0.0};
    double lon{0.0};
    int year{0};
    Role role{Role::Gallery};
    std::optional<std::string> pano_id;
    std::optional<int> yaw_index;
    std::optional<int> pitch_index;

    GeoPoint location() const noexcept { return {lat, lon}; }
    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

nlohmann::ordered_json to_json(const ManifestRecord& record);
ManifestRecord manifest_record_from_json(const nlohmann::ordered_json& j);

/// JSON-Lines. Reading validates unique ids and coordinates; when
/// `check_files` is set, every image_path (resolved against the manifest's
/// directory if relative) must exist.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path, bool check_files = false);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestRecord> records);
std::string manifest_to_string(std::span<const ManifestRecord> records);
std::vector<ManifestRecord> parse_manifest(const std::string& text);

/// Resolves a manifest image path relative to the manifest's directory.
std::string resolve_path(const std::filesystem::path& manifest, const std::string& image_path);

std::vector<mining::QueryItem> to_queries(std::span<const ManifestRecord> records, const std::filesystem::path& manifest);
std::vector<mining::GalleryItem> to_gallery(std::span<const ManifestRecord> records, const std::filesystem::path& manifest);

/// Layout set manifest: {layout_id, image_path, mask_path, window_proportion, kind}.
struct LayoutEntry {
    std::string layout_id;
    std::string image_path;
    std::string mask_path;
    double window_proportion{0.0};
    augment::LayoutKind kind{augment::LayoutKind::Real};
};

std::vector<LayoutEntry> read_layout_manifest(const std::filesystem::path& path);
void write_layout_manifest(const std::filesystem::path& path, std::span<const LayoutEntry> entries);
/// Loads images and masks; the proportion is recomputed from the mask.
std::vector<augment::LayoutRecord> load_layouts(const std::filesystem::path& manifest);

/// {query_id, layout_id, positive_id, negative_ids:[...]}
void write_triplets(const std::filesystem::path& path, std::span<const mining::Triplet> triplets);
std::vector<mining::Triplet> read_triplets(const std::filesystem::path& path);

/// {query_id, results:[{id, distance}, ...]}
void write_rankings(const std::filesystem::path& path, std::span<const retrieval::Ranking> rankings);
std::vector<retrieval::Ranking> read_rankings(const std::filesystem::path& path);

/// Newline-delimited ids.
void write_id_list(const std::filesystem::path& path, std::span<const std::string> ids);
void write_id_list(const std::filesystem::path& path, std::span<const ItemId> ids);
std::vector<std::string> read_id_list(const std::filesystem::path& path);

/// Every tunable of the pipeline in one place; serialised as JSON.
struct PipelineConfig {
    std::uint64_t seed{0};
    augment::LayoutKind layout_kind{augment::LayoutKind::Real};
    double window_threshold{0.20};
    mining::MiningConfig mining;
    training::LossConfig loss;
    int embed_dim{embed::kDefaultEmbedDim};
    bool augment{true};
    bool fixed_layout_pairing{false};
    eval::EvalConfig eval;
    double coverage_eps{5.0};
    int coverage_min_pts{1};

    friend bool operator==(const PipelineConfig& a, const PipelineConfig& b) { return to_json(a) == to_json(b); }
    static nlohmann::ordered_json to_json(const PipelineConfig& c);
    static PipelineConfig from_json(const nlohmann::ordered_json& j);
};

/// Checks documented ranges; throws std::invalid_argument.
void validate(const PipelineConfig& config);

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

}  // namespace iovpr::io
