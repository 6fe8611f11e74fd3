#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "iovpr/augment.hpp"
#include "iovpr/embed.hpp"
#include "iovpr/geo.hpp"
#include "iovpr/rng.hpp"

namespace iovpr::mining {

using embed::Embedding;
using embed::FeatureVector;

/// Loads the image behind a manifest path (PNG by default).
using ImageLoader = std::function<RasterImage(const std::string& path)>;
ImageLoader png_loader();

struct GalleryItem {
    ItemId id{0};
    GeoPoint location;
    std::string image_path;
};

struct QueryItem {
    ItemId id{0};
    GeoPoint location;
    std::string image_path;
};

struct Triplet {
    ItemId query_id{0};
    ItemId positive_id{0};
    std::vector<ItemId> negative_ids;  // ascending embedding distance to the (augmented) query
    std::string layout_id;             // empty when the query was not augmented

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct MiningConfig {
    double positive_radius{10.0};  // inclusive
    double negative_radius{25.0};  // negatives must be at least this far
    std::size_t pool_size{1000};
    std::size_t num_negatives{10};
};

class NoPositive : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientNegatives : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Geo-tagged gallery with the current embedding of each item, sorted by id.
class MiningGallery {
public:
    MiningGallery(std::vector<GalleryItem> items, int embed_dim);

    std::size_t size() const noexcept { return items_.size(); }
    const GalleryItem& item(std::size_t i) const { return items_[i]; }
    std::span<const GalleryItem> items() const noexcept { return items_; }
    std::size_t index_of(ItemId id) const { return position_.at(id); }
    const SpatialIndex& spatial() const noexcept { return spatial_; }
    int embed_dim() const noexcept { return embed_dim_; }

    std::span<const double> embedding(std::size_t i) const {
        return {embeddings_.data() + i * static_cast<std::size_t>(embed_dim_), static_cast<std::size_t>(embed_dim_)};
    }
    void set_embedding(std::size_t i, std::span<const double> e);

private:
    std::vector<GalleryItem> items_;
    std::unordered_map<ItemId, std::size_t> position_;
    SpatialIndex spatial_;
    int embed_dim_;
    std::vector<double> embeddings_;
};

/// Easiest positive: among items within the positive radius, the one closest in
/// embedding space (ties by id). Throws NoPositive when the ball is empty.
ItemId mine_positive(std::span<const double> query_embedding, const GeoPoint& query_location,
                     const MiningGallery& gallery, const MiningConfig& config = {});

struct NegativeMining {
    std::vector<ItemId> negatives;  // N hardest, ascending distance, ties by id
    std::vector<ItemId> pool;       // the sampled pool, in sampling order
};

/// Samples up to pool_size items at least negative_radius away (without
/// replacement) and keeps the num_negatives closest in embedding space.
NegativeMining mine_negatives(std::span<const double> query_embedding, const GeoPoint& query_location,
                              const MiningGallery& gallery, const MiningConfig& config, Rng& rng);

struct EpochTriplets {
    std::vector<Triplet> triplets;
    std::vector<FeatureVector> query_features;  // features of the (augmented) query, per triplet
    std::vector<std::vector<ItemId>> pools;     // negative pool per triplet
    std::vector<ItemId> skipped;                // queries without a positive
};

/// Query image after optional augmentation with a layout drawn from `rng`.
/// Returns the layout id used (empty if none).
std::string augment_query(RasterImage& image, std::span<const augment::LayoutRecord> layouts, Rng& rng);

/// For each query (in order): draw a layout, composite, embed with `params`,
/// then mine against the gallery's current embeddings. Each query uses its own
/// stream derived from `seed` and its id, so results do not depend on threading.
/// An empty `layouts` span means no augmentation. With `layout_seed` the layout
/// is drawn from a separate stream derived from it instead, so a fixed
/// layout_seed pins each query to one layout across epochs.
EpochTriplets build_epoch_triplets(std::span<const QueryItem> queries, std::span<const augment::LayoutRecord> layouts,
                                   const MiningGallery& gallery, const embed::EmbedderParams& params,
                                   const MiningConfig& config, const ImageLoader& loader, std::uint64_t seed,
                                   std::optional<std::uint64_t> layout_seed = std::nullopt);

}  // namespace iovpr::mining
