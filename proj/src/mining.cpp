#include "iovpr/mining.hpp"

#include <algorithm>
#include <optional>
#include <unordered_set>

#include "iovpr/parallel.hpp"
#include "iovpr/png_io.hpp"

namespace iovpr::mining {

ImageLoader png_loader() {
    return [](const std::string& path) { return read_png_rgb(path); };
}

MiningGallery::MiningGallery(std::vector<GalleryItem> items, int embed_dim)
    : items_(std::move(items)), embed_dim_(embed_dim) {
    std::sort(items_.begin(), items_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (!position_.emplace(items_[i].id, i).second) {
            throw std::invalid_argument("duplicate gallery id " + std::to_string(items_[i].id));
        }
        spatial_.insert(items_[i].id, items_[i].location);
    }
    embeddings_.assign(items_.size() * static_cast<std::size_t>(embed_dim_), 0.0);
}

void MiningGallery::set_embedding(std::size_t i, std::span<const double> e) {
    if (static_cast<int>(e.size()) != embed_dim_) {
        throw DimensionError("gallery embedding has wrong dimension");
    }
    std::copy(e.begin(), e.end(), embeddings_.begin() + static_cast<std::ptrdiff_t>(i * embed_dim_));
}

ItemId mine_positive(std::span<const double> query_embedding, const GeoPoint& query_location,
                     const MiningGallery& gallery, const MiningConfig& config) {
    const auto candidates = gallery.spatial().radius_query(query_location, config.positive_radius);
    if (candidates.empty()) {
        throw NoPositive("no gallery item within " + std::to_string(config.positive_radius) + " m");
    }
    // Candidates arrive in ascending id order, so strict < keeps the smallest id on ties.
    ItemId best = candidates.front();
    double best_d = embed::squared_distance(query_embedding, gallery.embedding(gallery.index_of(best)));
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        const double d = embed::squared_distance(query_embedding, gallery.embedding(gallery.index_of(candidates[k])));
        if (d < best_d) {
            best_d = d;
            best = candidates[k];
        }
    }
    return best;
}

NegativeMining mine_negatives(std::span<const double> query_embedding, const GeoPoint& query_location,
                              const MiningGallery& gallery, const MiningConfig& config, Rng& rng) {
    std::unordered_set<ItemId> excluded;
    for (auto id : gallery.spatial().radius_query(query_location, config.negative_radius)) {
        if (haversine(query_location, gallery.item(gallery.index_of(id)).location) < config.negative_radius) {
            excluded.insert(id);
        }
    }
    std::vector<std::size_t> eligible;
    eligible.reserve(gallery.size() - std::min(gallery.size(), excluded.size()));
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        if (!excluded.contains(gallery.item(i).id)) {
            eligible.push_back(i);
        }
    }
    if (eligible.size() < config.num_negatives) {
        throw InsufficientNegatives("only " + std::to_string(eligible.size()) + " eligible negatives, need " +
                                    std::to_string(config.num_negatives));
    }
    const auto pool = rng.sample(std::move(eligible), config.pool_size);

    std::vector<std::pair<double, ItemId>> scored;
    scored.reserve(pool.size());
    for (auto i : pool) {
        scored.emplace_back(embed::squared_distance(query_embedding, gallery.embedding(i)), gallery.item(i).id);
    }
    const auto n = std::min(config.num_negatives, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end());

    NegativeMining out;
    out.negatives.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.negatives.push_back(scored[k].second);
    }
    out.pool.reserve(pool.size());
    for (auto i : pool) {
        out.pool.push_back(gallery.item(i).id);
    }
    return out;
}

std::string augment_query(RasterImage& image, std::span<const augment::LayoutRecord> layouts, Rng& rng) {
    if (layouts.empty()) {
        return {};
    }
    const auto& layout = layouts[rng.below(layouts.size())];
    if (image.height() != layout.image.height() || image.width() != layout.image.width()) {
        image = resize_bilinear(image, layout.image.height(), layout.image.width());
    }
    image = augment::composite(image, layout);
    return layout.layout_id;
}

EpochTriplets build_epoch_triplets(std::span<const QueryItem> queries, std::span<const augment::LayoutRecord> layouts,
                                   const MiningGallery& gallery, const embed::EmbedderParams& params,
                                   const MiningConfig& config, const ImageLoader& loader, std::uint64_t seed,
                                   std::optional<std::uint64_t> layout_seed) {
    struct Slot {
        std::optional<Triplet> triplet;
        FeatureVector features;
        std::vector<ItemId> pool;
    };
    std::vector<Slot> slots(queries.size());

    parallel_for(queries.size(), [&](std::size_t qi) {
        const auto& q = queries[qi];
        Rng rng(derive_seed(seed, q.id));
        auto image = loader(q.image_path);
        Triplet t;
        t.query_id = q.id;
        if (layout_seed) {
            Rng layout_rng(derive_seed(*layout_seed, q.id));
            t.layout_id = augment_query(image, layouts, layout_rng);
        } else {
            t.layout_id = augment_query(image, layouts, rng);
        }
        auto features = embed::extract_features(image);
        const auto e = embed::embed_features(params, features);
        try {
            t.positive_id = mine_positive(e, q.location, gallery, config);
        } catch (const NoPositive&) {
            return;
        }
        auto neg = mine_negatives(e, q.location, gallery, config, rng);
        t.negative_ids = std::move(neg.negatives);
        slots[qi].triplet = std::move(t);
        slots[qi].features = std::move(features);
        slots[qi].pool = std::move(neg.pool);
    });

    EpochTriplets out;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        auto& s = slots[qi];
        if (!s.triplet) {
            out.skipped.push_back(queries[qi].id);
            continue;
        }
        out.triplets.push_back(std::move(*s.triplet));
        out.query_features.push_back(std::move(s.features));
        out.pools.push_back(std::move(s.pool));
    }
    return out;
}

}  // namespace iovpr::mining
