#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "iovpr/geo.hpp"
#include "iovpr/image.hpp"

namespace iovpr::retrieval {

enum class SearchMode { Exact, Pruned };

struct Neighbor {
    ItemId id{0};
    double distance{0.0};  // Euclidean

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct Ranking {
    ItemId query_id{0};
    std::vector<Neighbor> results;

    friend bool operator==(const Ranking&, const Ranking&) = default;
};

/// Flat id + embedding table. On disk, little-endian: "IOVG", u32 version (1),
/// u64 count, u32 D, then per item u64 id and D float64.
struct EmbeddingStore {
    int dim{0};
    std::vector<ItemId> ids;
    std::vector<double> data;  // count x dim

    std::size_t size() const noexcept { return ids.size(); }
    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    void append(ItemId id, std::span<const double> embedding);
};

class StoreFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void save_store(const std::filesystem::path& path, const EmbeddingStore& store);
EmbeddingStore load_store(const std::filesystem::path& path);

struct IndexOptions {
    SearchMode mode{SearchMode::Exact};
    int partitions{16};
    int kmeans_iterations{10};
    int probes{4};
    std::uint64_t seed{0};
};

/// Nearest-neighbour index over unit embeddings. EXACT answers are identical to
/// a linear scan; PRUNED additionally keeps k-means partitions and probes the
/// `probes` nearest ones.
class GalleryIndex {
public:
    /// Rejects empty input and duplicate ids.
    static GalleryIndex build(EmbeddingStore store, const IndexOptions& options = {});

    std::size_t size() const noexcept { return store_.size(); }
    int dim() const noexcept { return store_.dim; }
    SearchMode mode() const noexcept { return options_.mode; }
    const EmbeddingStore& store() const noexcept { return store_; }

    /// Uses the index's mode. K is capped at the gallery size.
    Ranking query_topk(std::span<const double> query, std::size_t k, ItemId query_id = 0) const;
    Ranking query_exact(std::span<const double> query, std::size_t k, ItemId query_id = 0) const;
    Ranking query_pruned(std::span<const double> query, std::size_t k, int probes, ItemId query_id = 0) const;

    /// Exact search for many queries, streaming the gallery in fixed blocks.
    std::vector<Ranking> query_batch(const EmbeddingStore& queries, std::size_t k) const;

    // Partition state (PRUNED mode only).
    std::size_t partition_count() const noexcept { return centroids_.size() / static_cast<std::size_t>(std::max(1, dim())); }
    std::span<const double> centroid(std::size_t p) const {
        return {centroids_.data() + p * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
    }
    const std::vector<int>& assignment() const noexcept { return assignment_; }

private:
    EmbeddingStore store_;
    IndexOptions options_;
    std::vector<double> centroids_;
    std::vector<int> assignment_;                    // per item
    std::vector<std::vector<std::size_t>> members_;  // per partition, ascending item index
};

/// Fraction of EXACT top-K ids that PRUNED also returns, averaged over queries.
double pruned_recall(const GalleryIndex& index, const EmbeddingStore& queries, std::size_t k, int probes);

/// Permutes a prefix of candidate ids; must return exactly the ids it was given.
using Reranker = std::function<std::vector<ItemId>(const RasterImage& query, std::span<const Neighbor> prefix)>;

inline constexpr std::size_t kRerankWindow = 100;

class RerankError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reorders the first min(100, size) entries with `reranker` (identity when
/// empty); the suffix is untouched. Throws RerankError if the returned ids are
/// not a permutation of the prefix.
Ranking rerank(const RasterImage& query, const Ranking& ranking, const Reranker& reranker);

}  // namespace iovpr::retrieval
