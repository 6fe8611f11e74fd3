#include "iovpr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_set>

#include "binary_io.hpp"
#include "iovpr/embed.hpp"
#include "iovpr/parallel.hpp"
#include "iovpr/rng.hpp"

namespace iovpr::retrieval {

namespace {

constexpr char kStoreMagic[4] = {'I', 'O', 'V', 'G'};
constexpr std::uint32_t kStoreVersion = 1;
constexpr std::size_t kBlockSize = 4096;

using Candidate = std::pair<double, ItemId>;  // (squared distance, id), ordered lexicographically

// Bounded max-heap keeping the k smallest candidates.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}

    void offer(double d2, ItemId id) {
        if (heap_.size() < k_) {
            heap_.emplace(d2, id);
        } else if (Candidate{d2, id} < heap_.top()) {
            heap_.pop();
            heap_.emplace(d2, id);
        }
    }

    std::vector<Neighbor> sorted() {
        std::vector<Candidate> all;
        all.reserve(heap_.size());
        while (!heap_.empty()) {
            all.push_back(heap_.top());
            heap_.pop();
        }
        std::sort(all.begin(), all.end());
        std::vector<Neighbor> out;
        out.reserve(all.size());
        for (const auto& [d2, id] : all) {
            out.push_back({id, std::sqrt(d2)});
        }
        return out;
    }

private:
    std::size_t k_;
    std::priority_queue<Candidate> heap_;
};

}  // namespace

void EmbeddingStore::append(ItemId id, std::span<const double> embedding) {
    if (ids.empty() && dim == 0) {
        dim = static_cast<int>(embedding.size());
    }
    if (static_cast<int>(embedding.size()) != dim) {
        throw DimensionError("embedding dimension mismatch in store");
    }
    ids.push_back(id);
    data.insert(data.end(), embedding.begin(), embedding.end());
}

void save_store(const std::filesystem::path& path, const EmbeddingStore& store) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw StoreFormatError("cannot write " + path.string());
    }
    os.write(kStoreMagic, 4);
    detail::put_u32(os, kStoreVersion);
    detail::put_u64(os, store.ids.size());
    detail::put_u32(os, static_cast<std::uint32_t>(store.dim));
    for (std::size_t i = 0; i < store.ids.size(); ++i) {
        detail::put_u64(os, store.ids[i]);
        for (double v : store.row(i)) {
            detail::put_f64(os, v);
        }
    }
    if (!os) {
        throw StoreFormatError("write failed: " + path.string());
    }
}

EmbeddingStore load_store(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw StoreFormatError("cannot open " + path.string());
    }
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kStoreMagic, 4) != 0) {
        throw StoreFormatError("bad magic in " + path.string());
    }
    if (const auto v = detail::get_u32<StoreFormatError>(is); v != kStoreVersion) {
        throw StoreFormatError("unsupported store version " + std::to_string(v));
    }
    const auto count = detail::get_u64<StoreFormatError>(is);
    EmbeddingStore store;
    store.dim = static_cast<int>(detail::get_u32<StoreFormatError>(is));
    store.ids.reserve(count);
    store.data.reserve(count * static_cast<std::size_t>(store.dim));
    for (std::uint64_t i = 0; i < count; ++i) {
        store.ids.push_back(detail::get_u64<StoreFormatError>(is));
        for (int d = 0; d < store.dim; ++d) {
            store.data.push_back(detail::get_f64<StoreFormatError>(is));
        }
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw StoreFormatError("trailing bytes in " + path.string());
    }
    return store;
}

GalleryIndex GalleryIndex::build(EmbeddingStore store, const IndexOptions& options) {
    if (store.size() == 0) {
        throw std::invalid_argument("GalleryIndex::build: empty gallery");
    }
    std::unordered_set<ItemId> seen;
    for (auto id : store.ids) {
        if (!seen.insert(id).second) {
            throw std::invalid_argument("GalleryIndex::build: duplicate id " + std::to_string(id));
        }
    }
    GalleryIndex index;
    index.store_ = std::move(store);
    index.options_ = options;
    if (options.mode == SearchMode::Exact) {
        return index;
    }

    const auto n = index.store_.size();
    const auto dim = static_cast<std::size_t>(index.store_.dim);
    const auto parts = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.partitions)), n);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    Rng rng(options.seed);
    const auto seeds = rng.sample(all, parts);
    index.centroids_.resize(parts * dim);
    for (std::size_t p = 0; p < parts; ++p) {
        const auto src = index.store_.row(seeds[p]);
        std::copy(src.begin(), src.end(), index.centroids_.begin() + static_cast<std::ptrdiff_t>(p * dim));
    }

    index.assignment_.assign(n, 0);
    auto assign = [&] {
        parallel_for(n, [&](std::size_t i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (std::size_t p = 0; p < parts; ++p) {
                const double d = embed::squared_distance(index.store_.row(i), index.centroid(p));
                if (d < best) {
                    best = d;
                    arg = static_cast<int>(p);
                }
            }
            index.assignment_[i] = arg;
        });
    };
    for (int it = 0; it < options.kmeans_iterations; ++it) {
        assign();
        std::vector<double> sums(parts * dim, 0.0);
        std::vector<std::size_t> counts(parts, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = static_cast<std::size_t>(index.assignment_[i]);
            ++counts[p];
            const auto row = index.store_.row(i);
            for (std::size_t d = 0; d < dim; ++d) {
                sums[p * dim + d] += row[d];
            }
        }
        for (std::size_t p = 0; p < parts; ++p) {
            if (counts[p] == 0) {
                continue;  // empty partition keeps its centroid
            }
            for (std::size_t d = 0; d < dim; ++d) {
                index.centroids_[p * dim + d] = sums[p * dim + d] / static_cast<double>(counts[p]);
            }
        }
    }
    assign();
    index.members_.assign(parts, {});
    for (std::size_t i = 0; i < n; ++i) {
        index.members_[static_cast<std::size_t>(index.assignment_[i])].push_back(i);
    }
    return index;
}

Ranking GalleryIndex::query_topk(std::span<const double> query, std::size_t k, ItemId query_id) const {
    if (options_.mode == SearchMode::Pruned) {
        return query_pruned(query, k, options_.probes, query_id);
    }
    return query_exact(query, k, query_id);
}

Ranking GalleryIndex::query_exact(std::span<const double> query, std::size_t k, ItemId query_id) const {
    if (size() == 0) {
        throw std::logic_error("query on an empty index");
    }
    if (k < 1) {
        throw std::invalid_argument("K must be >= 1");
    }
    if (static_cast<int>(query.size()) != dim()) {
        throw DimensionError("query dimension mismatch");
    }
    TopK top(std::min(k, size()));
    for (std::size_t i = 0; i < size(); ++i) {
        top.offer(embed::squared_distance(query, store_.row(i)), store_.ids[i]);
    }
    return {query_id, top.sorted()};
}

Ranking GalleryIndex::query_pruned(std::span<const double> query, std::size_t k, int probes, ItemId query_id) const {
    if (members_.empty()) {
        throw std::logic_error("index was built without partitions");
    }
    if (k < 1) {
        throw std::invalid_argument("K must be >= 1");
    }
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t p = 0; p < members_.size(); ++p) {
        order.emplace_back(embed::squared_distance(query, centroid(p)), p);
    }
    std::sort(order.begin(), order.end());
    const auto nprobe = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, probes)), order.size());
    TopK top(std::min(k, size()));
    for (std::size_t j = 0; j < nprobe; ++j) {
        for (auto i : members_[order[j].second]) {
            top.offer(embed::squared_distance(query, store_.row(i)), store_.ids[i]);
        }
    }
    return {query_id, top.sorted()};
}

std::vector<Ranking> GalleryIndex::query_batch(const EmbeddingStore& queries, std::size_t k) const {
    if (size() == 0) {
        throw std::logic_error("query on an empty index");
    }
    if (k < 1) {
        throw std::invalid_argument("K must be >= 1");
    }
    if (queries.size() > 0 && queries.dim != dim()) {
        throw DimensionError("query dimension mismatch");
    }
    std::vector<TopK> tops(queries.size(), TopK(std::min(k, size())));
    for (std::size_t start = 0; start < size(); start += kBlockSize) {
        const std::size_t end = std::min(size(), start + kBlockSize);
        parallel_for(queries.size(), [&](std::size_t q) {
            for (std::size_t i = start; i < end; ++i) {
                tops[q].offer(embed::squared_distance(queries.row(q), store_.row(i)), store_.ids[i]);
            }
        });
    }
    std::vector<Ranking> out(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        out[q] = {queries.ids[q], tops[q].sorted()};
    }
    return out;
}

double pruned_recall(const GalleryIndex& index, const EmbeddingStore& queries, std::size_t k, int probes) {
    if (queries.size() == 0) {
        return 1.0;
    }
    double total = 0.0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto exact = index.query_exact(queries.row(q), k);
        const auto pruned = index.query_pruned(queries.row(q), k, probes);
        std::unordered_set<ItemId> found;
        for (const auto& nb : pruned.results) {
            found.insert(nb.id);
        }
        std::size_t hit = 0;
        for (const auto& nb : exact.results) {
            hit += found.contains(nb.id) ? 1 : 0;
        }
        total += static_cast<double>(hit) / static_cast<double>(exact.results.size());
    }
    return total / static_cast<double>(queries.size());
}

Ranking rerank(const RasterImage& query, const Ranking& ranking, const Reranker& reranker) {
    if (!reranker) {
        return ranking;
    }
    const auto window = std::min(kRerankWindow, ranking.results.size());
    std::span<const Neighbor> prefix(ranking.results.data(), window);
    auto order = reranker(query, prefix);

    std::vector<ItemId> expected;
    expected.reserve(window);
    for (const auto& nb : prefix) {
        expected.push_back(nb.id);
    }
    auto given = order;
    std::sort(expected.begin(), expected.end());
    std::sort(given.begin(), given.end());
    if (given != expected) {
        throw RerankError("reranker returned ids that are not a permutation of the top-" + std::to_string(window));
    }

    Ranking out;
    out.query_id = ranking.query_id;
    out.results.reserve(ranking.results.size());
    // Ids in the prefix are unique (index rejects duplicates), so lookup by id is exact.
    for (auto id : order) {
        const auto it = std::find_if(prefix.begin(), prefix.end(), [&](const Neighbor& nb) { return nb.id == id; });
        out.results.push_back(*it);
    }
    out.results.insert(out.results.end(), ranking.results.begin() + static_cast<std::ptrdiff_t>(window),
                       ranking.results.end());
    return out;
}

}  // namespace iovpr::retrieval
