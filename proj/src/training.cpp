#include "iovpr/training.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "iovpr/parallel.hpp"

namespace iovpr::training {

namespace {

struct Normalized {
    std::vector<double> e;
    double norm{0.0};
    bool degenerate{false};
};

Normalized normalize_projection(const embed::EmbedderParams& params, std::span<const double> features) {
    Normalized out;
    out.e = embed::project(params, features);
    double n2 = 0.0;
    for (double v : out.e) {
        n2 += v * v;
    }
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
        out.degenerate = true;
        std::fill(out.e.begin(), out.e.end(), 0.0);
        out.e[0] = 1.0;
        return out;
    }
    out.norm = std::sqrt(n2);
    for (double& v : out.e) {
        v /= out.norm;
    }
    return out;
}

// dL/du = (I - e e^T) g / |u|, accumulated into W as features (x) du.
void backprop(const Normalized& n, std::span<const double> upstream, std::span<const double> features,
              std::vector<double>& grad, int embed_dim) {
    if (n.degenerate) {
        return;
    }
    double dot = 0.0;
    for (int d = 0; d < embed_dim; ++d) {
        dot += n.e[d] * upstream[d];
    }
    std::vector<double> du(static_cast<std::size_t>(embed_dim));
    for (int d = 0; d < embed_dim; ++d) {
        du[d] = (upstream[d] - n.e[d] * dot) / n.norm;
    }
    for (std::size_t f = 0; f < features.size(); ++f) {
        const double x = features[f];
        if (x == 0.0) {
            continue;
        }
        double* row = grad.data() + f * static_cast<std::size_t>(embed_dim);
        for (int d = 0; d < embed_dim; ++d) {
            row[d] += x * du[d];
        }
    }
}

}  // namespace

double triplet_loss(double d2_qp, std::span<const double> d2_qn, double margin) {
    double loss = 0.0;
    for (double d2 : d2_qn) {
        loss += std::max(d2_qp + margin - d2, 0.0);
    }
    return loss;
}

LossAndGradient loss_gradient(const embed::EmbedderParams& params, std::span<const double> query_features,
                              std::span<const double> positive_features,
                              std::span<const std::span<const double>> negative_features, double margin) {
    const int dim = params.embed_dim;
    LossAndGradient out;
    out.gradient.assign(params.weights.size(), 0.0);

    const auto q = normalize_projection(params, query_features);
    const auto p = normalize_projection(params, positive_features);
    std::vector<Normalized> negs;
    negs.reserve(negative_features.size());
    for (auto nf : negative_features) {
        negs.push_back(normalize_projection(params, nf));
    }

    const double d2_qp = embed::squared_distance(q.e, p.e);
    std::vector<double> g_q(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> g_p(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> g_n(static_cast<std::size_t>(dim));
    for (std::size_t j = 0; j < negs.size(); ++j) {
        const double hinge = d2_qp + margin - embed::squared_distance(q.e, negs[j].e);
        if (!(hinge > 0.0)) {
            continue;
        }
        out.loss += hinge;
        for (int d = 0; d < dim; ++d) {
            g_q[d] += 2.0 * (negs[j].e[d] - p.e[d]);
            g_p[d] += 2.0 * (p.e[d] - q.e[d]);
            g_n[d] = 2.0 * (q.e[d] - negs[j].e[d]);
        }
        backprop(negs[j], g_n, negative_features[j], out.gradient, dim);
    }
    backprop(q, g_q, query_features, out.gradient, dim);
    backprop(p, g_p, positive_features, out.gradient, dim);
    return out;
}

std::vector<embed::FeatureVector> extract_all(std::span<const mining::GalleryItem> gallery,
                                              const mining::ImageLoader& loader) {
    std::vector<embed::FeatureVector> features(gallery.size());
    parallel_for(gallery.size(), [&](std::size_t i) {
        features[i] = embed::extract_features(loader(gallery[i].image_path));
    });
    return features;
}

TrainResult train(std::span<const mining::QueryItem> queries, std::span<const mining::GalleryItem> gallery,
                  std::span<const augment::LayoutRecord> layouts, const TrainConfig& config,
                  const mining::ImageLoader& loader, const embed::EmbedderParams* initial) {
    const auto features = extract_all(gallery, loader);
    return train_with_features(queries, gallery, features, layouts, config, loader, initial);
}

TrainResult train_with_features(std::span<const mining::QueryItem> queries, std::span<const mining::GalleryItem> gallery,
                                std::span<const embed::FeatureVector> gallery_features,
                                std::span<const augment::LayoutRecord> layouts, const TrainConfig& config,
                                const mining::ImageLoader& loader, const embed::EmbedderParams* initial) {
    const auto& lc = config.loss;
    if (!(lc.margin > 0.0) || !(lc.learning_rate > 0.0) || lc.batch_size < 1 || lc.epochs < 0) {
        throw std::invalid_argument("train: margin and learning rate must be > 0, batch size >= 1, epochs >= 0");
    }
    if (gallery.empty()) {
        throw std::invalid_argument("train: empty gallery");
    }
    if (gallery_features.size() != gallery.size()) {
        throw std::invalid_argument("train: gallery features are not aligned with the gallery");
    }
    if (config.augment && layouts.empty()) {
        throw std::invalid_argument("train: augmentation requested but the layout set is empty");
    }

    TrainResult result;
    result.params = initial ? *initial : embed::init_params(lc.seed, embed::kFeatureDim, config.embed_dim);
    auto& params = result.params;
    result.report.initial_checksum = params.checksum();

    mining::MiningGallery mining_gallery({gallery.begin(), gallery.end()}, params.embed_dim);
    // MiningGallery sorts by id; keep features aligned with its order.
    std::vector<std::size_t> feature_of(gallery.size());
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        feature_of[mining_gallery.index_of(gallery[i].id)] = i;
    }

    const auto mining_seed = derive_seed(lc.seed, "mining");
    const auto layout_seed = config.fixed_layout_pairing
                                 ? std::optional<std::uint64_t>(derive_seed(lc.seed, "layout-pairing"))
                                 : std::nullopt;
    const std::span<const augment::LayoutRecord> epoch_layouts =
        config.augment ? layouts : std::span<const augment::LayoutRecord>{};

    for (int epoch = 0; epoch < lc.epochs; ++epoch) {
        parallel_for(mining_gallery.size(), [&](std::size_t i) {
            mining_gallery.set_embedding(i, embed::embed_features(params, gallery_features[feature_of[i]]));
        });
        auto mined = mining::build_epoch_triplets(queries, epoch_layouts, mining_gallery, params, config.mining,
                                                  loader, derive_seed(mining_seed, static_cast<std::uint64_t>(epoch)),
                                                  layout_seed);

        double loss_sum = 0.0;
        std::vector<double> grad_sum(params.weights.size());
        const std::size_t n = mined.triplets.size();
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(lc.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(lc.batch_size));
            std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
            for (std::size_t t = start; t < end; ++t) {
                const auto& trip = mined.triplets[t];
                std::vector<std::span<const double>> negs;
                negs.reserve(trip.negative_ids.size());
                for (auto id : trip.negative_ids) {
                    negs.emplace_back(gallery_features[feature_of[mining_gallery.index_of(id)]]);
                }
                const auto& pos = gallery_features[feature_of[mining_gallery.index_of(trip.positive_id)]];
                auto lg = loss_gradient(params, mined.query_features[t], pos, negs, lc.margin);
                if (!std::isfinite(lg.loss)) {
                    throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", query " +
                                        std::to_string(trip.query_id));
                }
                loss_sum += lg.loss;
                for (std::size_t k = 0; k < grad_sum.size(); ++k) {
                    grad_sum[k] += lg.gradient[k];
                }
            }
            const double step = lc.learning_rate / static_cast<double>(end - start);
            for (std::size_t k = 0; k < grad_sum.size(); ++k) {
                params.weights[k] -= step * grad_sum[k];
            }
        }
        if (!params.finite()) {
            throw TrainingError("parameters became non-finite at epoch " + std::to_string(epoch));
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.triplets = n;
        stats.skipped = mined.skipped.size();
        stats.mean_loss = n == 0 ? 0.0 : loss_sum / static_cast<double>(n);
        stats.checksum = params.checksum();
        result.report.epochs.push_back(stats);
    }
    return result;
}

void write_report_csv(const std::filesystem::path& path, const TrainReport& report) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot write " + path.string());
    }
    os << "epoch,mean_loss,skipped,checksum\n";
    for (const auto& e : report.epochs) {
        std::ostringstream loss;
        loss.precision(17);
        loss << e.mean_loss;
        os << e.epoch << ',' << loss.str() << ',' << e.skipped << ',' << e.checksum << '\n';
    }
}

}  // namespace iovpr::training
