#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "iovpr/embed.hpp"
#include "iovpr/mining.hpp"

namespace iovpr::training {

struct LossConfig {
    double margin{0.1};
    double learning_rate{0.01};
    int epochs{1};
    int batch_size{1};
    std::uint64_t seed{0};
};

struct TrainConfig {
    LossConfig loss;
    mining::MiningConfig mining;
    /// Composite training queries with layouts; false trains on raw queries.
    bool augment{true};
    /// Keep each query's layout fixed across epochs instead of redrawing it.
    bool fixed_layout_pairing{false};
    int embed_dim{embed::kDefaultEmbedDim};
};

struct EpochStats {
    int epoch{0};
    double mean_loss{0.0};
    std::size_t triplets{0};
    std::size_t skipped{0};
    std::uint64_t checksum{0};  // params checksum after the epoch
};

struct TrainReport {
    std::uint64_t initial_checksum{0};
    std::vector<EpochStats> epochs;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sum over negatives of max(d2_qp + margin - d2_qn, 0).
double triplet_loss(double d2_qp, std::span<const double> d2_qn, double margin);

struct LossAndGradient {
    double loss{0.0};
    std::vector<double> gradient;  // F x D, row-major like EmbedderParams::weights
};

/// Loss of one triplet given raw features, and its gradient with respect to W,
/// differentiated through the linear map and the L2 normalisation. The hinge
/// subgradient at 0 is 0; items whose projection is zero contribute nothing.
LossAndGradient loss_gradient(const embed::EmbedderParams& params, std::span<const double> query_features,
                              std::span<const double> positive_features,
                              std::span<const std::span<const double>> negative_features, double margin);

struct TrainResult {
    embed::EmbedderParams params;
    TrainReport report;
};

/// Per epoch: refresh gallery embeddings, mine triplets (augmented queries when
/// enabled), then plain SGD over the triplets in order. Deterministic from the
/// loss seed. Throws TrainingError on a non-finite loss.
TrainResult train(std::span<const mining::QueryItem> queries, std::span<const mining::GalleryItem> gallery,
                  std::span<const augment::LayoutRecord> layouts, const TrainConfig& config,
                  const mining::ImageLoader& loader, const embed::EmbedderParams* initial = nullptr);

/// Same, with gallery features extracted beforehand (aligned with `gallery`).
TrainResult train_with_features(std::span<const mining::QueryItem> queries, std::span<const mining::GalleryItem> gallery,
                                std::span<const embed::FeatureVector> gallery_features,
                                std::span<const augment::LayoutRecord> layouts, const TrainConfig& config,
                                const mining::ImageLoader& loader, const embed::EmbedderParams* initial = nullptr);

std::vector<embed::FeatureVector> extract_all(std::span<const mining::GalleryItem> gallery,
                                              const mining::ImageLoader& loader);

/// CSV with header `epoch,mean_loss,skipped,checksum`.
void write_report_csv(const std::filesystem::path& path, const TrainReport& report);

}  // namespace iovpr::training
