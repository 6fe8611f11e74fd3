#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "iovpr/augment.hpp"
#include "iovpr/embed.hpp"
#include "iovpr/eval.hpp"
#include "iovpr/geo.hpp"
#include "iovpr/manifest.hpp"
#include "iovpr/mining.hpp"
#include "iovpr/panorama.hpp"
#include "iovpr/png_io.hpp"
#include "iovpr/retrieval.hpp"
#include "iovpr/rng.hpp"
#include "iovpr/synthetic.hpp"
#include "iovpr/training.hpp"

namespace fs = std::filesystem;
using namespace iovpr;
using io::DataError;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }
void info(const std::string& msg) { std::cerr << msg << '\n'; }

// Flags shared by every command.
struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "pipeline config (JSON)");
        cmd->add_option("--seed", seed, "root seed (overrides the config)");
    }

    io::PipelineConfig load() const {
        io::PipelineConfig c;
        if (!config_path.empty()) {
            c = io::load_config(config_path);
        }
        if (seed) {
            c.seed = *seed;
            c.loss.seed = *seed;
        }
        io::validate(c);
        return c;
    }
};

fs::path relative_to(const fs::path& target, const fs::path& base_file) {
    const auto dir = fs::absolute(base_file).parent_path();
    return fs::proximate(fs::absolute(target), dir);
}

void ensure_parent(const fs::path& file) {
    const auto parent = file.parent_path();
    if (!parent.empty()) {
        fs::create_directories(parent);
    }
}

struct SplitManifest {
    std::vector<io::ManifestRecord> records;
    std::vector<mining::QueryItem> queries;
    std::vector<mining::GalleryItem> gallery;
};

SplitManifest load_split(const fs::path& path) {
    SplitManifest out;
    out.records = io::read_manifest(path, true);
    std::vector<io::ManifestRecord> q, g;
    for (const auto& r : out.records) {
        (r.role == io::Role::Query ? q : g).push_back(r);
    }
    out.queries = io::to_queries(q, path);
    out.gallery = io::to_gallery(g, path);
    return out;
}

std::vector<augment::LayoutRecord> load_filtered_layouts(const std::string& path, const io::PipelineConfig& c) {
    auto layouts = augment::filter_layouts(io::load_layouts(path), c.window_threshold);
    if (c.layout_kind == augment::LayoutKind::Gray) {
        for (auto& l : layouts) {
            if (l.kind != augment::LayoutKind::Gray) {
                l = augment::make_gray_layout(l);
            }
        }
    }
    if (layouts.empty()) {
        throw DataError("no layouts above window threshold " + std::to_string(c.window_threshold));
    }
    return layouts;
}

embed::EmbedderParams load_or_init_params(const std::string& path, const io::PipelineConfig& c) {
    if (!path.empty()) {
        return embed::load_params(path);
    }
    return embed::init_params(c.loss.seed, embed::kFeatureDim, c.embed_dim);
}

// ---- pano-cut ----

int cmd_pano_cut(const std::string& in_dir, const std::string& manifest, const std::string& out_dir, ItemId id_base,
                 const std::string& role) {
    if (!fs::is_directory(in_dir)) {
        throw DataError("input directory not found: " + in_dir);
    }
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") {
            inputs.push_back(entry.path());
        }
    }
    std::sort(inputs.begin(), inputs.end());
    fs::create_directories(out_dir);
    ensure_parent(manifest);

    std::vector<io::ManifestRecord> rows;
    std::size_t failed = 0;
    for (std::size_t pi = 0; pi < inputs.size(); ++pi) {
        const auto& png = inputs[pi];
        try {
            auto sidecar_path = png;
            sidecar_path.replace_extension(".json");
            std::ifstream sidecar(sidecar_path);
            if (!sidecar) {
                throw DataError("missing sidecar " + sidecar_path.string());
            }
            json meta;
            try {
                meta = json::parse(sidecar);
            } catch (const json::exception& e) {
                throw DataError(sidecar_path.string() + ": " + e.what());
            }
            panorama::PanoramaRecord rec;
            rec.pano_id = meta.value("pano_id", png.stem().string());
            rec.location = {meta.at("lat").get<double>(), meta.at("lon").get<double>()};
            rec.capture_year = meta.value("year", 0);
            if (!rec.location.valid()) {
                throw DataError("invalid location in " + sidecar_path.string());
            }
            rec.image = read_png_rgb(png);
            const auto tiles = panorama::process_panorama(rec);
            for (const auto& t : tiles) {
                const auto file = fs::path(out_dir) / panorama::tile_filename(t.pano_id, t.pitch_index, t.yaw_index);
                write_png_rgb(file, t.image);
                io::ManifestRecord r;
                r.id = id_base + pi * panorama::kTilesPerPanorama +
                       static_cast<ItemId>(t.pitch_index * panorama::kYawSteps + t.yaw_index);
                r.image_path = relative_to(file, manifest).generic_string();
                r.lat = rec.location.lat;
                r.lon = rec.location.lon;
                r.year = rec.capture_year;
                r.role = role == "query" ? io::Role::Query : io::Role::Gallery;
                r.pano_id = t.pano_id;
                r.yaw_index = t.yaw_index;
                r.pitch_index = t.pitch_index;
                rows.push_back(std::move(r));
            }
        } catch (const std::exception& e) {
            ++failed;
            std::cerr << "error: " << png.string() << ": " << e.what() << '\n';
        }
    }
    io::write_manifest(manifest, rows);
    if (inputs.empty()) {
        warn("no panoramas in " + in_dir + "; wrote an empty manifest");
        return kOk;
    }
    info("pano-cut: " + std::to_string(inputs.size() - failed) + " panoramas, " + std::to_string(rows.size()) +
         " tiles");
    return failed == inputs.size() ? kData : kOk;
}

// ---- coverage-select ----

int cmd_coverage_select(const std::string& manifest, const io::PipelineConfig& c, double eps, const std::string& out) {
    const auto records = io::read_manifest(manifest);
    // One point per panorama (tiles share their panorama's location).
    std::vector<std::string> ids;
    std::vector<GeoPoint> points;
    std::set<std::string> seen;
    for (const auto& r : records) {
        const auto key = r.pano_id.value_or(std::to_string(r.id));
        if (seen.insert(key).second) {
            ids.push_back(key);
            points.push_back(r.location());
        }
    }
    const auto labels = dbscan(points, ids, {eps, c.coverage_min_pts});
    const auto reps = select_representatives(labels, points);
    ensure_parent(out);
    io::write_id_list(out, reps);
    info("coverage-select: " + std::to_string(reps.size()) + " of " + std::to_string(ids.size()) + " selected");
    return kOk;
}

// ---- augment ----

int cmd_augment(const std::string& layouts_path, const std::string& out_dir, const io::PipelineConfig& c,
                const std::string& manifest, const std::string& queries_out) {
    const auto layouts = load_filtered_layouts(layouts_path, c);
    fs::create_directories(out_dir);
    const auto out_manifest = fs::path(out_dir) / "layouts.jsonl";
    std::vector<io::LayoutEntry> entries;
    for (const auto& l : layouts) {
        const auto image = fs::path(out_dir) / (l.layout_id + ".png");
        const auto mask = fs::path(out_dir) / (l.layout_id + "_mask.png");
        write_png_rgb(image, l.image);
        write_png_mask(mask, l.mask);
        entries.push_back({l.layout_id, image.filename().string(), mask.filename().string(), l.window_proportion, l.kind});
    }
    io::write_layout_manifest(out_manifest, entries);
    info("augment: kept " + std::to_string(layouts.size()) + " layouts");

    if (manifest.empty()) {
        return kOk;
    }
    if (queries_out.empty()) {
        throw UsageError("--manifest needs --queries-out");
    }
    const auto records = io::read_manifest(manifest, true);
    fs::create_directories(queries_out);
    const auto new_manifest = fs::path(queries_out) / "manifest.jsonl";
    const auto seed = derive_seed(c.seed, "augment");
    std::vector<io::ManifestRecord> rows;
    for (auto r : records) {
        const auto src = io::resolve_path(manifest, r.image_path);
        if (r.role == io::Role::Query) {
            auto image = read_png_rgb(src);
            Rng rng(derive_seed(seed, r.id));
            const auto layout_id = mining::augment_query(image, layouts, rng);
            const auto dst = fs::path(queries_out) / (std::to_string(r.id) + "_" + layout_id + ".png");
            write_png_rgb(dst, image);
            r.image_path = dst.filename().string();
        } else {
            r.image_path = relative_to(src, new_manifest).generic_string();
        }
        rows.push_back(std::move(r));
    }
    io::write_manifest(new_manifest, rows);
    return kOk;
}

// ---- mine ----

int cmd_mine(const std::string& manifest, const std::string& layouts_path, const std::string& params_path,
             const std::string& out, const io::PipelineConfig& c) {
    const auto data = load_split(manifest);
    const auto params = load_or_init_params(params_path, c);
    std::vector<augment::LayoutRecord> layouts;
    if (c.augment && !layouts_path.empty()) {
        layouts = load_filtered_layouts(layouts_path, c);
    }
    const auto loader = mining::png_loader();
    const auto features = training::extract_all(data.gallery, loader);
    mining::MiningGallery gallery(data.gallery, params.embed_dim);
    for (std::size_t i = 0; i < data.gallery.size(); ++i) {
        gallery.set_embedding(gallery.index_of(data.gallery[i].id), embed::embed_features(params, features[i]));
    }
    const auto mined = mining::build_epoch_triplets(data.queries, layouts, gallery, params, c.mining, loader,
                                                    derive_seed(c.seed, "mining"));
    for (auto id : mined.skipped) {
        warn("query " + std::to_string(id) + " has no positive; skipped");
    }
    ensure_parent(out);
    io::write_triplets(out, mined.triplets);
    info("mine: " + std::to_string(mined.triplets.size()) + " triplets");
    return kOk;
}

// ---- train ----

int cmd_train(const std::string& manifest, const std::string& layouts_path, const std::string& out,
              const std::string& report, const io::PipelineConfig& c) {
    const auto data = load_split(manifest);
    std::vector<augment::LayoutRecord> layouts;
    if (c.augment) {
        if (layouts_path.empty()) {
            throw UsageError("augmented training needs --layouts (or set augment=false)");
        }
        layouts = load_filtered_layouts(layouts_path, c);
    }
    training::TrainConfig tc;
    tc.loss = c.loss;
    tc.mining = c.mining;
    tc.augment = c.augment;
    tc.fixed_layout_pairing = c.fixed_layout_pairing;
    tc.embed_dim = c.embed_dim;
    const auto result = c.loss.epochs == 0
                            ? training::TrainResult{embed::init_params(c.loss.seed, embed::kFeatureDim, c.embed_dim), {}}
                            : training::train(data.queries, data.gallery, layouts, tc, mining::png_loader());
    ensure_parent(out);
    embed::save_params(out, result.params);
    if (!report.empty()) {
        ensure_parent(report);
        training::write_report_csv(report, result.report);
    }
    for (const auto& e : result.report.epochs) {
        char line[128];
        std::snprintf(line, sizeof line, "epoch %d: loss %.6f, %zu triplets, %zu skipped", e.epoch, e.mean_loss,
                      e.triplets, e.skipped);
        info(line);
    }
    return kOk;
}

// ---- index ----

int cmd_index(const std::string& manifest, const std::string& params_path, const std::string& out,
              const io::PipelineConfig& c) {
    const auto data = load_split(manifest);
    if (data.gallery.empty()) {
        throw DataError("manifest has no GALLERY records");
    }
    const auto params = load_or_init_params(params_path, c);
    const auto features = training::extract_all(data.gallery, mining::png_loader());
    retrieval::EmbeddingStore store;
    store.dim = params.embed_dim;
    for (std::size_t i = 0; i < data.gallery.size(); ++i) {
        store.append(data.gallery[i].id, embed::embed_features(params, features[i]));
    }
    ensure_parent(out);
    retrieval::save_store(out, store);
    info("index: " + std::to_string(store.size()) + " embeddings");
    return kOk;
}

// ---- eval ----

struct EvalArgs {
    std::string manifest;
    std::string rankings;
    std::string store;
    std::string params;
    std::string report;
    std::string subset;
    std::string masks;
    std::string model{"model"};
    std::optional<std::string> layout_kind;
};

int cmd_eval(const EvalArgs& a, io::PipelineConfig c) {
    if (a.layout_kind) {
        c.layout_kind = augment::parse_layout_kind(*a.layout_kind);
    }
    const auto records = io::read_manifest(a.manifest);
    eval::LocationMap qloc, gloc;
    std::vector<io::ManifestRecord> query_records;
    for (const auto& r : records) {
        if (r.role == io::Role::Query) {
            qloc[r.id] = r.location();
            query_records.push_back(r);
        } else {
            gloc[r.id] = r.location();
        }
    }

    std::optional<std::set<ItemId>> subset;
    if (!a.subset.empty()) {
        subset.emplace();
        for (const auto& s : io::read_id_list(a.subset)) {
            try {
                subset->insert(std::stoull(s));
            } catch (const std::exception&) {
                throw DataError("bad id '" + s + "' in " + a.subset);
            }
        }
    }
    const std::size_t gallery_size = subset ? subset->size() : gloc.size();
    const std::size_t k_max = static_cast<std::size_t>(c.eval.k_set.back());

    std::vector<retrieval::Ranking> rankings;
    if (!a.store.empty() && !a.params.empty()) {
        auto store = retrieval::load_store(a.store);
        if (subset) {
            retrieval::EmbeddingStore kept;
            kept.dim = store.dim;
            for (std::size_t i = 0; i < store.size(); ++i) {
                if (subset->contains(store.ids[i])) {
                    kept.append(store.ids[i], store.row(i));
                }
            }
            store = std::move(kept);
        }
        const auto params = embed::load_params(a.params);
        if (params.embed_dim != store.dim) {
            throw DataError("params and store disagree on the embedding dimension");
        }
        std::unique_ptr<augment::MaskProvider> masks;
        if (c.layout_kind == augment::LayoutKind::Gray) {
            if (a.masks.empty()) {
                warn("gray evaluation without --masks: every pixel treated as window");
                masks = std::make_unique<augment::FullFrameMaskProvider>();
            } else {
                masks = std::make_unique<augment::FileMaskProvider>(a.masks);
            }
        }
        retrieval::EmbeddingStore queries;
        queries.dim = store.dim;
        for (const auto& r : query_records) {
            auto image = read_png_rgb(io::resolve_path(a.manifest, r.image_path));
            if (masks) {
                image = augment::gray_out_non_window(image, *masks, fs::path(r.image_path).stem().string());
            }
            queries.append(r.id, embed::embed(params, image));
        }
        const auto index = retrieval::GalleryIndex::build(std::move(store));
        rankings = index.query_batch(queries, std::min(k_max, index.size()));
        if (!a.rankings.empty()) {
            ensure_parent(a.rankings);
            io::write_rankings(a.rankings, rankings);
        }
    } else if (!a.rankings.empty() && fs::exists(a.rankings)) {
        rankings = io::read_rankings(a.rankings);
        if (subset) {
            for (auto& r : rankings) {
                std::erase_if(r.results, [&](const retrieval::Neighbor& n) { return !subset->contains(n.id); });
            }
        }
    } else {
        throw DataError(a.rankings.empty() ? "no rankings: pass --rankings, or --store and --params"
                                           : "rankings file not found: " + a.rankings);
    }

    auto report = eval::recall_at_k(rankings, qloc, gloc, c.eval, gallery_size, a.model);
    report.config = io::PipelineConfig::to_json(c);
    for (const auto& w : report.warnings) {
        warn(w);
    }
    if (!a.report.empty()) {
        ensure_parent(a.report);
        eval::write_report(a.report, report);
    }
    std::cout << eval::to_csv(std::span<const eval::RecallReport>(&report, 1));
    return kOk;
}

// ---- subset ----

int cmd_subset(const std::string& manifest, std::size_t size, const std::string& out, const io::PipelineConfig& c) {
    const auto records = io::read_manifest(manifest);
    std::vector<ItemId> ids;
    eval::LocationMap gloc;
    std::vector<GeoPoint> qlocs;
    for (const auto& r : records) {
        if (r.role == io::Role::Query) {
            qlocs.push_back(r.location());
        } else {
            ids.push_back(r.id);
            gloc[r.id] = r.location();
        }
    }
    const auto subset = eval::make_distractor_subset(ids, gloc, qlocs, size, c.eval.radius, derive_seed(c.seed, "subset"));
    ensure_parent(out);
    io::write_id_list(out, subset);
    info("subset: " + std::to_string(subset.size()) + " ids");
    return kOk;
}

// ---- synth-city ----

struct SynthArgs {
    std::string out;
    synthetic::CityConfig city;
    int layouts{200};
    int test_layouts{100};
};

int cmd_synth_city(const SynthArgs& a) {
    const synthetic::City city(a.city);
    const auto loader = city.loader();
    const fs::path root(a.out);
    fs::create_directories(root / "gallery");
    fs::create_directories(root / "queries");

    auto record = [](ItemId id, const GeoPoint& loc, io::Role role, const std::string& path) {
        io::ManifestRecord r;
        r.id = id;
        r.image_path = path;
        r.lat = loc.lat;
        r.lon = loc.lon;
        r.role = role;
        return r;
    };
    std::vector<io::ManifestRecord> gallery;
    for (const auto& g : city.gallery()) {
        const auto name = "gallery/" + std::to_string(g.id) + ".png";
        write_png_rgb(root / name, loader(g.image_path));
        gallery.push_back(record(g.id, g.location, io::Role::Gallery, name));
    }
    auto write_split = [&](const std::vector<mining::QueryItem>& queries, const std::string& manifest) {
        auto rows = gallery;
        for (const auto& q : queries) {
            const auto name = "queries/" + std::to_string(q.id) + ".png";
            write_png_rgb(root / name, loader(q.image_path));
            rows.push_back(record(q.id, q.location, io::Role::Query, name));
        }
        io::write_manifest(root / manifest, rows);
    };
    write_split(city.train_queries(), "train.jsonl");
    write_split(city.test_queries(), "test.jsonl");

    auto write_layouts = [&](int count, std::uint64_t seed, const std::string& name) {
        fs::create_directories(root / name);
        std::vector<io::LayoutEntry> entries;
        for (const auto& l : synthetic::make_layouts(count, seed, name)) {
            const auto image = name + "/" + l.layout_id + ".png";
            const auto mask = name + "/" + l.layout_id + "_mask.png";
            write_png_rgb(root / image, l.image);
            write_png_mask(root / mask, l.mask);
            entries.push_back({l.layout_id, image, mask, l.window_proportion, l.kind});
        }
        io::write_layout_manifest(root / (name + ".jsonl"), entries);
    };
    write_layouts(a.layouts, derive_seed(a.city.seed, "train-layouts"), "layouts-train");
    write_layouts(a.test_layouts, derive_seed(a.city.seed, "test-layouts"), "layouts-test");
    info("synth-city: " + std::to_string(gallery.size()) + " gallery tiles written to " + a.out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Indoor-outdoor visual place recognition toolkit"};
    app.require_subcommand(1);
    int code = kOk;
    std::function<int()> run;

    auto add = [&](const std::string& name, const std::string& help) {
        auto* cmd = app.add_subcommand(name, help);
        return cmd;
    };

    Common common;

    // pano-cut
    std::string pc_in, pc_manifest, pc_out, pc_role = "gallery";
    ItemId pc_base = 0;
    auto* pano = add("pano-cut", "cut 2000x4000 panoramas into 24 perspective tiles");
    pano->add_option("--in", pc_in, "directory of <name>.png panoramas with <name>.json sidecars")->required();
    pano->add_option("--manifest", pc_manifest, "output manifest (JSON-Lines)")->required();
    pano->add_option("--out", pc_out, "tile output directory")->required();
    pano->add_option("--id-base", pc_base, "first tile id");
    pano->add_option("--role", pc_role, "manifest role of the tiles")->check(CLI::IsMember({"gallery", "query"}));
    common.attach(pano);
    pano->callback([&] {
        run = [&] {
            common.load();
            return cmd_pano_cut(pc_in, pc_manifest, pc_out, pc_base, pc_role);
        };
    });

    // coverage-select
    std::string cs_manifest, cs_out;
    std::optional<double> cs_eps;
    auto* cov = add("coverage-select", "DBSCAN panorama locations and keep one per cluster");
    cov->add_option("--manifest", cs_manifest)->required();
    cov->add_option("--eps", cs_eps, "cluster radius in meters (default from config, 5)");
    cov->add_option("--out", cs_out, "selected pano ids, one per line")->required();
    common.attach(cov);
    cov->callback([&] {
        run = [&] {
            const auto c = common.load();
            const double eps = cs_eps.value_or(c.coverage_eps);
            if (!(eps > 0.0)) {
                throw UsageError("--eps must be > 0");
            }
            return cmd_coverage_select(cs_manifest, c, eps, cs_out);
        };
    });

    // augment
    std::string au_layouts, au_out, au_manifest, au_queries_out, au_kind;
    std::optional<double> au_threshold;
    auto* aug = add("augment", "filter a layout set by window proportion; optionally composite queries");
    aug->add_option("--layouts", au_layouts, "layout manifest")->required();
    aug->add_option("--out", au_out, "output directory for the filtered set")->required();
    aug->add_option("--threshold", au_threshold, "keep layouts with window proportion above this");
    aug->add_option("--layout-kind", au_kind, "real or gray")->check(CLI::IsMember({"real", "gray"}));
    aug->add_option("--manifest", au_manifest, "composite the QUERY records of this manifest");
    aug->add_option("--queries-out", au_queries_out, "directory for composited queries and their manifest");
    common.attach(aug);
    aug->callback([&] {
        run = [&] {
            auto c = common.load();
            if (au_threshold) {
                c.window_threshold = *au_threshold;
            }
            if (!au_kind.empty()) {
                c.layout_kind = augment::parse_layout_kind(au_kind);
            }
            io::validate(c);
            return cmd_augment(au_layouts, au_out, c, au_manifest, au_queries_out);
        };
    });

    // mine
    std::string mi_manifest, mi_layouts, mi_params, mi_out;
    auto* mine = add("mine", "mine one round of triplets");
    mine->add_option("--manifest", mi_manifest, "manifest with QUERY and GALLERY records")->required();
    mine->add_option("--layouts", mi_layouts, "layout manifest (omit for raw queries)");
    mine->add_option("--params", mi_params, "embedder params (default: init from seed)");
    mine->add_option("--out", mi_out, "triplet manifest")->required();
    common.attach(mine);
    mine->callback([&] {
        run = [&] { return cmd_mine(mi_manifest, mi_layouts, mi_params, mi_out, common.load()); };
    });

    // train
    std::string tr_manifest, tr_layouts, tr_out, tr_report;
    std::optional<int> tr_epochs;
    std::optional<double> tr_lr, tr_margin;
    bool tr_no_augment = false;
    auto* train = add("train", "train the reference embedder with the triplet ranking loss");
    train->add_option("--manifest", tr_manifest, "manifest with QUERY and GALLERY records")->required();
    train->add_option("--layouts", tr_layouts, "layout manifest");
    train->add_option("--out", tr_out, "params file")->required();
    train->add_option("--report", tr_report, "per-epoch CSV report");
    train->add_option("--epochs", tr_epochs);
    train->add_option("--lr", tr_lr);
    train->add_option("--margin", tr_margin);
    train->add_flag("--no-augment", tr_no_augment, "train on raw queries");
    common.attach(train);
    train->callback([&] {
        run = [&] {
            auto c = common.load();
            if (tr_epochs) {
                c.loss.epochs = *tr_epochs;
            }
            if (tr_lr) {
                c.loss.learning_rate = *tr_lr;
            }
            if (tr_margin) {
                c.loss.margin = *tr_margin;
            }
            if (tr_no_augment) {
                c.augment = false;
            }
            io::validate(c);
            return cmd_train(tr_manifest, tr_layouts, tr_out, tr_report, c);
        };
    });

    // index
    std::string ix_manifest, ix_params, ix_out;
    auto* index = add("index", "embed the gallery into an embedding store");
    index->add_option("--manifest", ix_manifest)->required();
    index->add_option("--params", ix_params, "embedder params (default: init from seed)");
    index->add_option("--out", ix_out, "embedding store")->required();
    common.attach(index);
    index->callback([&] { run = [&] { return cmd_index(ix_manifest, ix_params, ix_out, common.load()); }; });

    // eval
    EvalArgs ev;
    auto* evc = add("eval", "recall@K of rankings; computes them first when --store and --params are given");
    evc->add_option("--manifest", ev.manifest, "manifest with QUERY and GALLERY locations")->required();
    evc->add_option("--rankings", ev.rankings, "rankings (JSON-Lines); written when computed");
    evc->add_option("--store", ev.store, "gallery embedding store");
    evc->add_option("--params", ev.params, "embedder params");
    evc->add_option("--report", ev.report, "report file (.json or .csv)");
    evc->add_option("--subset", ev.subset, "gallery id list to evaluate against");
    evc->add_option("--layout-kind", ev.layout_kind, "real or gray")->check(CLI::IsMember({"real", "gray"}));
    evc->add_option("--masks", ev.masks, "directory of <query-stem>.png window masks (gray mode)");
    evc->add_option("--model", ev.model, "model label in the report");
    common.attach(evc);
    evc->callback([&] { run = [&] { return cmd_eval(ev, common.load()); }; });

    // subset
    std::string ss_manifest, ss_out;
    std::size_t ss_size = 0;
    auto* sub = add("subset", "gallery subset of a given size that keeps every true positive");
    sub->add_option("--manifest", ss_manifest)->required();
    sub->add_option("--size", ss_size)->required();
    sub->add_option("--out", ss_out, "id list")->required();
    common.attach(sub);
    sub->callback([&] { run = [&] { return cmd_subset(ss_manifest, ss_size, ss_out, common.load()); }; });

    // synth-city
    SynthArgs sy;
    auto* syn = add("synth-city", "write the synthetic city fixture (gallery, queries, layouts, manifests)");
    syn->add_option("--out", sy.out)->required();
    syn->add_option("--columns", sy.city.columns);
    syn->add_option("--rows", sy.city.rows);
    syn->add_option("--train-queries", sy.city.train_queries);
    syn->add_option("--test-queries", sy.city.test_queries);
    syn->add_option("--layouts", sy.layouts, "training layouts to generate");
    syn->add_option("--test-layouts", sy.test_layouts);
    common.attach(syn);
    syn->callback([&] {
        run = [&] {
            const auto c = common.load();
            if (common.seed) {
                sy.city.seed = c.seed;
            }
            return cmd_synth_city(sy);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        code = run();
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        code = kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        code = kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        code = kData;
    } catch (const ImageIoError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        code = kData;
    } catch (const embed::ParamsFormatError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        code = kData;
    } catch (const retrieval::StoreFormatError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        code = kData;
    } catch (const eval::EvalError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        code = kData;
    } catch (const mining::InsufficientNegatives& e) {
        std::cerr << "data error: " << e.what() << '\n';
        code = kData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        code = kInternal;
    }
    return code;
}
