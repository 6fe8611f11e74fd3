#include "iovpr/manifest.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "iovpr/png_io.hpp"

namespace iovpr::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

template <typename Fn>
void for_each_json_line(const fs::path& path, Fn&& fn) {
    std::ifstream is(path);
    if (!is) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            fn(json::parse(line));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) {
        throw DataError("cannot write " + path.string());
    }
    return os;
}

std::string_view role_name(Role r) { return r == Role::Query ? "QUERY" : "GALLERY"; }

Role parse_role(const std::string& s) {
    if (s == "QUERY") {
        return Role::Query;
    }
    if (s == "GALLERY") {
        return Role::Gallery;
    }
    throw DataError("unknown role '" + s + "'");
}

void validate_records(std::span<const ManifestRecord> records) {
    std::unordered_set<ItemId> ids;
    for (const auto& r : records) {
        if (!ids.insert(r.id).second) {
            throw DataError("duplicate manifest id " + std::to_string(r.id));
        }
        if (!r.location().valid()) {
            throw DataError("invalid coordinates for id " + std::to_string(r.id));
        }
    }
}

}  // namespace

json to_json(const ManifestRecord& r) {
    json j;
    j["id"] = r.id;
    j["image_path"] = r.image_path;
    j["lat"] = r.lat;
    j["lon"] = r.lon;
    j["year"] = r.year;
    j["role"] = role_name(r.role);
    if (r.pano_id) {
        j["pano_id"] = *r.pano_id;
    }
    if (r.yaw_index) {
        j["yaw_index"] = *r.yaw_index;
    }
    if (r.pitch_index) {
        j["pitch_index"] = *r.pitch_index;
    }
    return j;
}

ManifestRecord manifest_record_from_json(const json& j) {
    ManifestRecord r;
    r.id = j.at("id").get<ItemId>();
    r.image_path = j.at("image_path").get<std::string>();
    r.lat = j.at("lat").get<double>();
    r.lon = j.at("lon").get<double>();
    r.year = j.value("year", 0);
    r.role = parse_role(j.value("role", std::string("GALLERY")));
    if (j.contains("pano_id")) {
        r.pano_id = j["pano_id"].get<std::string>();
    }
    if (j.contains("yaw_index")) {
        r.yaw_index = j["yaw_index"].get<int>();
    }
    if (j.contains("pitch_index")) {
        r.pitch_index = j["pitch_index"].get<int>();
    }
    return r;
}

std::string manifest_to_string(std::span<const ManifestRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<ManifestRecord> parse_manifest(const std::string& text) {
    std::vector<ManifestRecord> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(manifest_record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw DataError(e.what());
        }
    }
    validate_records(out);
    return out;
}

std::string resolve_path(const fs::path& manifest, const std::string& image_path) {
    const fs::path p(image_path);
    if (p.is_absolute() || image_path.rfind("synth:", 0) == 0) {
        return image_path;
    }
    return (manifest.parent_path() / p).string();
}

std::vector<ManifestRecord> read_manifest(const fs::path& path, bool check_files) {
    std::vector<ManifestRecord> out;
    for_each_json_line(path, [&](const json& j) { out.push_back(manifest_record_from_json(j)); });
    validate_records(out);
    if (check_files) {
        for (const auto& r : out) {
            if (!fs::exists(resolve_path(path, r.image_path))) {
                throw DataError("missing image for id " + std::to_string(r.id) + ": " + r.image_path);
            }
        }
    }
    return out;
}

void write_manifest(const fs::path& path, std::span<const ManifestRecord> records) {
    auto os = open_out(path);
    os << manifest_to_string(records);
}

std::vector<mining::QueryItem> to_queries(std::span<const ManifestRecord> records, const fs::path& manifest) {
    std::vector<mining::QueryItem> out;
    for (const auto& r : records) {
        out.push_back({r.id, r.location(), resolve_path(manifest, r.image_path)});
    }
    return out;
}

std::vector<mining::GalleryItem> to_gallery(std::span<const ManifestRecord> records, const fs::path& manifest) {
    std::vector<mining::GalleryItem> out;
    for (const auto& r : records) {
        out.push_back({r.id, r.location(), resolve_path(manifest, r.image_path)});
    }
    return out;
}

std::vector<LayoutEntry> read_layout_manifest(const fs::path& path) {
    std::vector<LayoutEntry> out;
    for_each_json_line(path, [&](const json& j) {
        LayoutEntry e;
        e.layout_id = j.at("layout_id").get<std::string>();
        e.image_path = j.at("image_path").get<std::string>();
        e.mask_path = j.at("mask_path").get<std::string>();
        e.window_proportion = j.value("window_proportion", 0.0);
        e.kind = augment::parse_layout_kind(j.value("kind", std::string("REAL")));
        out.push_back(std::move(e));
    });
    return out;
}

void write_layout_manifest(const fs::path& path, std::span<const LayoutEntry> entries) {
    auto os = open_out(path);
    for (const auto& e : entries) {
        json j;
        j["layout_id"] = e.layout_id;
        j["image_path"] = e.image_path;
        j["mask_path"] = e.mask_path;
        j["window_proportion"] = e.window_proportion;
        j["kind"] = e.kind == augment::LayoutKind::Gray ? "GRAY" : "REAL";
        os << j.dump() << '\n';
    }
}

std::vector<augment::LayoutRecord> load_layouts(const fs::path& manifest) {
    std::vector<augment::LayoutRecord> out;
    for (const auto& e : read_layout_manifest(manifest)) {
        try {
            const auto image = read_png_rgb(resolve_path(manifest, e.image_path));
            const auto mask = read_png_mask(resolve_path(manifest, e.mask_path));
            auto rec = augment::make_layout(e.layout_id, image, mask);
            if (e.kind == augment::LayoutKind::Gray) {
                rec = augment::make_gray_layout(rec);
            }
            out.push_back(std::move(rec));
        } catch (const ImageIoError& err) {
            throw DataError("layout " + e.layout_id + ": " + err.what());
        }
    }
    return out;
}

void write_triplets(const fs::path& path, std::span<const mining::Triplet> triplets) {
    auto os = open_out(path);
    for (const auto& t : triplets) {
        json j;
        j["query_id"] = t.query_id;
        j["layout_id"] = t.layout_id;
        j["positive_id"] = t.positive_id;
        j["negative_ids"] = t.negative_ids;
        os << j.dump() << '\n';
    }
}

std::vector<mining::Triplet> read_triplets(const fs::path& path) {
    std::vector<mining::Triplet> out;
    for_each_json_line(path, [&](const json& j) {
        mining::Triplet t;
        t.query_id = j.at("query_id").get<ItemId>();
        t.layout_id = j.value("layout_id", std::string{});
        t.positive_id = j.at("positive_id").get<ItemId>();
        t.negative_ids = j.at("negative_ids").get<std::vector<ItemId>>();
        out.push_back(std::move(t));
    });
    return out;
}

void write_rankings(const fs::path& path, std::span<const retrieval::Ranking> rankings) {
    auto os = open_out(path);
    for (const auto& r : rankings) {
        json j;
        j["query_id"] = r.query_id;
        json results = json::array();
        for (const auto& nb : r.results) {
            results.push_back({{"id", nb.id}, {"distance", nb.distance}});
        }
        j["results"] = std::move(results);
        os << j.dump() << '\n';
    }
}

std::vector<retrieval::Ranking> read_rankings(const fs::path& path) {
    std::vector<retrieval::Ranking> out;
    for_each_json_line(path, [&](const json& j) {
        retrieval::Ranking r;
        r.query_id = j.at("query_id").get<ItemId>();
        for (const auto& nb : j.at("results")) {
            r.results.push_back({nb.at("id").get<ItemId>(), nb.at("distance").get<double>()});
        }
        out.push_back(std::move(r));
    });
    return out;
}

void write_id_list(const fs::path& path, std::span<const std::string> ids) {
    auto os = open_out(path);
    for (const auto& id : ids) {
        os << id << '\n';
    }
}

void write_id_list(const fs::path& path, std::span<const ItemId> ids) {
    auto os = open_out(path);
    for (auto id : ids) {
        os << id << '\n';
    }
}

std::vector<std::string> read_id_list(const fs::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw DataError("cannot open " + path.string());
    }
    std::vector<std::string> out;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            out.push_back(line);
        }
    }
    return out;
}

json PipelineConfig::to_json(const PipelineConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["layout_kind"] = std::string(augment::to_string(c.layout_kind));
    j["window_threshold"] = c.window_threshold;
    j["augment"] = c.augment;
    j["fixed_layout_pairing"] = c.fixed_layout_pairing;
    j["embed_dim"] = c.embed_dim;
    j["mining"] = {{"positive_radius", c.mining.positive_radius},
                   {"negative_radius", c.mining.negative_radius},
                   {"pool_size", c.mining.pool_size},
                   {"num_negatives", c.mining.num_negatives}};
    j["loss"] = {{"margin", c.loss.margin},
                 {"learning_rate", c.loss.learning_rate},
                 {"epochs", c.loss.epochs},
                 {"batch_size", c.loss.batch_size}};
    j["eval"] = {{"radius", c.eval.radius}, {"k_set", c.eval.k_set}, {"subset", c.eval.subset}};
    j["coverage"] = {{"eps", c.coverage_eps}, {"min_pts", c.coverage_min_pts}};
    return j;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.layout_kind = augment::parse_layout_kind(j.value("layout_kind", std::string("real")));
        c.window_threshold = j.value("window_threshold", c.window_threshold);
        c.augment = j.value("augment", c.augment);
        c.fixed_layout_pairing = j.value("fixed_layout_pairing", c.fixed_layout_pairing);
        c.embed_dim = j.value("embed_dim", c.embed_dim);
        if (j.contains("mining")) {
            const auto& m = j["mining"];
            c.mining.positive_radius = m.value("positive_radius", c.mining.positive_radius);
            c.mining.negative_radius = m.value("negative_radius", c.mining.negative_radius);
            c.mining.pool_size = m.value("pool_size", c.mining.pool_size);
            c.mining.num_negatives = m.value("num_negatives", c.mining.num_negatives);
        }
        if (j.contains("loss")) {
            const auto& l = j["loss"];
            c.loss.margin = l.value("margin", c.loss.margin);
            c.loss.learning_rate = l.value("learning_rate", c.loss.learning_rate);
            c.loss.epochs = l.value("epochs", c.loss.epochs);
            c.loss.batch_size = l.value("batch_size", c.loss.batch_size);
        }
        if (j.contains("eval")) {
            const auto& e = j["eval"];
            c.eval.radius = e.value("radius", c.eval.radius);
            c.eval.k_set = e.value("k_set", c.eval.k_set);
            c.eval.subset = e.value("subset", c.eval.subset);
        }
        if (j.contains("coverage")) {
            c.coverage_eps = j["coverage"].value("eps", c.coverage_eps);
            c.coverage_min_pts = j["coverage"].value("min_pts", c.coverage_min_pts);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    c.loss.seed = c.seed;
    return c;
}

void validate(const PipelineConfig& c) {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw std::invalid_argument(std::string("config: ") + what);
        }
    };
    require(c.window_threshold >= 0.0 && c.window_threshold < 1.0, "window_threshold must lie in [0, 1)");
    require(c.mining.positive_radius > 0.0, "positive_radius must be > 0");
    require(c.mining.negative_radius >= c.mining.positive_radius, "negative_radius must be >= positive_radius");
    require(c.mining.pool_size >= 1 && c.mining.num_negatives >= 1, "pool_size and num_negatives must be >= 1");
    require(c.loss.margin > 0.0, "margin must be > 0");
    require(c.loss.learning_rate > 0.0, "learning_rate must be > 0");
    require(c.loss.epochs >= 0 && c.loss.batch_size >= 1, "epochs >= 0 and batch_size >= 1");
    require(c.embed_dim >= 1, "embed_dim must be >= 1");
    require(c.eval.radius > 0.0, "eval radius must be > 0");
    require(!c.eval.k_set.empty() && std::is_sorted(c.eval.k_set.begin(), c.eval.k_set.end()) &&
                c.eval.k_set.front() >= 1,
            "k_set must be ascending and >= 1");
    require(c.coverage_eps > 0.0 && c.coverage_min_pts >= 1, "coverage eps > 0 and min_pts >= 1");
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw DataError("cannot open config " + path.string());
    }
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw DataError("config " + path.string() + ": " + e.what());
    }
    auto c = PipelineConfig::from_json(j);
    validate(c);
    return c;
}

void save_config(const fs::path& path, const PipelineConfig& config) {
    auto os = open_out(path);
    os << PipelineConfig::to_json(config).dump(2) << '\n';
}

}  // namespace iovpr::io
