#include "iovpr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace iovpr::eval {

namespace {

double round1(double v) { return std::round(v * 10.0) / 10.0; }

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + '"';
}

}  // namespace

RecallReport recall_at_k(std::span<const retrieval::Ranking> rankings, const LocationMap& query_locations,
                         const LocationMap& gallery_locations, const EvalConfig& config,
                         std::size_t gallery_size, std::string model) {
    if (rankings.empty()) {
        throw EvalError("recall_at_k: empty query set");
    }
    if (!(config.radius > 0.0)) {
        throw EvalError("recall_at_k: radius must be > 0");
    }
    if (config.k_set.empty() || !std::is_sorted(config.k_set.begin(), config.k_set.end()) || config.k_set.front() < 1) {
        throw EvalError("recall_at_k: K set must be non-empty, ascending and >= 1");
    }
    if (gallery_size == 0) {
        throw EvalError("recall_at_k: empty gallery");
    }

    RecallReport report;
    report.model = std::move(model);
    report.gallery_size = gallery_size;
    report.query_count = rankings.size();
    report.radius = config.radius;
    for (int k : config.k_set) {
        if (static_cast<std::size_t>(k) > gallery_size) {
            report.warnings.push_back("K=" + std::to_string(k) + " capped at gallery size " + std::to_string(gallery_size));
            k = static_cast<int>(gallery_size);
        }
        report.k_set.push_back(k);
    }
    const auto needed = static_cast<std::size_t>(report.k_set.back());

    // First rank (0-based) holding a gallery item within the radius, per query.
    std::vector<std::size_t> first_hit(rankings.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        const auto& r = rankings[q];
        const auto qit = query_locations.find(r.query_id);
        if (qit == query_locations.end()) {
            throw EvalError("no location for query " + std::to_string(r.query_id));
        }
        if (r.results.size() < needed) {
            throw EvalError("ranking for query " + std::to_string(r.query_id) + " has " +
                            std::to_string(r.results.size()) + " entries, need " + std::to_string(needed));
        }
        for (std::size_t rank = 0; rank < needed; ++rank) {
            const auto git = gallery_locations.find(r.results[rank].id);
            if (git == gallery_locations.end()) {
                throw EvalError("no location for gallery item " + std::to_string(r.results[rank].id));
            }
            if (haversine(qit->second, git->second) <= config.radius) {
                first_hit[q] = rank;
                break;
            }
        }
    }
    for (int k : report.k_set) {
        const auto hits = std::count_if(first_hit.begin(), first_hit.end(),
                                        [k](std::size_t rank) { return rank < static_cast<std::size_t>(k); });
        report.recall.push_back(100.0 * static_cast<double>(hits) / static_cast<double>(rankings.size()));
    }
    return report;
}

std::vector<ItemId> make_distractor_subset(std::span<const ItemId> gallery_ids, const LocationMap& gallery_locations,
                                           std::span<const GeoPoint> query_locations, std::size_t target_size,
                                           double radius, std::uint64_t seed) {
    if (target_size > gallery_ids.size()) {
        throw EvalError("subset target " + std::to_string(target_size) + " exceeds gallery size " +
                        std::to_string(gallery_ids.size()));
    }
    SpatialIndex index(std::max(SpatialIndex::kDefaultCellSize, radius));
    for (auto id : gallery_ids) {
        const auto it = gallery_locations.find(id);
        if (it == gallery_locations.end()) {
            throw EvalError("no location for gallery item " + std::to_string(id));
        }
        index.insert(id, it->second);
    }
    std::vector<ItemId> positives;
    for (const auto& q : query_locations) {
        const auto near = index.radius_query(q, radius);
        positives.insert(positives.end(), near.begin(), near.end());
    }
    std::sort(positives.begin(), positives.end());
    positives.erase(std::unique(positives.begin(), positives.end()), positives.end());
    if (positives.size() > target_size) {
        throw EvalError("true positives (" + std::to_string(positives.size()) + ") exceed subset target " +
                        std::to_string(target_size));
    }

    std::vector<ItemId> rest(gallery_ids.begin(), gallery_ids.end());
    std::sort(rest.begin(), rest.end());
    std::erase_if(rest, [&](ItemId id) { return std::binary_search(positives.begin(), positives.end(), id); });
    Rng rng(seed);
    auto sampled = rng.sample(std::move(rest), target_size - positives.size());

    positives.insert(positives.end(), sampled.begin(), sampled.end());
    std::sort(positives.begin(), positives.end());
    return positives;
}

std::string format_recall(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", round1(value));
    return buf;
}

std::string to_csv(std::span<const RecallReport> reports) {
    if (reports.empty()) {
        return {};
    }
    const auto& ks = reports.front().k_set;
    std::ostringstream os;
    os << "model,size";
    for (int k : ks) {
        os << ",R@" << k;
    }
    os << '\n';
    for (const auto& r : reports) {
        if (r.k_set != ks) {
            throw EvalError("to_csv: reports have different K sets");
        }
        os << csv_field(r.model) << ',' << r.gallery_size;
        for (double v : r.recall) {
            os << ',' << format_recall(v);
        }
        os << '\n';
    }
    return os.str();
}

std::vector<RecallReport> parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) {
        return {};
    }
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "model" || header[1] != "size") {
        throw EvalError("CSV header must start with model,size");
    }
    std::vector<int> ks;
    for (std::size_t i = 2; i < header.size(); ++i) {
        if (header[i].rfind("R@", 0) != 0) {
            throw EvalError("unexpected CSV column " + header[i]);
        }
        ks.push_back(std::stoi(header[i].substr(2)));
    }
    std::vector<RecallReport> out;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw EvalError("CSV row has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        RecallReport r;
        r.model = fields[0];
        r.gallery_size = std::stoull(fields[1]);
        r.k_set = ks;
        for (std::size_t i = 2; i < fields.size(); ++i) {
            r.recall.push_back(std::stod(fields[i]));
        }
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::ordered_json to_json(const RecallReport& report) {
    nlohmann::ordered_json j;
    j["model"] = report.model;
    j["gallery_size"] = report.gallery_size;
    j["query_count"] = report.query_count;
    j["radius"] = report.radius;
    j["k_set"] = report.k_set;
    nlohmann::ordered_json recall = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < report.k_set.size(); ++i) {
        recall["R@" + std::to_string(report.k_set[i])] = round1(report.recall[i]);
    }
    j["recall"] = recall;
    j["warnings"] = report.warnings;
    j["config"] = report.config.is_null() ? nlohmann::ordered_json::object() : report.config;
    return j;
}

RecallReport from_json(const nlohmann::ordered_json& j) {
    RecallReport r;
    r.model = j.at("model").get<std::string>();
    r.gallery_size = j.at("gallery_size").get<std::size_t>();
    r.query_count = j.at("query_count").get<std::size_t>();
    r.radius = j.at("radius").get<double>();
    r.k_set = j.at("k_set").get<std::vector<int>>();
    for (int k : r.k_set) {
        r.recall.push_back(j.at("recall").at("R@" + std::to_string(k)).get<double>());
    }
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.config = j.value("config", nlohmann::ordered_json::object());
    return r;
}

void write_report(const std::filesystem::path& path, const RecallReport& report) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) {
        throw EvalError("cannot write " + path.string());
    }
    if (path.extension() == ".json") {
        os << to_json(report).dump(2) << '\n';
    } else {
        os << to_csv(std::span<const RecallReport>(&report, 1));
    }
}

}  // namespace iovpr::eval
