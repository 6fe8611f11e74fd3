#include <filesystem>
#include <fstream>

#include "cli_support.hpp"
#include "doctest.h"
#include "iovpr/embed.hpp"
#include "iovpr/manifest.hpp"
#include "iovpr/png_io.hpp"
#include "iovpr/synthetic.hpp"

using namespace iovpr;
using clitest::run;
using clitest::slurp;
namespace fs = std::filesystem;

namespace {

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

void write_pano(const fs::path& dir, const std::string& stem, std::uint64_t seed, double lat, double lon) {
    write_png_rgb(dir / (stem + ".png"), synthetic::make_panorama(seed));
    std::ofstream(dir / (stem + ".json")) << R"({"pano_id":")" << stem << R"(","lat":)" << lat << R"(,"lon":)" << lon
                                          << R"(,"year":2021})";
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run("") == 1);
    CHECK(run("no-such-command") == 1);
    CHECK(run("mine --manifest x.jsonl") == 1);
    CHECK(run("eval --manifest x.jsonl --layout-kind blue") == 1);
    CHECK(run("--help") == 0);
}

TEST_CASE("pano-cut") {
    const auto dir = clitest::fresh_dir("iovpr_cli_pano");
    fs::create_directories(dir / "in");
    write_pano(dir / "in", "p1", 1, 52.37, 4.89);

    REQUIRE(run("pano-cut --in " + quoted(dir / "in") + " --manifest " + quoted(dir / "m.jsonl") + " --out " +
                quoted(dir / "tiles")) == 0);
    const auto rows = io::read_manifest(dir / "m.jsonl", true);
    CHECK(rows.size() == 24);
    std::size_t tiles = 0;
    for (const auto& e : fs::directory_iterator(dir / "tiles")) {
        tiles += e.path().extension() == ".png";
    }
    CHECK(tiles == 24);
    for (const auto& r : rows) {
        CHECK(r.pano_id == std::string("p1"));
        CHECK(r.lat == 52.37);
        CHECK(r.year == 2021);
        const auto img = read_png_rgb(io::resolve_path(dir / "m.jsonl", r.image_path));
        CHECK(img.height() == 480);
        CHECK(img.width() == 640);
    }

    const auto before = clitest::tree(dir);
    REQUIRE(run("pano-cut --in " + quoted(dir / "in") + " --manifest " + quoted(dir / "m.jsonl") + " --out " +
                quoted(dir / "tiles")) == 0);
    CHECK(clitest::tree(dir) == before);

    SUBCASE("coverage-select") {
        write_pano(dir / "in", "p2", 2, 52.37, 4.89);
        REQUIRE(run("pano-cut --in " + quoted(dir / "in") + " --manifest " + quoted(dir / "m2.jsonl") + " --out " +
                    quoted(dir / "tiles2")) == 0);
        CHECK(io::read_manifest(dir / "m2.jsonl").size() == 48);
        REQUIRE(run("coverage-select --manifest " + quoted(dir / "m2.jsonl") + " --out " + quoted(dir / "ids.txt")) == 0);
        CHECK(io::read_id_list(dir / "ids.txt") == std::vector<std::string>{"p1"});
    }
}

TEST_CASE("pano-cut on empty and broken inputs") {
    const auto dir = clitest::fresh_dir("iovpr_cli_pano_bad");
    fs::create_directories(dir / "empty");
    CHECK(run("pano-cut --in " + quoted(dir / "empty") + " --manifest " + quoted(dir / "e.jsonl") + " --out " +
              quoted(dir / "t")) == 0);
    CHECK(fs::exists(dir / "e.jsonl"));
    CHECK(fs::file_size(dir / "e.jsonl") == 0);

    fs::create_directories(dir / "bad");
    std::ofstream(dir / "bad" / "x.png") << "not a png";
    std::ofstream(dir / "bad" / "x.json") << R"({"pano_id":"x","lat":1,"lon":1,"year":2020})";
    write_png_rgb(dir / "bad" / "small.png", RasterImage(10, 20));
    std::ofstream(dir / "bad" / "small.json") << R"({"pano_id":"s","lat":1,"lon":1,"year":2020})";
    CHECK(run("pano-cut --in " + quoted(dir / "bad") + " --manifest " + quoted(dir / "b.jsonl") + " --out " +
              quoted(dir / "t")) == 2);
    CHECK(run("pano-cut --in " + quoted(dir / "absent") + " --manifest " + quoted(dir / "b.jsonl") + " --out " +
              quoted(dir / "t")) == 2);
}

TEST_CASE("small pipeline") {
    const auto dir = clitest::fresh_dir("iovpr_cli_pipeline");
    std::ofstream(dir / "config.json") << R"({"embed_dim": 16, "mining": {"pool_size": 50}})";
    const std::string common = " --seed 3 --config " + quoted(dir / "config.json");
    REQUIRE(clitest::small_pipeline(dir, common) == 0);

    const auto report = nlohmann::ordered_json::parse(slurp(dir / "out/report.json"));
    CHECK(report["model"] == "aug");
    CHECK(report["query_count"] == 4);
    CHECK(report["config"]["seed"] == 3);
    CHECK(report["config"]["embed_dim"] == 16);
    CHECK(io::read_rankings(dir / "out/rankings.jsonl").size() == 4);
    CHECK(!io::read_triplets(dir / "out/triplets.jsonl").empty());
    CHECK(slurp(dir / "out/train.csv").starts_with("epoch,mean_loss,skipped,checksum\n"));

    SUBCASE("train with zero epochs writes the initial params") {
        REQUIRE(run("train --manifest " + quoted(dir / "city/train.jsonl") + " --layouts " +
                    quoted(dir / "layouts/layouts.jsonl") + " --out " + quoted(dir / "init.bin") + " --epochs 0" +
                    common) == 0);
        CHECK(embed::load_params(dir / "init.bin") == embed::init_params(3, embed::kFeatureDim, 16));
    }
    SUBCASE("eval from saved rankings") {
        REQUIRE(run("eval --manifest " + quoted(dir / "test-queries/manifest.jsonl") + " --rankings " +
                    quoted(dir / "out/rankings.jsonl") + " --report " + quoted(dir / "again.json") +
                    " --model aug" + common) == 0);
        CHECK(slurp(dir / "again.json") == slurp(dir / "out/report.json"));
    }
    SUBCASE("eval without rankings is a data error") {
        CHECK(run("eval --manifest " + quoted(dir / "test-queries/manifest.jsonl") + common) == 2);
        CHECK(run("eval --manifest " + quoted(dir / "test-queries/manifest.jsonl") + " --rankings " +
                  quoted(dir / "missing.jsonl") + common) == 2);
    }
    SUBCASE("subset") {
        REQUIRE(run("subset --manifest " + quoted(dir / "city/test.jsonl") + " --size 24 --out " +
                    quoted(dir / "subset.txt") + common) == 0);
        CHECK(io::read_id_list(dir / "subset.txt").size() == 24);
        CHECK(run("subset --manifest " + quoted(dir / "city/test.jsonl") + " --size 999 --out " +
                  quoted(dir / "subset.txt") + common) == 2);
    }
    SUBCASE("bad inputs") {
        CHECK(run("index --manifest " + quoted(dir / "absent.jsonl") + " --out " + quoted(dir / "s.bin") + common) == 2);
        std::ofstream(dir / "junk.bin") << "junk";
        CHECK(run("index --manifest " + quoted(dir / "city/test.jsonl") + " --params " + quoted(dir / "junk.bin") +
                  " --out " + quoted(dir / "s.bin") + common) == 2);
        std::ofstream(dir / "bad.json") << R"({"loss": {"margin": 0}})";
        CHECK(run("mine --manifest " + quoted(dir / "city/train.jsonl") + " --out " + quoted(dir / "t.jsonl") +
                  " --config " + quoted(dir / "bad.json")) == 1);
    }
}
