#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hgcode/checks.hpp"
#include "hgcode/cli.hpp"
#include "hgcode/incidence.hpp"

using namespace hgcode;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "hgcode");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("hgcode_cli_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"params", "--layers", "12"}).code == kExitUsage);
    CHECK(run({"params", "--layers", "2", "--hidden", "8", "--bottleneck", "16"}).code == kExitUsage);
    CHECK(run({"params", "--layers", "x", "--hidden", "8"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("version") {
    auto r = run({"--version"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find(kToolkitVersion) != std::string::npos);
    for (auto l : supported_languages()) CHECK(r.out.find(std::string(to_string(l))) != std::string::npos);
}

TEST_CASE("params") {
    auto r = run({"params", "--layers", "12", "--hidden", "768", "--bottleneck", "64"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("1,189,632") != std::string::npos);
    CHECK(r.out.find("1,341,696") != std::string::npos);
    CHECK(r.out.find("1.2M") != std::string::npos);
    CHECK(r.out.find("1.3M") != std::string::npos);

    auto j = nlohmann::json::parse(
        run({"params", "--layers", "32", "--hidden", "4096", "--plm-params", "6.7B", "--json"}).out);
    CHECK(j["plain_adapter"] == 16910336);
    CHECK(j["hgadapter"] == 17315840);
    CHECK(j["hgadapter_display"] == "17.3M");
    CHECK(j["plm_params"].get<double>() == 6.7e9);
    CHECK(j["hgadapter_over_plm_percent_display"].get<double>() == doctest::Approx(100 * 17.3e6 / 6.7e9));

    auto once = run({"params", "--layers", "24", "--hidden", "896", "--json"});
    CHECK(once.out == run({"params", "--layers", "24", "--hidden", "896", "--json"}).out);
    CHECK(run({"params", "--layers", "1", "--hidden", "8", "--plm-params", "lots"}).code == kExitUsage);
}

TEST_CASE("extract") {
    TempDir dir;
    auto empty = dir.write("empty.java", "");
    auto r = run({"extract", empty.string(), "--language", "java"});
    REQUIRE(r.code == kExitOk);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["tokens"] == nlohmann::json::array());
    CHECK(j["incidence"] == nlohmann::json::array());
    CHECK(j["token_count"] == 0);

    auto py = dir.write("calc.py", "class SimpleCalculator:\n    def add(self, a, b):\n        return a + b\n");
    auto vocab = (data_dir() / "demo_vocab.json").string();
    auto inferred = run({"extract", py.string(), "--tokenizer", vocab});
    REQUIRE(inferred.code == kExitOk);
    auto g = hypergraph_from_json(nlohmann::json::parse(inferred.out));
    CHECK(validate(g).ok);
    CHECK(g.source_language == "python");
    CHECK(std::count(g.hyperedge_types.begin(), g.hyperedge_types.end(), HyperedgeType::Lexical) >= 1);

    auto ablated = hypergraph_from_json(nlohmann::json::parse(run({"extract", py.string(), "--ablate", "all"}).out));
    CHECK(ablated.edge_count() == 0);
    auto no_line = hypergraph_from_json(nlohmann::json::parse(run({"extract", py.string(), "--ablate", "line"}).out));
    CHECK(std::count(no_line.hyperedge_types.begin(), no_line.hyperedge_types.end(), HyperedgeType::Line) == 0);

    auto cut = hypergraph_from_json(nlohmann::json::parse(run({"extract", py.string(), "--max-tokens", "4"}).out));
    CHECK(cut.token_count == 4);
    CHECK(validate(cut).ok);

    auto out_file = dir.path / "g.json";
    CHECK(run({"extract", py.string(), "-o", out_file.string()}).code == kExitOk);
    std::ifstream in(out_file);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == run({"extract", py.string()}).out);

    auto many = run({"extract", py.string(), empty.string()});
    REQUIRE(many.code == kExitOk);
    auto arr = nlohmann::json::parse(many.out);
    REQUIRE(arr.is_array());
    CHECK(arr.size() == 2);

    CHECK(run({"extract", (dir.path / "missing.java").string()}).code == kExitUsage);
    auto unknown_ext = dir.write("notes.txt", "hello");
    CHECK(run({"extract", unknown_ext.string()}).code != kExitOk);
    CHECK(run({"extract", py.string(), "--language", "cobol"}).code == kExitUsage);
    CHECK(run({"extract", py.string(), "--ablate", "bogus"}).code == kExitUsage);
}

TEST_CASE("stats") {
    auto r = run({"stats", (data_dir() / "corpus").string(), "--language", "go"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("Avg. tokens") != std::string::npos);
    CHECK(r.out.find("Avg. hyperedges") != std::string::npos);
    auto j = nlohmann::json::parse(run({"stats", (data_dir() / "corpus").string(), "--json", "--threads", "2"}).out);
    CHECK(j.dump() == nlohmann::json::parse(run({"stats", (data_dir() / "corpus").string(), "--json", "--threads", "1"}).out).dump());
}

TEST_CASE("gradcheck") {
    auto r = run({"gradcheck", "--seed", "7", "--trials", "20"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("PASS") != std::string::npos);
    auto j = nlohmann::json::parse(run({"gradcheck", "--seed", "7", "--trials", "3", "--json"}).out);
    CHECK(j["passed"] == true);
    CHECK(j["max_rel_error"].get<double>() <= 1e-5);
    CHECK(run({"gradcheck", "--trials", "2", "--tol", "1e-30"}).code == kExitFailure);
}

TEST_CASE("config overlay") {
    TempDir dir;
    auto toml = dir.write("c.toml", "[params]\nlayers = 12\nhidden = 768\n");
    auto r = run({"--config", toml.string(), "params", "--json"});
    REQUIRE(r.code == kExitOk);
    CHECK(nlohmann::json::parse(r.out)["hgadapter"] == 1341696);

    auto over = run({"--config", toml.string(), "params", "--hidden", "896", "--layers", "24", "--json"});
    CHECK(nlohmann::json::parse(over.out)["hgadapter"] == 3079680);

    auto js = dir.write("c.json", R"({"params": {"layers": 22, "hidden": 2048}})");
    auto rj = run({"--config", js.string(), "params", "--json"});
    REQUIRE(rj.code == kExitOk);
    CHECK(nlohmann::json::parse(rj.out)["hgadapter"] == 6092416);

    auto bad = dir.write("bad.toml", "[params]\nlayers = 12\nhidden = 768\ncolour = 3\n");
    CHECK(run({"--config", bad.string(), "params"}).code == kExitUsage);
    auto bad_json = dir.write("bad.json", R"({"params": {"layers": 1, "hidden": 8, "depth": 2}})");
    CHECK(run({"--config", bad_json.string(), "params"}).code == kExitUsage);
}

TEST_CASE("selftest") {
    auto r = run({"selftest"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("train-clone-demo small run") {
    TempDir dir;
    auto report = dir.path / "report.json";
    auto ckpt = dir.path / "ckpt.json";
    auto data = dir.path / "pairs.jsonl";
    auto r = run({"train-clone-demo", "--seed", "3", "--epochs", "2", "--train-size", "16", "--val-size", "8", "--json",
                  "-o", report.string(), "--checkpoint", ckpt.string(), "--dataset-out", data.string(), "--threads",
                  "1"});
    REQUIRE(r.code == kExitOk);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["frozen_digest_before"] == j["frozen_digest_after"]);
    CHECK(j["epoch_loss"].size() == 2);
    CHECK(fs::exists(report));
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(data));

    auto again = run({"train-clone-demo", "--dataset", data.string(), "--epochs", "1", "--ablate", "all", "--json",
                      "--threads", "1"});
    CHECK(again.code == kExitOk);
    CHECK(run({"train-clone-demo", "--preset", "turbo"}).code == kExitUsage);
}

}  // TEST_SUITE
