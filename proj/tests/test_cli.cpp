#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "traject/cli.hpp"
#include "traject/model.hpp"
#include "traject/types.hpp"

using namespace traject;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("traject");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return cli::dispatch(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "traject_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    for (size_t at = text.find(needle); at != std::string::npos;
         at = text.find(needle, at + needle.size())) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("cli: parse failures and help map to the right exit codes") {
    CHECK(run_cli({"--help"}) == cli::kOk);
    CHECK(run_cli({}) == cli::kUsageError);
    CHECK(run_cli({"frobnicate"}) == cli::kUsageError);
    CHECK(run_cli({"train", "--no-such-flag"}) == cli::kUsageError);
    CHECK(run_cli({"generate", "--kind-mix", "crossing=1"}) == cli::kUsageError);
    CHECK(run_cli({"generate", "--help"}) == cli::kOk);
}

TEST_CASE("cli: generate, label, train, evaluate pipeline") {
    const auto dir = work_dir();
    const auto data = (dir / "pipe.jsonl").string();
    const auto relabeled = (dir / "pipe_relabel.jsonl").string();
    const auto ckpt = (dir / "pipe.ckpt").string();
    const auto log = (dir / "pipe_log.csv").string();

    REQUIRE(run_cli({"generate", "--kind-mix", "crossing=10,following=3,independent=3", "--seed",
                     "11", "--out", data}) == cli::kOk);
    const std::vector<Scene> scenes = load_dataset(data);
    CHECK(scenes.size() == 16);
    CHECK(!scenes.front().labels.empty());

    // The generator already labels; relabeling must be a byte-level no-op.
    REQUIRE(run_cli({"label", "--data", data, "--out", relabeled}) == cli::kOk);
    CHECK(slurp(data) == slurp(relabeled));

    REQUIRE(run_cli({"train", "--data", data, "--out", ckpt, "--variant", "joint_supervised",
                     "--epochs", "2", "--hidden", "8", "--width", "8", "--seed", "5", "--log",
                     log}) == cli::kOk);
    const LoadedCheckpoint ck = load_checkpoint(ckpt);
    CHECK(ck.variant == Variant::JointSupervised);
    CHECK(ck.config.hidden == 8);

    const std::string log_text = slurp(log);
    CHECK(log_text.rfind("epoch,train_loss,val_loss,val_dpe,val_ate,val_cte,val_int_acc", 0) == 0);
    CHECK(count_occurrences(log_text, "\n") == 3);

    CHECK(run_cli({"evaluate", "--model", ckpt, "--data", data, "--split", "val"}) == cli::kOk);
    CHECK(run_cli({"evaluate", "--model", ckpt, "--data", data, "--split", "all"}) == cli::kOk);
    CHECK(run_cli({"evaluate", "--model", ckpt, "--data", data, "--split", "nope"}) ==
          cli::kUsageError);
    CHECK(run_cli({"evaluate", "--model", (dir / "missing.ckpt").string(), "--data", data}) ==
          cli::kDataError);
    CHECK(run_cli({"train", "--data", (dir / "missing.jsonl").string(), "--out", ckpt}) ==
          cli::kDataError);
    CHECK(run_cli({"train", "--data", data, "--out", ckpt, "--epochs", "0"}) == cli::kUsageError);
}

TEST_CASE("cli: inject honors the variant contract") {
    const auto dir = work_dir();
    const auto data = (dir / "inj.jsonl").string();
    const auto typed = (dir / "inj_typed.ckpt").string();
    const auto flat = (dir / "inj_flat.ckpt").string();
    const auto report = (dir / "inj.json").string();

    REQUIRE(run_cli({"generate", "--kind-mix", "crossing=6", "--seed", "3", "--out", data}) ==
            cli::kOk);
    REQUIRE(run_cli({"train", "--data", data, "--out", typed, "--variant", "joint_supervised",
                     "--epochs", "1", "--hidden", "6", "--width", "6"}) == cli::kOk);
    REQUIRE(run_cli({"train", "--data", data, "--out", flat, "--variant", "baseline", "--epochs",
                     "1", "--hidden", "6", "--width", "6"}) == cli::kOk);

    CHECK(run_cli({"inject", "--model", flat, "--data", data, "--scene", "crossing_000000",
                   "--set", "0,1,GOING"}) == cli::kUsageError);
    CHECK(run_cli({"inject", "--model", typed, "--data", data, "--scene", "no_such_scene",
                   "--set", "0,1,GOING"}) == cli::kDataError);
    CHECK(run_cli({"inject", "--model", typed, "--data", data, "--scene", "crossing_000000",
                   "--set", "0,1,WAITING"}) == cli::kUsageError);
    CHECK(run_cli({"inject", "--model", typed, "--data", data, "--scene", "crossing_000000",
                   "--set", "0,1"}) == cli::kUsageError);

    REQUIRE(run_cli({"inject", "--model", typed, "--data", data, "--scene", "crossing_000000",
                     "--set", "0,1,GOING", "--set", "1,0,YIELDING", "--out", report}) == cli::kOk);
    const nlohmann::json j = nlohmann::json::parse(slurp(report));
    CHECK(j.at("scene_id") == "crossing_000000");
    CHECK(j.at("overrides").size() == 2);
    CHECK(j.at("arrivals").size() == 2);
    CHECK(j.at("trajectories").size() == 2);
    CHECK(j.at("overrides")[0].at("label") == "GOING");
}

TEST_CASE("cli: trajectory plots are countable and byte-deterministic") {
    const auto dir = work_dir();
    const auto data = (dir / "plot.jsonl").string();
    const auto ckpt = (dir / "plot.ckpt").string();
    const auto svg_a = (dir / "plot_a.svg").string();
    const auto svg_b = (dir / "plot_b.svg").string();

    REQUIRE(run_cli({"generate", "--kind-mix", "crossing=4", "--seed", "21", "--out", data}) ==
            cli::kOk);
    REQUIRE(run_cli({"train", "--data", data, "--out", ckpt, "--variant", "untyped", "--epochs",
                     "1", "--hidden", "6", "--width", "6"}) == cli::kOk);

    SUBCASE("one two-agent scene with predictions") {
        REQUIRE(run_cli({"plot", "--data", data, "--model", ckpt, "--scene", "crossing_000000",
                         "--out", svg_a}) == cli::kOk);
        const std::string svg = slurp(svg_a);
        CHECK(count_occurrences(svg, "class=\"truth\"") == 2);
        CHECK(count_occurrences(svg, "class=\"pred\"") == 2);
        // Each agent draws 11 past dots, 10 future dots and 10 prediction rings.
        CHECK(count_occurrences(svg, "<circle") == 2 * (11 + 10 + 10));
        CHECK(count_occurrences(svg, "stroke-width=\"1.1\"") == 2 * 10);

        REQUIRE(run_cli({"plot", "--data", data, "--model", ckpt, "--scene", "crossing_000000",
                         "--out", svg_b}) == cli::kOk);
        CHECK(slurp(svg_a) == slurp(svg_b));
    }

    SUBCASE("truth-only plot of the whole dataset") {
        REQUIRE(run_cli({"plot", "--data", data, "--out", svg_a}) == cli::kOk);
        const std::string svg = slurp(svg_a);
        CHECK(count_occurrences(svg, "class=\"truth\"") == 8);
        CHECK(count_occurrences(svg, "class=\"pred\"") == 0);
        CHECK(count_occurrences(svg, "class=\"scene\"") == 4);
    }

    SUBCASE("empty scene list renders an empty canvas") {
        const auto empty = (dir / "empty.jsonl").string();
        save_dataset(empty, {});
        REQUIRE(run_cli({"plot", "--data", empty, "--out", svg_a}) == cli::kOk);
        const std::string svg = slurp(svg_a);
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(count_occurrences(svg, "class=\"canvas\"") == 1);
        CHECK(count_occurrences(svg, "<circle") == 0);
    }

    SUBCASE("missing scene id fails as a data error") {
        CHECK(run_cli({"plot", "--data", data, "--scene", "ghost", "--out", svg_a}) ==
              cli::kDataError);
    }
}

TEST_CASE("cli: metrics report plot draws nine bars") {
    const auto dir = work_dir();
    const auto csv = (dir / "metrics.csv").string();
    const auto svg_path = (dir / "metrics.svg").string();
    {
        std::ofstream out(csv);
        out << "metric,overall,h1s,h3s,h5s\n";
        out << "dpe,1.000000,0.400000,1.000000,1.800000\n";
        out << "ate,0.700000,0.300000,0.700000,1.200000\n";
        out << "cte,0.500000,0.200000,0.500000,0.900000\n";
        out << "int_acc,0.930000,,,\n";
    }
    REQUIRE(run_cli({"plot", "--report", csv, "--out", svg_path}) == cli::kOk);
    const std::string svg = slurp(svg_path);
    CHECK(count_occurrences(svg, "class=\"bar ") == 9);
    CHECK(count_occurrences(svg, "bar-dpe") == 3);
    CHECK(svg.find("1.800") != std::string::npos);

    REQUIRE(run_cli({"plot", "--report", csv, "--out", (dir / "metrics_b.svg").string()}) ==
            cli::kOk);
    CHECK(slurp(svg_path) == slurp(dir / "metrics_b.svg"));

    SUBCASE("report mode rejects --data and bad files") {
        CHECK(run_cli({"plot", "--report", csv, "--data", csv, "--out", svg_path}) ==
              cli::kUsageError);
        CHECK(run_cli({"plot", "--out", svg_path}) == cli::kUsageError);
        const auto junk = (dir / "junk.csv").string();
        {
            std::ofstream out(junk);
            out << "nope\n";
        }
        CHECK(run_cli({"plot", "--report", junk, "--out", svg_path}) == cli::kDataError);
    }
}

TEST_CASE("cli: ablate writes the full variant matrix") {
    const auto dir = work_dir();
    const auto data = (dir / "abl.jsonl").string();
    const auto out_csv = (dir / "abl.csv").string();

    REQUIRE(run_cli({"generate", "--kind-mix", "crossing=14,independent=4", "--seed", "29",
                     "--out", data}) == cli::kOk);
    REQUIRE(run_cli({"ablate", "--data", data, "--seeds", "1", "--epochs", "1", "--hidden", "6",
                     "--width", "6", "--out", out_csv}) == cli::kOk);
    const std::string csv = slurp(out_csv);
    CHECK(csv.rfind("variant,seed,dpe,ate,cte,int_acc", 0) == 0);
    // 7 variants, each with one seed row plus mean and stddev rows.
    CHECK(count_occurrences(csv, "\n") == 1 + 7 * 3);
    CHECK(csv.find("baseline,1,") != std::string::npos);
    CHECK(csv.find("oracle,mean,") != std::string::npos);

    CHECK(run_cli({"ablate", "--data", data, "--seeds", "1,x", "--epochs", "1"}) ==
          cli::kUsageError);
}
