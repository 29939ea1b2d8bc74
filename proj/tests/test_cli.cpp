#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynres/cli.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

const std::string kDataDir = DYNRES_DATA_DIR;
const std::string kCal = kDataDir + "/d9300.cal";

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    CliResult r;
    r.code = dynres::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string temp_path(const char* name) {
    return std::string("cli_test_") + name;
}

} // namespace

TEST_CASE("plan selects the pinned grids per method") {
    const CliResult relaxed = run_cli({"plan", "--width", "394", "--height", "390"});
    CHECK(relaxed.code == 0);
    CHECK(relaxed.out.find("selected: 1:1") != std::string::npos);
    CHECK(relaxed.out.find("method: relaxed") != std::string::npos);

    const CliResult classic = run_cli(
        {"plan", "--width", "394", "--height", "390", "--method", "llava-next"});
    CHECK(classic.code == 0);
    CHECK(classic.out.find("selected: 2:2") != std::string::npos);

    const CliResult aspect = run_cli({"plan", "--width", "380", "--height", "76",
                                      "--method", "internvl", "--max-num", "6"});
    CHECK(aspect.code == 0);
    CHECK(aspect.out.find("selected: 5:1") != std::string::npos);
    CHECK(aspect.out.find("stretch") != std::string::npos);
}

TEST_CASE("plan JSON output is machine-readable and stable") {
    const std::vector<std::string> args = {"plan", "--width",  "500",
                                           "--height", "102", "--format", "json"};
    const CliResult first = run_cli(args);
    REQUIRE(first.code == 0);
    const json j = json::parse(first.out);
    CHECK(j.at("method") == "relaxed");
    CHECK(j.at("selected").at("m") == 2);
    CHECK(j.at("selected").at("n") == 1);
    CHECK(j.at("plan").at("grid").at("m") == 2);
    CHECK(j.at("tokens").at("patch_count") == 3);
    CHECK(j.at("alpha") == 0.1);

    // Byte-for-byte reproducible.
    const CliResult second = run_cli(args);
    CHECK(second.out == first.out);
}

TEST_CASE("plan trace output replays the scan") {
    const CliResult r = run_cli({"plan", "--width", "394", "--height", "390",
                                 "--trace", "--format", "json"});
    REQUIRE(r.code == 0);
    const json trace = json::parse(r.out).at("trace");
    CHECK(trace.at("steps").size() == 9);
    CHECK(trace.at("order") == "descending");
    CHECK(trace.at("steps")[0].at("grid").at("m") == 3);
    CHECK(trace.at("steps")[0].at("accepted") == true);
    CHECK(trace.at("selected").at("m") == 1);
    CHECK(trace.at("fallback_used") == false);
}

TEST_CASE("plan flag and option variations") {
    const CliResult bare = run_cli({"plan", "--width", "394", "--height", "390",
                                    "--no-thumbnail", "--format", "json"});
    REQUIRE(bare.code == 0);
    const json j = json::parse(bare.out);
    CHECK(j.at("tokens").at("patch_count") == 1);
    CHECK(j.at("plan").at("thumbnail").is_null());

    const CliResult alpha0 = run_cli({"plan", "--width", "394", "--height", "390",
                                      "--alpha", "0"});
    CHECK(alpha0.code == 0);

    const CliResult pool = run_cli({"plan", "--width", "380", "--height", "76",
                                    "--max-num", "6", "--format", "json"});
    REQUIRE(pool.code == 0);
    CHECK(json::parse(pool.out).at("selected").at("m") == 1);

    const CliResult cell = run_cli({"plan", "--width", "500", "--height", "100",
                                    "--cell", "100", "--ratios", "5x5",
                                    "--format", "json"});
    REQUIRE(cell.code == 0);
    CHECK(json::parse(cell.out).at("plan").at("cell_side") == 100);
}

TEST_CASE("exit codes distinguish usage, input, and success") {
    CHECK(run_cli({"plan", "--width", "394"}).code == 2);       // missing --height
    CHECK(run_cli({"nonsense"}).code == 2);                     // unknown command
    CHECK(run_cli({}).code == 2);                               // no subcommand
    CHECK(run_cli({"plan", "--width", "394", "--height", "390",
                   "--method", "cubist"}).code == 2);           // bad enum value

    // Well-formed flags with bad semantic values are input errors.
    CHECK(run_cli({"plan", "--width", "0", "--height", "390"}).code == 1);
    CHECK(run_cli({"plan", "--width", "394", "--height", "390",
                   "--alpha", "1.5"}).code == 1);
    CHECK(run_cli({"plan", "--width", "394", "--height", "390",
                   "--ratios", "0x3"}).code == 1);
    CHECK(run_cli({"compare", "--manifest", "/nonexistent.manifest"}).code == 1);
    CHECK(run_cli({"simulate", "encode", "--patches", "9",
                   "--cal", "/nonexistent.cal"}).code == 1);

    const CliResult usage = run_cli({"plan"});
    CHECK(usage.code == 2);
    CHECK(usage.err.find("usage error") != std::string::npos);
    CHECK(usage.out.empty());
}

TEST_CASE("help is printed to stdout with exit 0") {
    const CliResult top = run_cli({"--help"});
    CHECK(top.code == 0);
    CHECK(top.out.find("plan") != std::string::npos);
    CHECK(top.out.find("simulate") != std::string::npos);
    const CliResult sub = run_cli({"plan", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--width") != std::string::npos);
}

TEST_CASE("simulate encode/prefill/decode against the device table") {
    const CliResult enc = run_cli({"simulate", "encode", "--patches", "9",
                                   "--batch", "4", "--cal", kCal, "--format", "json"});
    REQUIRE(enc.code == 0);
    const json ej = json::parse(enc.out);
    CHECK(ej.at("makespan_ms") == 2060.0);
    CHECK(ej.at("hidden_latency_ms") == 200.0);
    CHECK(ej.at("events").size() == 6);

    const CliResult no_overlap =
        run_cli({"simulate", "encode", "--patches", "9", "--batch", "4",
                 "--no-overlap", "--cal", kCal, "--format", "json"});
    REQUIRE(no_overlap.code == 0);
    CHECK(json::parse(no_overlap.out).at("makespan_ms") == 2260.0);
    CHECK(json::parse(no_overlap.out).at("hidden_latency_ms") == 0.0);

    const CliResult pre = run_cli({"simulate", "prefill", "--tokens", "2048",
                                   "--chunk", "128", "--cal", kCal, "--format", "json"});
    REQUIRE(pre.code == 0);
    CHECK(json::parse(pre.out).at("events").size() == 16);

    const CliResult dec = run_cli({"simulate", "decode", "--tokens", "4",
                                   "--cal", kCal, "--format", "json"});
    REQUIRE(dec.code == 0);
    CHECK(json::parse(dec.out).at("throughput_tokens_per_s").get<double>() ==
          doctest::Approx(24.402147).epsilon(1e-6));

    // KV overflow is an input error.
    CHECK(run_cli({"simulate", "prefill", "--tokens", "4096", "--chunk", "128",
                   "--cal", kCal}).code == 1);
}

TEST_CASE("plan JSON feeds simulate timeline") {
    const CliResult plan = run_cli({"plan", "--width", "760", "--height", "1520",
                                    "--method", "llava-next", "--ratios", "4x4",
                                    "--format", "json"});
    REQUIRE(plan.code == 0);
    const std::string path = temp_path("plan.json");
    {
        std::ofstream f(path, std::ios::binary);
        f << plan.out;
    }

    const CliResult tl = run_cli({"simulate", "timeline", "--plan", path,
                                  "--tokens", "2048", "--chunk", "128",
                                  "--instr-ms", "350", "--batch", "4",
                                  "--cal", kCal, "--format", "json"});
    REQUIRE(tl.code == 0);
    const json j = json::parse(tl.out);
    CHECK(j.at("image_processing_span_ms") == 2530.0);
    CHECK(j.at("time_to_first_token_ms").get<double>() ==
          doctest::Approx(5271.0632).epsilon(1e-9));

    // The same scenario built inline (no plan file) must agree.
    const CliResult inline_tl =
        run_cli({"simulate", "timeline", "--width", "760", "--height", "1520",
                 "--method", "llava-next", "--ratios", "4x4", "--tokens", "2048",
                 "--chunk", "128", "--instr-ms", "350", "--batch", "4",
                 "--cal", kCal, "--format", "json"});
    REQUIRE(inline_tl.code == 0);
    CHECK(inline_tl.out == tl.out);

    std::remove(path.c_str());

    // Timeline without a plan source is an input error.
    CHECK(run_cli({"simulate", "timeline", "--tokens", "100", "--cal", kCal}).code == 1);
}

TEST_CASE("sweeps rank parameters and can plot") {
    const CliResult batch = run_cli({"sweep", "batch", "--patches", "9",
                                     "--cal", kCal, "--format", "json"});
    REQUIRE(batch.code == 0);
    const json bj = json::parse(batch.out);
    CHECK(bj.at("best_batch") == 4);
    CHECK(bj.at("ranking")[0].at("makespan_ms") == 2060.0);

    const CliResult chunk = run_cli({"sweep", "chunk", "--tokens", "2048",
                                     "--cal", kCal, "--format", "json"});
    REQUIRE(chunk.code == 0);
    const json cj = json::parse(chunk.out);
    CHECK(cj.at("best_chunk") == 128);

    const std::string svg_path = temp_path("sweep.svg");
    const CliResult svg = run_cli({"sweep", "chunk", "--tokens", "2048",
                                   "--cal", kCal, "--svg", svg_path});
    REQUIRE(svg.code == 0);
    std::ifstream f(svg_path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream buf;
    buf << f.rdbuf();
    CHECK(buf.str().find("<svg") != std::string::npos);
    CHECK(buf.str().find("</svg>") != std::string::npos);
    f.close();
    std::remove(svg_path.c_str());

    // Custom candidate lists flow through.
    const CliResult custom = run_cli({"sweep", "batch", "--patches", "9",
                                      "--candidates", "1,4", "--cal", kCal,
                                      "--format", "json"});
    REQUIRE(custom.code == 0);
    CHECK(json::parse(custom.out).at("ranking").size() == 2);
}

TEST_CASE("mem reports the breakdown with and without a config") {
    const CliResult dflt = run_cli({"mem", "--format", "json"});
    REQUIRE(dflt.code == 0);
    const json j = json::parse(dflt.out);
    CHECK(j.at("llm_weights_bytes") == 1350000000);
    CHECK(j.at("total_bytes") == 2215401920);
    CHECK(j.at("within_budget") == true);

    const CliResult cfg = run_cli({"mem", "--config", kDataDir + "/mem_d9300.cfg",
                                   "--format", "json"});
    REQUIRE(cfg.code == 0);
    CHECK(json::parse(cfg.out) == j); // the shipped file mirrors the defaults

    const CliResult human = run_cli({"mem"});
    CHECK(human.code == 0);
    CHECK(human.out.find("within budget") != std::string::npos);
}

TEST_CASE("compare digests a manifest in all three formats") {
    const std::string path = temp_path("tiny.manifest");
    {
        std::ofstream f(path, std::ios::binary);
        f << "near_square 394 390\ntall 380 393\nstrip 380 76\nnote_only\n";
    }

    const CliResult human = run_cli({"compare", "--manifest", path});
    REQUIRE(human.code == 0);
    CHECK(human.out.find("entries: 3") != std::string::npos);
    CHECK(human.out.find("vs llava-next: smaller=2") != std::string::npos);

    const CliResult as_json = run_cli({"compare", "--manifest", path,
                                       "--format", "json"});
    REQUIRE(as_json.code == 0);
    const json j = json::parse(as_json.out);
    CHECK(j.at("entry_count") == 3);
    CHECK(j.at("vs_internvl").at("smaller") == 1);
    CHECK(j.at("rows").size() == 3);

    const CliResult no_rows = run_cli({"compare", "--manifest", path, "--no-rows",
                                       "--format", "json"});
    REQUIRE(no_rows.code == 0);
    CHECK_FALSE(json::parse(no_rows.out).contains("rows"));

    const CliResult as_csv = run_cli({"compare", "--manifest", path,
                                      "--format", "csv"});
    REQUIRE(as_csv.code == 0);
    CHECK(as_csv.out.find("baseline,smaller,equal,larger") == 0);

    // --out redirects the report to a file.
    const std::string report_path = temp_path("report.json");
    const CliResult to_file = run_cli({"compare", "--manifest", path, "--format",
                                       "json", "--out", report_path});
    REQUIRE(to_file.code == 0);
    CHECK(to_file.out.find(report_path) != std::string::npos);
    std::ifstream f(report_path, std::ios::binary);
    REQUIRE(f.good());
    json from_file;
    f >> from_file;
    CHECK(from_file.at("entry_count") == 3);
    f.close();
    std::remove(report_path.c_str());
    std::remove(path.c_str());
}

TEST_CASE("compare lenient mode reports skipped lines") {
    const std::string path = temp_path("broken.manifest");
    {
        std::ofstream f(path, std::ios::binary);
        f << "good 100 100\nbad 12\n";
    }
    CHECK(run_cli({"compare", "--manifest", path}).code == 1); // strict
    const CliResult lenient = run_cli({"compare", "--manifest", path, "--lenient"});
    CHECK(lenient.code == 0);
    CHECK(lenient.out.find("entries: 1") != std::string::npos);
    CHECK(lenient.out.find("warning") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("downsample checks itself against the reference route") {
    const CliResult r = run_cli({"downsample", "--rows", "27", "--cols", "27",
                                 "--dim", "8", "--seed", "7", "--format", "json"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("output").at("rows") == 14);
    CHECK(j.at("output").at("cols") == 14);
    CHECK(j.at("oracle_match") == true);
    CHECK(j.at("checksum").get<std::string>().size() == 16);

    // Same seed, same checksum; different seed, different checksum.
    const CliResult again = run_cli({"downsample", "--rows", "27", "--cols", "27",
                                     "--dim", "8", "--seed", "7", "--format", "json"});
    CHECK(json::parse(again.out).at("checksum") == j.at("checksum"));
    const CliResult other = run_cli({"downsample", "--rows", "27", "--cols", "27",
                                     "--dim", "8", "--seed", "8", "--format", "json"});
    CHECK(json::parse(other.out).at("checksum") != j.at("checksum"));
}

TEST_CASE("the installed binary behaves like the in-process entry point") {
    const char* exe = std::getenv("DYNRES_CLI");
    if (exe == nullptr) {
        MESSAGE("DYNRES_CLI not set; skipping the subprocess smoke test");
        return;
    }
    const std::string cmd = std::string(exe) +
                            " plan --width 394 --height 390 --format json 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string captured;
    char buf[512];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) {
        captured.append(buf, n);
    }
    const int status = pclose(pipe);
    CHECK(status == 0);
    const CliResult in_process = run_cli({"plan", "--width", "394", "--height", "390",
                                          "--format", "json"});
    CHECK(captured == in_process.out);
}
