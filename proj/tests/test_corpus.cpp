#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynres/corpus.hpp"

#include <sstream>
#include <string>

using namespace dynres;

namespace {

Manifest parse(const char* text, ManifestMode mode = ManifestMode::strict) {
    std::istringstream in(text);
    return parse_manifest(in, "test.manifest", mode);
}

} // namespace

TEST_CASE("records, comments, and text-only lines") {
    const Manifest m = parse(
        "# corpus header\n"
        "img_a 394 390\n"
        "\n"
        "note_1\n"
        "img_b 380 76  # wide strip\n"
        "img_c 500 102\n");
    REQUIRE(m.entries.size() == 3);
    CHECK(m.entries[0].id == "img_a");
    CHECK(m.entries[0].size == ImageSize{394, 390});
    CHECK(m.entries[1].id == "img_b");
    CHECK(m.entries[1].size == ImageSize{380, 76});
    CHECK(m.entries[2].size == ImageSize{500, 102});
    CHECK(m.text_only_count == 1);
    CHECK(m.warnings.empty());
    CHECK(m.source == "test.manifest");
}

TEST_CASE("strict mode aborts on the first malformed record") {
    try {
        parse("good 100 100\nbad 100\n");
        FAIL("expected ManifestError");
    } catch (const ManifestError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("test.manifest:2:") == 0);
    }
    CHECK_THROWS_AS(parse("x 0 10\n"), ManifestError);      // zero dimension
    CHECK_THROWS_AS(parse("x -5 10\n"), ManifestError);     // negative
    CHECK_THROWS_AS(parse("x 10 ten\n"), ManifestError);    // non-numeric
    CHECK_THROWS_AS(parse("x 10 10 10\n"), ManifestError);  // too many fields
}

TEST_CASE("lenient mode collects warnings and keeps going") {
    const Manifest m = parse(
        "good_1 100 100\n"
        "bad 100\n"
        "good_2 200 150\n"
        "worse 1 2 3 4\n",
        ManifestMode::lenient);
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].id == "good_1");
    CHECK(m.entries[1].id == "good_2");
    REQUIRE(m.warnings.size() == 2);
    CHECK(m.warnings[0].line == 2);
    CHECK(m.warnings[0].message.find("bad") != std::string::npos);
    CHECK(m.warnings[1].line == 4);
}

TEST_CASE("duplicate ids are rejected in both modes") {
    CHECK_THROWS_AS(parse("a 1 1\na 2 2\n"), ManifestError);
    CHECK_THROWS_AS(parse("a 1 1\na 2 2\n", ManifestMode::lenient), ManifestError);
    // A text-only record also claims its id.
    CHECK_THROWS_AS(parse("a\na 2 2\n"), ManifestError);
}

TEST_CASE("an empty manifest yields a warning, not an error") {
    const Manifest m = parse("# nothing here\n\n");
    CHECK(m.entries.empty());
    CHECK(m.text_only_count == 0);
    REQUIRE(m.warnings.size() == 1);
    CHECK(m.warnings[0].message.find("no records") != std::string::npos);
}

TEST_CASE("missing manifest files are reported by path") {
    CHECK_THROWS_AS(load_manifest("/nonexistent/file.manifest"), ManifestError);
}

TEST_CASE("comparison runs all three matchers per entry") {
    const Manifest m = parse(
        "near_square 394 390\n"
        "tall 380 393\n"
        "strip 380 76\n"
        "banner 500 102\n"
        "skip_me\n");
    const ComparisonReport report = compare_methods(m);

    CHECK(report.entry_count == 4);
    CHECK(report.text_only_skipped == 1);
    REQUIRE(report.rows.size() == 4);

    // Pinned selections (defaults: shared 3x3 pool, alpha 0.1, max_num 9).
    CHECK(report.rows[0].relaxed == GridRatio{1, 1});
    CHECK(report.rows[0].llava_next == GridRatio{2, 2});
    CHECK(report.rows[0].internvl == GridRatio{1, 1});
    CHECK(report.rows[1].relaxed == GridRatio{1, 1});
    CHECK(report.rows[1].llava_next == GridRatio{1, 2});
    CHECK(report.rows[2].internvl == GridRatio{5, 1});
    CHECK(report.rows[3].relaxed == GridRatio{2, 1});
    CHECK(report.rows[3].internvl == GridRatio{5, 1});

    // Buckets: relaxed is smaller than the classic pick for the first two
    // entries and equal elsewhere; versus the aspect matcher it is smaller
    // for the two strips and equal for the rest.
    CHECK(report.vs_llava_next.smaller == 2);
    CHECK(report.vs_llava_next.equal == 2);
    CHECK(report.vs_llava_next.larger == 0);
    CHECK(report.vs_internvl.smaller == 2);
    CHECK(report.vs_internvl.equal == 2);
    CHECK(report.vs_internvl.larger == 0);
    CHECK(report.larger_than_llava_fraction == 0.0);

    CHECK(report.histogram_relaxed.at("1x1") == 3);
    CHECK(report.histogram_relaxed.at("2x1") == 1);
    CHECK(report.histogram_llava_next.at("2x2") == 1);
    CHECK(report.histogram_internvl.at("5x1") == 2);
}

TEST_CASE("bucket totals always conserve the entry count") {
    const Manifest m = parse(
        "a 100 100\nb 1000 200\nc 333 777\nd 4096 4096\ne 50 1200\n");
    const ComparisonReport report = compare_methods(m);
    CHECK(report.vs_llava_next.total() == report.entry_count);
    CHECK(report.vs_internvl.total() == report.entry_count);
    std::int64_t histogram_total = 0;
    for (const auto& [key, count] : report.histogram_relaxed) histogram_total += count;
    CHECK(histogram_total == report.entry_count);
}

TEST_CASE("an all-square corpus is all-equal across matchers") {
    const Manifest m = parse("a 384 384\nb 384 384 \nc 384 384\n");
    REQUIRE(m.entries.size() == 3);
    const ComparisonReport report = compare_methods(m);
    CHECK(report.vs_llava_next.equal == 3);
    CHECK(report.vs_internvl.equal == 3);
    CHECK(report.histogram_relaxed.at("1x1") == 3);
    CHECK(report.histogram_llava_next.at("1x1") == 3);
    CHECK(report.histogram_internvl.at("1x1") == 3);
}

TEST_CASE("entry order does not change the aggregates") {
    const Manifest fwd = parse("a 394 390\nb 380 76\nc 500 102\n");
    const Manifest rev = parse("c 500 102\nb 380 76\na 394 390\n");
    const ComparisonReport r1 = compare_methods(fwd);
    const ComparisonReport r2 = compare_methods(rev);
    CHECK(r1.vs_llava_next.smaller == r2.vs_llava_next.smaller);
    CHECK(r1.vs_internvl.smaller == r2.vs_internvl.smaller);
    CHECK(r1.histogram_relaxed == r2.histogram_relaxed);
    CHECK(r1.histogram_internvl == r2.histogram_internvl);
}

TEST_CASE("comparison respects the configured pool and limits") {
    const Manifest m = parse("strip 380 76\n");
    CompareConfig config;
    config.internvl_max_num = 6;
    const ComparisonReport report = compare_methods(m, config);
    CHECK(report.rows[0].internvl == GridRatio{5, 1});

    CompareConfig tiny;
    tiny.pool = CandidateSet::grid_up_to(1, 1);
    tiny.internvl_max_num = 1;
    const ComparisonReport forced = compare_methods(m, tiny);
    CHECK(forced.rows[0].relaxed == GridRatio{1, 1});
    CHECK(forced.rows[0].llava_next == GridRatio{1, 1});
    CHECK(forced.rows[0].internvl == GridRatio{1, 1});
}

TEST_CASE("matcher failures carry the entry id") {
    Manifest m = parse("fine 100 100\n");
    m.entries.push_back({"poison", {100, 100}});
    CompareConfig config;
    config.alpha = 2.0; // out of domain, detected inside the matcher
    try {
        compare_methods(m, config);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("fine") != std::string::npos);
    }
}

TEST_CASE("report JSON carries aggregates, histograms, and reference tallies") {
    const Manifest m = parse("a 394 390\nb 380 76\nnote\n");
    const nlohmann::json j = to_json(compare_methods(m));
    CHECK(j.at("entry_count") == 2);
    CHECK(j.at("text_only_skipped") == 1);
    CHECK(j.at("vs_llava_next").at("smaller") == 1);
    CHECK(j.at("histograms").at("relaxed").at("1x1") == 2);
    CHECK(j.at("reference_counts").at("corpus") == "llava_665k");
    CHECK(j.at("reference_counts").at("vs_llava_next").at("smaller") == 29000);
    CHECK(j.at("reference_counts").at("vs_internvl").at("smaller") == 523000);
    CHECK(j.at("reference_counts").at("vs_internvl").at("larger") == 25000);
    CHECK(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("id") == "a");
    CHECK(j.at("rows")[0].at("relaxed") == "1x1");
    CHECK(j.at("rows")[0].at("llava_next") == "2x2");

    const nlohmann::json no_rows = to_json(compare_methods(m), false);
    CHECK_FALSE(no_rows.contains("rows"));
}

TEST_CASE("report CSV has an aggregate block and per-entry rows") {
    const Manifest m = parse("a 394 390\nb 380 76\n");
    const std::string csv = to_csv(compare_methods(m));
    CHECK(csv.rfind("baseline,smaller,equal,larger\n", 0) == 0);
    CHECK(csv.find("llava_next,1,1,0\n") != std::string::npos);
    CHECK(csv.find("internvl,1,1,0\n") != std::string::npos);
    CHECK(csv.find("id,width,height,relaxed,llava_next,internvl\n") != std::string::npos);
    CHECK(csv.find("a,394,390,1x1,2x2,1x1\n") != std::string::npos);
    CHECK(csv.find("b,380,76,1x1,1x1,5x1\n") != std::string::npos);
}

TEST_CASE("the shipped 10k manifest parses strictly") {
    const Manifest m = load_manifest(std::string(DYNRES_DATA_DIR) + "/manifest_10k.txt");
    CHECK(m.entries.size() == 10000);
    CHECK(m.text_only_count == 40);
    CHECK(m.warnings.empty());
    // The pinned regression shapes are present by their well-known ids.
    bool saw_394 = false;
    for (const ManifestEntry& e : m.entries) {
        if (e.id == "case_394x390") {
            CHECK(e.size == ImageSize{394, 390});
            saw_394 = true;
        }
    }
    CHECK(saw_394);
}
