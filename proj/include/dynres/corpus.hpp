#pragma once

#include "dynres/matchers.hpp"

#include <json.hpp>

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace dynres {

struct ManifestEntry {
    std::string id;
    ImageSize size;
};

struct ManifestWarning {
    int line = 0;
    std::string message;
};

// Image-size manifest.
//
// Grammar (UTF-8, line-oriented):
//   line      := blank | comment | record
//   comment   := '#' anything
//   record    := id [width height]
//   id        := token without whitespace, unique within the file
// A record without dimensions marks a text-only entry: it is counted and
// otherwise skipped. In strict mode malformed lines abort the parse; in
// lenient mode they are collected as warnings.
struct Manifest {
    std::vector<ManifestEntry> entries;
    std::string source;
    std::int64_t text_only_count = 0;
    std::vector<ManifestWarning> warnings;
};

enum class ManifestMode { strict, lenient };

struct ManifestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Manifest load_manifest(const std::string& path,
                       ManifestMode mode = ManifestMode::strict);
Manifest parse_manifest(std::istream& in, std::string source,
                        ManifestMode mode = ManifestMode::strict);

// Matcher configuration for a comparison run: one shared pool for the
// relaxed and classic matchers, plus the aspect-distance matcher's limit.
struct CompareConfig {
    CandidateSet pool = CandidateSet::grid_up_to(3, 3);
    double alpha = 0.1;
    int internvl_max_num = 9;
};

struct BucketCounts {
    std::int64_t smaller = 0;
    std::int64_t equal = 0;
    std::int64_t larger = 0;
    std::int64_t total() const { return smaller + equal + larger; }
};

struct EntryResult {
    std::string id;
    ImageSize size;
    GridRatio relaxed;
    GridRatio llava_next;
    GridRatio internvl;
};

// Aggregate comparison of grid cell counts (m*n) selected by the relaxed
// matcher versus each baseline, plus per-method selection histograms keyed
// "mxn" and the per-entry rows behind them.
struct ComparisonReport {
    std::int64_t entry_count = 0;
    std::int64_t text_only_skipped = 0;
    BucketCounts vs_llava_next; // relaxed cell count vs the classic matcher
    BucketCounts vs_internvl;
    std::map<std::string, std::int64_t> histogram_relaxed;
    std::map<std::string, std::int64_t> histogram_llava_next;
    std::map<std::string, std::int64_t> histogram_internvl;
    std::vector<EntryResult> rows;
    // Monitored, not asserted: how often the relaxed matcher picks a grid
    // with strictly more cells than the classic matcher.
    double larger_than_llava_fraction = 0.0;
};

// Runs all three matchers on every entry, sequentially and deterministically.
// Matcher failures are rethrown annotated with the entry id.
ComparisonReport compare_methods(const Manifest& manifest,
                                 const CompareConfig& config = {});

// `include_rows` controls the per-entry detail; aggregates are always
// present, together with published reference tallies from the LLaVA 665k
// corpus for context (not reproducible from synthetic manifests).
nlohmann::json to_json(const ComparisonReport& report, bool include_rows = true);
std::string to_csv(const ComparisonReport& report);

} // namespace dynres
