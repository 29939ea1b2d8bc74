#include "dynres/corpus.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace dynres {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

bool parse_positive(const std::string& token, std::int64_t& out) {
    const auto [end, ec] =
        std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && end == token.data() + token.size() && out > 0;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
    throw ManifestError(source + ":" + std::to_string(line) + ": " + what);
}

std::string grid_key(GridRatio g) {
    return std::to_string(g.m) + "x" + std::to_string(g.n);
}

} // namespace

Manifest parse_manifest(std::istream& in, std::string source, ManifestMode mode) {
    Manifest manifest;
    manifest.source = std::move(source);

    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        const std::vector<std::string> tokens = split_ws(line);
        if (tokens.empty()) continue;

        const std::string& id = tokens[0];
        if (!seen_ids.insert(id).second) {
            fail(manifest.source, line_no, "duplicate id \"" + id + "\"");
        }
        if (tokens.size() == 1) {
            ++manifest.text_only_count;
            continue;
        }

        std::int64_t width = 0;
        std::int64_t height = 0;
        const bool well_formed = tokens.size() == 3 &&
                                 parse_positive(tokens[1], width) &&
                                 parse_positive(tokens[2], height);
        if (!well_formed) {
            if (mode == ManifestMode::strict) {
                fail(manifest.source, line_no,
                     "expected `id [width height]` with positive dimensions");
            }
            manifest.warnings.push_back(
                {line_no, "skipped malformed record \"" + id + "\""});
            continue;
        }
        manifest.entries.push_back({id, {width, height}});
    }

    if (manifest.entries.empty() && manifest.text_only_count == 0) {
        manifest.warnings.push_back({0, "manifest has no records"});
    }
    return manifest;
}

Manifest load_manifest(const std::string& path, ManifestMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ManifestError(path + ": cannot open file");
    }
    return parse_manifest(in, path, mode);
}

ComparisonReport compare_methods(const Manifest& manifest, const CompareConfig& config) {
    ComparisonReport report;
    report.text_only_skipped = manifest.text_only_count;
    report.rows.reserve(manifest.entries.size());

    const RelaxedParams params{config.alpha, ScanOrder::descending};
    for (const ManifestEntry& entry : manifest.entries) {
        EntryResult row;
        row.id = entry.id;
        row.size = entry.size;
        try {
            row.relaxed = match_relaxed(entry.size, config.pool, params).selected;
            row.llava_next = match_llava_next(entry.size, config.pool).selected;
            row.internvl =
                match_internvl(entry.size, config.internvl_max_num, config.pool.cell)
                    .selected;
        } catch (const std::exception& e) {
            throw std::invalid_argument("entry \"" + entry.id + "\": " + e.what());
        }

        ++report.entry_count;
        ++report.histogram_relaxed[grid_key(row.relaxed)];
        ++report.histogram_llava_next[grid_key(row.llava_next)];
        ++report.histogram_internvl[grid_key(row.internvl)];

        const std::int64_t ours = row.relaxed.cells();
        if (ours < row.llava_next.cells()) {
            ++report.vs_llava_next.smaller;
        } else if (ours == row.llava_next.cells()) {
            ++report.vs_llava_next.equal;
        } else {
            ++report.vs_llava_next.larger;
        }
        if (ours < row.internvl.cells()) {
            ++report.vs_internvl.smaller;
        } else if (ours == row.internvl.cells()) {
            ++report.vs_internvl.equal;
        } else {
            ++report.vs_internvl.larger;
        }
        report.rows.push_back(std::move(row));
    }

    if (report.entry_count > 0) {
        report.larger_than_llava_fraction =
            double(report.vs_llava_next.larger) / double(report.entry_count);
    }
    return report;
}

namespace {

nlohmann::json buckets_json(const BucketCounts& b) {
    return {{"smaller", b.smaller}, {"equal", b.equal}, {"larger", b.larger}};
}

nlohmann::json histogram_json(const std::map<std::string, std::int64_t>& h) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, count] : h) j[key] = count;
    return j;
}

} // namespace

nlohmann::json to_json(const ComparisonReport& report, bool include_rows) {
    nlohmann::json j{
        {"entry_count", report.entry_count},
        {"text_only_skipped", report.text_only_skipped},
        {"vs_llava_next", buckets_json(report.vs_llava_next)},
        {"vs_internvl", buckets_json(report.vs_internvl)},
        {"histograms",
         {{"relaxed", histogram_json(report.histogram_relaxed)},
          {"llava_next", histogram_json(report.histogram_llava_next)},
          {"internvl", histogram_json(report.histogram_internvl)}}},
        {"larger_than_llava_fraction", report.larger_than_llava_fraction},
        // Published tallies from the LLaVA 665k corpus (665k entries, 41k
        // text-only skipped), for context only: synthetic manifests have a
        // different size distribution and cannot reproduce them.
        {"reference_counts",
         {{"corpus", "llava_665k"},
          {"vs_llava_next", {{"smaller", 29000}}},
          {"vs_internvl", {{"smaller", 523000}, {"larger", 25000}}}}},
    };
    if (include_rows) {
        auto& rows = j["rows"] = nlohmann::json::array();
        for (const EntryResult& row : report.rows) {
            rows.push_back({{"id", row.id},
                            {"width", row.size.width},
                            {"height", row.size.height},
                            {"relaxed", grid_key(row.relaxed)},
                            {"llava_next", grid_key(row.llava_next)},
                            {"internvl", grid_key(row.internvl)}});
        }
    }
    return j;
}

std::string to_csv(const ComparisonReport& report) {
    std::string csv;
    csv += "baseline,smaller,equal,larger\n";
    csv += "llava_next," + std::to_string(report.vs_llava_next.smaller) + "," +
           std::to_string(report.vs_llava_next.equal) + "," +
           std::to_string(report.vs_llava_next.larger) + "\n";
    csv += "internvl," + std::to_string(report.vs_internvl.smaller) + "," +
           std::to_string(report.vs_internvl.equal) + "," +
           std::to_string(report.vs_internvl.larger) + "\n";
    csv += "\nid,width,height,relaxed,llava_next,internvl\n";
    for (const EntryResult& row : report.rows) {
        csv += row.id + "," + std::to_string(row.size.width) + "," +
               std::to_string(row.size.height) + "," + grid_key(row.relaxed) + "," +
               grid_key(row.llava_next) + "," + grid_key(row.internvl) + "\n";
    }
    return csv;
}

} // namespace dynres
