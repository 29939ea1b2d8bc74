#include "dynres/cli.hpp"

#include "dynres/corpus.hpp"
#include "dynres/downsampler.hpp"
#include "dynres/matchers.hpp"
#include "dynres/mem_model.hpp"
#include "dynres/patch_planner.hpp"
#include "dynres/sched_sim.hpp"
#include "dynres/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace dynres::cli {

namespace {

using nlohmann::json;

std::string fmt_ms(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string grid_str(GridRatio g) {
    return std::to_string(g.m) + ":" + std::to_string(g.n);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content)) {
        throw std::invalid_argument("cannot write " + path);
    }
}

// 64-bit FNV-1a over the raw bit patterns of the grid's features.
std::uint64_t grid_checksum(const TokenGrid& grid) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (double v : grid.data) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            hash ^= (bits >> (8 * i)) & 0xff;
            hash *= 0x100000001b3ull;
        }
    }
    return hash;
}

// --- shared option bundles -------------------------------------------------

GridRatio parse_ratios(const std::string& text) {
    int m = 0, n = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%dx%d%c", &m, &n, &extra) != 2 || m < 1 || n < 1) {
        throw std::invalid_argument("--ratios wants AxB with positive integers, got \"" +
                                    text + "\"");
    }
    return {m, n};
}

enum class Method { relaxed, llava_next, internvl };

struct PlanArgs {
    std::int64_t width = 0;
    std::int64_t height = 0;
    std::string method = "relaxed";
    double alpha = 0.1;
    std::string ratios = "3x3";
    int max_num = 0; // 0 = not set
    std::int64_t cell_side = 384;
    std::string resize; // "", "fit_and_pad", "stretch"
    bool no_thumbnail = false;

    Method parsed_method() const {
        if (method == "relaxed") return Method::relaxed;
        if (method == "llava-next") return Method::llava_next;
        return Method::internvl;
    }
};

void add_plan_options(CLI::App* cmd, PlanArgs& args, bool require_size = true) {
    auto* w = cmd->add_option("--width", args.width, "image width in pixels");
    auto* h = cmd->add_option("--height", args.height, "image height in pixels");
    if (require_size) {
        w->required();
        h->required();
    }
    cmd->add_option("--method", args.method, "matcher to run")
        ->check(CLI::IsMember({"relaxed", "llava-next", "internvl"}))
        ->capture_default_str();
    cmd->add_option("--alpha", args.alpha, "relaxed matcher threshold in [0,1)")
        ->capture_default_str();
    cmd->add_option("--ratios", args.ratios,
                    "candidate pool: all grids 1:1..AxB")
        ->capture_default_str();
    cmd->add_option("--max-num", args.max_num,
                    "candidate pool: all grids with m*n <= K (overrides --ratios; "
                    "default pool for internvl is K=6)");
    cmd->add_option("--cell", args.cell_side, "base cell side in pixels")
        ->capture_default_str();
    cmd->add_option("--resize", args.resize,
                    "resize policy (default: fit_and_pad, stretch for internvl)")
        ->check(CLI::IsMember({"fit_and_pad", "stretch"}));
    cmd->add_flag("--no-thumbnail", args.no_thumbnail, "omit the global patch");
}

struct PlanOutcome {
    MatchTrace trace;
    ResolutionPlan plan;
    TokenBudget tokens;
};

PlanOutcome run_matcher(const PlanArgs& args) {
    const ImageSize image{args.width, args.height};
    const BaseCell cell{args.cell_side};
    const Method method = args.parsed_method();

    MatchTrace trace;
    if (method == Method::internvl) {
        trace = match_internvl(image, args.max_num > 0 ? args.max_num : 6, cell);
    } else {
        const CandidateSet pool =
            args.max_num > 0
                ? CandidateSet::max_num(args.max_num, cell)
                : [&] {
                      const GridRatio limits = parse_ratios(args.ratios);
                      return CandidateSet::grid_up_to(limits.m, limits.n, cell);
                  }();
        trace = method == Method::relaxed
                    ? match_relaxed(image, pool, {args.alpha, ScanOrder::descending})
                    : match_llava_next(image, pool);
    }

    ResizeMode mode = method == Method::internvl ? ResizeMode::stretch
                                                 : ResizeMode::fit_and_pad;
    if (args.resize == "fit_and_pad") mode = ResizeMode::fit_and_pad;
    if (args.resize == "stretch") mode = ResizeMode::stretch;

    PlanOutcome outcome;
    outcome.trace = std::move(trace);
    outcome.plan = build_plan(image, outcome.trace.selected, cell, mode,
                              !args.no_thumbnail);
    outcome.tokens =
        token_budget(outcome.trace.selected, {729, 196, !args.no_thumbnail});
    return outcome;
}

const char* method_name(MatchMethod m) {
    switch (m) {
    case MatchMethod::relaxed: return "relaxed";
    case MatchMethod::llava_next: return "llava-next";
    case MatchMethod::internvl: return "internvl";
    }
    return "?";
}

const char* rule_name(AcceptRule rule) {
    switch (rule) {
    case AcceptRule::cond_improve: return "cond_improve";
    case AcceptRule::cond_near_tie: return "cond_near_tie";
    case AcceptRule::none: return "none";
    }
    return "?";
}

json trace_json(const MatchTrace& trace) {
    json steps = json::array();
    for (const MatchStep& s : trace.steps) {
        json step{
            {"grid", {{"m", s.grid.m}, {"n", s.grid.n}}},
            {"effective_area", s.fit.effective_area},
            {"wasted_area", s.fit.wasted_area},
            {"scale", s.fit.scale},
            {"scaled_width", s.fit.scaled_width},
            {"scaled_height", s.fit.scaled_height},
            {"aspect_diff", s.aspect_diff},
            {"accepted", s.accepted},
            {"rule_fired", rule_name(s.rule_fired)},
            {"best_effective", s.best_effective},
        };
        step["best_wasted"] = s.best_wasted ? json(*s.best_wasted) : json();
        steps.push_back(std::move(step));
    }
    json j{
        {"method", method_name(trace.method)},
        {"image", {{"width", trace.image.width}, {"height", trace.image.height}}},
        {"cell_side", trace.cell.side},
        {"order",
         trace.order == ScanOrder::descending ? "descending" : "ascending"},
        {"steps", std::move(steps)},
        {"selected", {{"m", trace.selected.m}, {"n", trace.selected.n}}},
        {"fallback_used", trace.fallback_used},
    };
    if (trace.method == MatchMethod::relaxed) j["alpha"] = trace.alpha;
    if (trace.method == MatchMethod::internvl) j["max_num"] = trace.max_num;
    return j;
}

void print_trace_human(std::ostream& out, const MatchTrace& trace) {
    out << "trace:\n";
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const MatchStep& s = trace.steps[i];
        out << "  " << i << ": " << grid_str(s.grid)
            << " effective=" << s.fit.effective_area
            << " wasted=" << s.fit.wasted_area;
        if (s.accepted) {
            out << " accepted(" << rule_name(s.rule_fired) << ")";
        } else {
            out << " rejected";
        }
        out << " best=(" << s.best_effective << ","
            << (s.best_wasted ? std::to_string(*s.best_wasted) : "inf") << ")\n";
    }
    if (trace.fallback_used) {
        out << "  no candidate accepted; min-waste fallback applied\n";
    }
}

// --- calibration loading ----------------------------------------------------

CostModel load_costs(const std::string& cal_path) {
    if (cal_path.empty()) {
        throw std::invalid_argument(
            "no calibration file (pass --cal or set DYNRES_CAL)");
    }
    return CostModel::from_config(KeyValueConfig::parse_file(cal_path));
}

void print_schedule_human(std::ostream& out, const Schedule& s) {
    out << "events:\n";
    for (const ScheduleEvent& e : s.events) {
        const char* res = e.resource == Resource::cpu   ? "cpu"
                          : e.resource == Resource::npu ? "npu"
                                                        : "user";
        out << "  " << e.stage << " [" << res << "] " << fmt_ms(e.start_ms) << " -> "
            << fmt_ms(e.end_ms) << " ms\n";
    }
    out << "makespan: " << fmt_ms(s.makespan_ms) << " ms\n";
    out << "hidden latency: " << fmt_ms(s.hidden_latency_ms) << " ms\n";
    if (s.throughput_tokens_per_s) {
        out << "decode throughput: " << fmt_g(*s.throughput_tokens_per_s)
            << " tokens/s\n";
    }
    if (s.time_to_first_token_ms) {
        out << "time to first token: " << fmt_ms(*s.time_to_first_token_ms) << " ms\n";
    }
    if (s.image_processing_span_ms) {
        out << "image processing span: " << fmt_ms(*s.image_processing_span_ms)
            << " ms\n";
    }
}

void emit_schedule(std::ostream& out, const Schedule& s, const std::string& format,
                   const std::string& svg_path, const std::string& title) {
    if (format == "json") {
        out << to_json(s).dump(2) << "\n";
    } else if (format == "csv") {
        out << to_csv(s);
    } else {
        print_schedule_human(out, s);
    }
    if (!svg_path.empty()) {
        write_file(svg_path, svg::gantt(title, s));
    }
}

// --- subcommand handlers -----------------------------------------------------

int cmd_plan(std::ostream& out, const PlanArgs& args, const std::string& format,
             bool with_trace) {
    const PlanOutcome outcome = run_matcher(args);
    const MatchTrace& trace = outcome.trace;

    if (format == "json") {
        json j{
            {"method", method_name(trace.method)},
            {"selected", {{"m", trace.selected.m}, {"n", trace.selected.n}}},
            {"plan", to_json(outcome.plan)},
            {"tokens", to_json(outcome.tokens)},
        };
        if (trace.method == MatchMethod::relaxed) j["alpha"] = trace.alpha;
        if (trace.method == MatchMethod::internvl) j["max_num"] = trace.max_num;
        if (with_trace) j["trace"] = trace_json(trace);
        out << j.dump(2) << "\n";
        return exit_ok;
    }

    out << "method: " << method_name(trace.method);
    if (trace.method == MatchMethod::relaxed) out << " (alpha=" << fmt_g(trace.alpha) << ")";
    if (trace.method == MatchMethod::internvl) out << " (max_num=" << trace.max_num << ")";
    out << "\n";
    out << "selected: " << grid_str(trace.selected) << " -> target "
        << outcome.plan.target.width << "x" << outcome.plan.target.height << "\n";
    const ResolutionPlan& plan = outcome.plan;
    out << "resize: "
        << (plan.resize_mode == ResizeMode::fit_and_pad ? "fit_and_pad" : "stretch")
        << " scale=" << fmt_g(plan.scale) << " resized=" << plan.resized.width << "x"
        << plan.resized.height << " pad(l=" << plan.pad.left << ",t=" << plan.pad.top
        << ",r=" << plan.pad.right << ",b=" << plan.pad.bottom << ")\n";
    out << "patches: " << plan.local_patches.size() << " local"
        << (plan.thumbnail ? " + thumbnail" : "") << "\n";
    out << "tokens: patches=" << outcome.tokens.patch_count
        << " raw=" << outcome.tokens.total_raw
        << " downsampled=" << outcome.tokens.total_downsampled << "\n";
    if (with_trace) print_trace_human(out, trace);
    return exit_ok;
}

struct CompareArgs {
    std::string manifest_path;
    double alpha = 0.1;
    std::string ratios = "3x3";
    int max_num = 9;
    std::int64_t cell_side = 384;
    bool lenient = false;
    bool no_rows = false;
    std::string out_path;
    std::string svg_path;
};

int cmd_compare(std::ostream& out, const CompareArgs& args, const std::string& format) {
    const Manifest manifest = load_manifest(
        args.manifest_path, args.lenient ? ManifestMode::lenient : ManifestMode::strict);

    CompareConfig config;
    const GridRatio limits = parse_ratios(args.ratios);
    config.pool = CandidateSet::grid_up_to(limits.m, limits.n, BaseCell{args.cell_side});
    config.alpha = args.alpha;
    config.internvl_max_num = args.max_num;
    const ComparisonReport report = compare_methods(manifest, config);

    std::string rendered;
    if (format == "json") {
        rendered = to_json(report, !args.no_rows).dump(2) + "\n";
    } else if (format == "csv") {
        rendered = to_csv(report);
    } else {
        std::ostringstream human;
        human << "entries: " << report.entry_count
              << " (text-only skipped: " << report.text_only_skipped << ")\n";
        for (const ManifestWarning& w : manifest.warnings) {
            human << "warning: line " << w.line << ": " << w.message << "\n";
        }
        human << "vs llava-next: smaller=" << report.vs_llava_next.smaller
              << " equal=" << report.vs_llava_next.equal
              << " larger=" << report.vs_llava_next.larger << "\n";
        human << "vs internvl:   smaller=" << report.vs_internvl.smaller
              << " equal=" << report.vs_internvl.equal
              << " larger=" << report.vs_internvl.larger << "\n";
        human << "larger-than-llava fraction: " << fmt_g(report.larger_than_llava_fraction)
              << "\n";
        human << "reference (llava_665k): vs llava-next smaller=29000; "
                 "vs internvl smaller=523000 larger=25000\n";
        rendered = human.str();
    }

    if (!args.out_path.empty()) {
        write_file(args.out_path, rendered);
        out << "report written to " << args.out_path << "\n";
    } else {
        out << rendered;
    }

    if (!args.svg_path.empty()) {
        std::vector<std::pair<std::string, double>> bars;
        for (const auto& [key, count] : report.histogram_relaxed) {
            bars.emplace_back(key, double(count));
        }
        write_file(args.svg_path,
                   svg::bar_chart("selected grids, relaxed matcher (simulated corpus)",
                                  "entries", bars));
    }
    return exit_ok;
}

struct TimelineArgs {
    PlanArgs plan;
    std::string plan_path;
    double instr_ms = 0.0;
    std::int64_t tokens = 0;
    std::int64_t chunk = 128;
    std::int64_t output_tokens = 1;
    int batch = 4;
    bool no_overlap = false;
};

ResolutionPlan timeline_plan(const TimelineArgs& args) {
    if (!args.plan_path.empty()) {
        std::ifstream in(args.plan_path, std::ios::binary);
        if (!in) {
            throw std::invalid_argument(args.plan_path + ": cannot open file");
        }
        json j = json::parse(in);
        // Accept both a bare plan object and the `plan` envelope emitted by
        // `plan --format json`.
        return plan_from_json(j.contains("plan") ? j.at("plan") : j);
    }
    if (args.plan.width <= 0 || args.plan.height <= 0) {
        throw std::invalid_argument("timeline needs --plan FILE or --width/--height");
    }
    return run_matcher(args.plan).plan;
}

int cmd_timeline(std::ostream& out, const TimelineArgs& args, const CostModel& costs,
                 const std::string& format, const std::string& svg_path) {
    const ResolutionPlan plan = timeline_plan(args);
    TimelineScenario scenario;
    scenario.instruction_entry_ms = args.instr_ms;
    scenario.input_tokens = args.tokens;
    scenario.chunk_size = args.chunk;
    scenario.output_tokens = args.output_tokens;
    scenario.encode_batch_size = args.batch;
    scenario.pipeline_overlap = !args.no_overlap;

    const Schedule s = simulate_timeline(plan, scenario, costs);
    emit_schedule(out, s, format, svg_path, "end-to-end timeline (simulated)");
    return exit_ok;
}

int cmd_sweep_batch(std::ostream& out, std::int64_t patches,
                    const std::vector<int>& candidates, bool no_overlap,
                    const CostModel& costs, const std::string& format,
                    const std::string& svg_path) {
    const auto ranked = sweep_batch_size(patches, candidates, costs, !no_overlap);
    if (format == "json") {
        json rows = json::array();
        for (const auto& [batch, ms] : ranked) {
            rows.push_back({{"batch", batch}, {"makespan_ms", ms}});
        }
        out << json{{"ranking", rows}, {"best_batch", ranked.front().first}}.dump(2)
            << "\n";
    } else if (format == "csv") {
        out << "batch,makespan_ms\n";
        for (const auto& [batch, ms] : ranked) {
            out << batch << "," << fmt_ms(ms) << "\n";
        }
    } else {
        out << "batch  makespan_ms\n";
        for (const auto& [batch, ms] : ranked) {
            out << batch << "      " << fmt_ms(ms) << "\n";
        }
        out << "best: " << ranked.front().first << "\n";
    }
    if (!svg_path.empty()) {
        std::vector<std::pair<std::string, double>> bars;
        for (const auto& [batch, ms] : ranked) {
            bars.emplace_back(std::to_string(batch), ms);
        }
        std::sort(bars.begin(), bars.end(), [](const auto& a, const auto& b) {
            return std::stoi(a.first) < std::stoi(b.first);
        });
        write_file(svg_path, svg::bar_chart("encode makespan by batch size (simulated)",
                                            "makespan (ms)", bars));
    }
    return exit_ok;
}

int cmd_sweep_chunk(std::ostream& out, std::int64_t tokens,
                    const std::vector<std::int64_t>& candidates, const CostModel& costs,
                    const std::string& format, const std::string& svg_path) {
    const auto ranked = sweep_chunk_size(tokens, candidates, costs);
    if (format == "json") {
        json rows = json::array();
        for (const auto& [chunk, ms] : ranked) {
            rows.push_back({{"chunk", chunk}, {"makespan_ms", ms}});
        }
        out << json{{"ranking", rows}, {"best_chunk", ranked.front().first}}.dump(2)
            << "\n";
    } else if (format == "csv") {
        out << "chunk,makespan_ms\n";
        for (const auto& [chunk, ms] : ranked) {
            out << chunk << "," << fmt_ms(ms) << "\n";
        }
    } else {
        out << "chunk  makespan_ms\n";
        for (const auto& [chunk, ms] : ranked) {
            out << chunk << "      " << fmt_ms(ms) << "\n";
        }
        out << "best: " << ranked.front().first << "\n";
    }
    if (!svg_path.empty()) {
        std::vector<std::pair<std::string, double>> bars;
        for (const auto& [chunk, ms] : ranked) {
            bars.emplace_back(std::to_string(chunk), ms);
        }
        std::sort(bars.begin(), bars.end(), [](const auto& a, const auto& b) {
            return std::stoll(a.first) < std::stoll(b.first);
        });
        write_file(svg_path, svg::bar_chart("prefill makespan by chunk size (simulated)",
                                            "makespan (ms)", bars));
    }
    return exit_ok;
}

int cmd_mem(std::ostream& out, const std::string& config_path,
            const std::string& format) {
    MemorySpec spec;
    if (!config_path.empty()) {
        spec = MemorySpec::from_config(KeyValueConfig::parse_file(config_path));
    }
    const MemoryBreakdown b = estimate_peak(spec);
    if (format == "json") {
        out << to_json(b).dump(2) << "\n";
        return exit_ok;
    }
    out << "llm weights:        " << b.llm_weights_bytes << " B\n";
    out << "vit weights:        " << b.vit_weights_bytes << " B\n";
    out << "projector weights:  " << b.projector_weights_bytes << " B\n";
    out << "weights total:      " << b.weights_total_bytes << " B\n";
    out << "kv cache:           " << b.kv_cache_bytes << " B\n";
    out << "workspace:          " << b.workspace_bytes << " B\n";
    out << "total (peak):       " << b.total_bytes << " B\n";
    out << "total (vit freed):  " << b.total_after_vit_free_bytes << " B\n";
    out << "budget:             " << b.budget_bytes << " B -> "
        << (b.within_budget ? "within budget" : "OVER BUDGET") << "\n";
    return exit_ok;
}

int cmd_downsample(std::ostream& out, std::int64_t rows, std::int64_t cols,
                   std::int64_t dim, std::int64_t out_dim, std::uint64_t seed,
                   const std::string& format) {
    const TokenGrid input = seeded_grid(rows, cols, dim, seed);
    const DownsampleSpec spec =
        DownsampleSpec::seeded(dim, out_dim > 0 ? out_dim : dim, seed ^ 0x9e3779b97f4a7c15ull);
    const TokenGrid produced = downsample(input, spec);
    const TokenGrid reference = downsample_reference(input, spec);

    double max_rel = 0.0;
    for (std::size_t i = 0; i < produced.data.size(); ++i) {
        const double a = produced.data[i];
        const double b = reference.data[i];
        const double mag = std::max(std::abs(a), std::abs(b));
        if (mag > 0.0) max_rel = std::max(max_rel, std::abs(a - b) / mag);
    }
    const bool match = produced.rows == reference.rows &&
                       produced.cols == reference.cols && max_rel <= 1e-12;

    char checksum[32];
    std::snprintf(checksum, sizeof checksum, "%016llx",
                  static_cast<unsigned long long>(grid_checksum(produced)));

    if (format == "json") {
        out << json{{"input", {{"rows", rows}, {"cols", cols}, {"dim", dim}}},
                    {"output",
                     {{"rows", produced.rows},
                      {"cols", produced.cols},
                      {"dim", produced.dim}}},
                    {"checksum", checksum},
                    {"max_relative_error", max_rel},
                    {"oracle_match", match}}
                   .dump(2)
            << "\n";
    } else {
        out << "input:  " << rows << "x" << cols << " dim " << dim << " (seed " << seed
            << ")\n";
        out << "output: " << produced.rows << "x" << produced.cols << " dim "
            << produced.dim << "\n";
        out << "checksum: " << checksum << "\n";
        out << "max relative error vs reference: " << fmt_g(max_rel) << "\n";
        out << "oracle: " << (match ? "match" : "MISMATCH") << "\n";
    }
    if (!match) {
        throw std::logic_error("downsample disagrees with the reference route");
    }
    return exit_ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dynamic-resolution planning and deployment simulation toolkit"};
    app.require_subcommand(1);
    // Let `--cal` and friends appear after the nested subcommand name
    // (`simulate encode --patches 9 --cal FILE`).
    app.fallthrough();

    // plan ---------------------------------------------------------------
    auto* plan_cmd = app.add_subcommand("plan", "select a grid and build the patch plan");
    PlanArgs plan_args;
    add_plan_options(plan_cmd, plan_args);
    std::string plan_format = "human";
    plan_cmd->add_option("--format", plan_format, "output format")
        ->check(CLI::IsMember({"human", "json"}));
    bool plan_trace = false;
    plan_cmd->add_flag("--trace", plan_trace, "include the full matcher trace");

    // compare ------------------------------------------------------------
    auto* compare_cmd =
        app.add_subcommand("compare", "run all matchers over a size manifest");
    CompareArgs compare_args;
    compare_cmd->add_option("--manifest", compare_args.manifest_path, "manifest file")
        ->required();
    compare_cmd->add_option("--alpha", compare_args.alpha, "relaxed matcher threshold")
        ->capture_default_str();
    compare_cmd->add_option("--ratios", compare_args.ratios, "shared candidate pool")
        ->capture_default_str();
    compare_cmd
        ->add_option("--max-num", compare_args.max_num,
                     "aspect-distance matcher pool limit")
        ->capture_default_str();
    compare_cmd->add_option("--cell", compare_args.cell_side, "base cell side")
        ->capture_default_str();
    compare_cmd->add_flag("--lenient", compare_args.lenient,
                          "skip malformed manifest lines with warnings");
    compare_cmd->add_flag("--no-rows", compare_args.no_rows,
                          "omit per-entry rows from json output");
    compare_cmd->add_option("--out", compare_args.out_path, "write the report here");
    compare_cmd->add_option("--svg", compare_args.svg_path,
                            "write a selection histogram SVG");
    std::string compare_format = "human";
    compare_cmd->add_option("--format", compare_format, "output format")
        ->check(CLI::IsMember({"human", "json", "csv"}));

    // simulate -----------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "run the deployment simulator");
    sim_cmd->require_subcommand(1);
    std::string cal_path;
    sim_cmd->add_option("--cal", cal_path, "calibration file")
        ->envname("DYNRES_CAL");

    auto* sim_encode = sim_cmd->add_subcommand("encode", "batched patch encoding");
    std::int64_t sim_patches = 0;
    int sim_batch = 4;
    bool sim_no_overlap = false;
    sim_encode->add_option("--patches", sim_patches, "patch count")->required();
    sim_encode->add_option("--batch", sim_batch, "batch size")->capture_default_str();
    sim_encode->add_flag("--no-overlap", sim_no_overlap, "serialize the two stages");
    std::string sim_encode_format = "human";
    sim_encode->add_option("--format", sim_encode_format, "output format")
        ->check(CLI::IsMember({"human", "json", "csv"}));
    std::string sim_encode_svg;
    sim_encode->add_option("--svg", sim_encode_svg, "write a Gantt SVG");

    auto* sim_prefill = sim_cmd->add_subcommand("prefill", "chunked prefill");
    std::int64_t sim_tokens = 0;
    std::int64_t sim_chunk = 128;
    sim_prefill->add_option("--tokens", sim_tokens, "input token count")->required();
    sim_prefill->add_option("--chunk", sim_chunk, "chunk size")->capture_default_str();
    std::string sim_prefill_format = "human";
    sim_prefill->add_option("--format", sim_prefill_format, "output format")
        ->check(CLI::IsMember({"human", "json", "csv"}));
    std::string sim_prefill_svg;
    sim_prefill->add_option("--svg", sim_prefill_svg, "write a Gantt SVG");

    auto* sim_decode = sim_cmd->add_subcommand("decode", "autoregressive decoding");
    std::int64_t sim_out_tokens = 0;
    sim_decode->add_option("--tokens", sim_out_tokens, "output token count")->required();
    std::string sim_decode_format = "human";
    sim_decode->add_option("--format", sim_decode_format, "output format")
        ->check(CLI::IsMember({"human", "json", "csv"}));
    std::string sim_decode_svg;
    sim_decode->add_option("--svg", sim_decode_svg, "write a Gantt SVG");

    auto* sim_timeline =
        sim_cmd->add_subcommand("timeline", "decoupled end-to-end timeline");
    TimelineArgs timeline_args;
    add_plan_options(sim_timeline, timeline_args.plan, /*require_size=*/false);
    sim_timeline->add_option("--plan", timeline_args.plan_path,
                             "plan JSON emitted by `plan --format json`");
    sim_timeline
        ->add_option("--instr-ms", timeline_args.instr_ms,
                     "instruction entry duration")
        ->capture_default_str();
    sim_timeline->add_option("--tokens", timeline_args.tokens, "input token count")
        ->required();
    sim_timeline->add_option("--chunk", timeline_args.chunk, "prefill chunk size")
        ->capture_default_str();
    sim_timeline
        ->add_option("--output-tokens", timeline_args.output_tokens,
                     "decode token count")
        ->capture_default_str();
    sim_timeline->add_option("--batch", timeline_args.batch, "encode batch size")
        ->capture_default_str();
    sim_timeline->add_flag("--no-overlap", timeline_args.no_overlap,
                           "serialize the encode stages");
    std::string sim_timeline_format = "human";
    sim_timeline->add_option("--format", sim_timeline_format, "output format")
        ->check(CLI::IsMember({"human", "json", "csv"}));
    std::string sim_timeline_svg;
    sim_timeline->add_option("--svg", sim_timeline_svg, "write a Gantt SVG");

    // sweep ----------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "rank scheduling parameters");
    sweep_cmd->require_subcommand(1);
    std::string sweep_cal;
    sweep_cmd->add_option("--cal", sweep_cal, "calibration file")->envname("DYNRES_CAL");

    auto* sweep_batch = sweep_cmd->add_subcommand("batch", "encode batch sizes");
    std::int64_t sweep_patches = 9;
    std::vector<int> sweep_batches{1, 2, 4, 6};
    bool sweep_no_overlap = false;
    sweep_batch->add_option("--patches", sweep_patches, "patch count")
        ->capture_default_str();
    sweep_batch->add_option("--candidates", sweep_batches, "batch sizes to rank")
        ->delimiter(',')
        ->capture_default_str();
    sweep_batch->add_flag("--no-overlap", sweep_no_overlap, "serialize the two stages");
    std::string sweep_batch_format = "human";
    sweep_batch->add_option("--format", sweep_batch_format, "output format")
        ->check(CLI::IsMember({"human", "json", "csv"}));
    std::string sweep_batch_svg;
    sweep_batch->add_option("--svg", sweep_batch_svg, "write a bar chart SVG");

    auto* sweep_chunk = sweep_cmd->add_subcommand("chunk", "prefill chunk sizes");
    std::int64_t sweep_tokens = 2048;
    std::vector<std::int64_t> sweep_chunks{32, 128, 512, 2048};
    sweep_chunk->add_option("--tokens", sweep_tokens, "input token count")
        ->capture_default_str();
    sweep_chunk->add_option("--candidates", sweep_chunks, "chunk sizes to rank")
        ->delimiter(',')
        ->capture_default_str();
    std::string sweep_chunk_format = "human";
    sweep_chunk->add_option("--format", sweep_chunk_format, "output format")
        ->check(CLI::IsMember({"human", "json", "csv"}));
    std::string sweep_chunk_svg;
    sweep_chunk->add_option("--svg", sweep_chunk_svg, "write a bar chart SVG");

    // mem -----------------------------------------------------------------
    auto* mem_cmd = app.add_subcommand("mem", "mixed-precision memory breakdown");
    std::string mem_config;
    mem_cmd->add_option("--config", mem_config, "memory config file (defaults apply)");
    std::string mem_format = "human";
    mem_cmd->add_option("--format", mem_format, "output format")
        ->check(CLI::IsMember({"human", "json"}));

    // downsample ------------------------------------------------------------
    auto* down_cmd =
        app.add_subcommand("downsample", "run the 2x2 token fusion against its oracle");
    std::int64_t down_rows = 27, down_cols = 27, down_dim = 8, down_out_dim = 0;
    std::uint64_t down_seed = 1;
    down_cmd->add_option("--rows", down_rows, "token rows")->capture_default_str();
    down_cmd->add_option("--cols", down_cols, "token cols")->capture_default_str();
    down_cmd->add_option("--dim", down_dim, "feature width")->capture_default_str();
    down_cmd->add_option("--out-dim", down_out_dim, "fused feature width (default: dim)");
    down_cmd->add_option("--seed", down_seed, "rng seed")->capture_default_str();
    std::string down_format = "human";
    down_cmd->add_option("--format", down_format, "output format")
        ->check(CLI::IsMember({"human", "json"}));

    // parse + dispatch ------------------------------------------------------
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "dynres: usage error: " << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (*plan_cmd) return cmd_plan(out, plan_args, plan_format, plan_trace);
        if (*compare_cmd) return cmd_compare(out, compare_args, compare_format);
        if (*sim_cmd) {
            const CostModel costs = load_costs(cal_path);
            if (*sim_encode) {
                const Schedule s = simulate_encode(
                    {sim_patches, sim_batch, !sim_no_overlap}, costs);
                emit_schedule(out, s, sim_encode_format, sim_encode_svg,
                              "batched patch encoding (simulated)");
                return exit_ok;
            }
            if (*sim_prefill) {
                const Schedule s = simulate_prefill(sim_tokens, sim_chunk, costs);
                emit_schedule(out, s, sim_prefill_format, sim_prefill_svg,
                              "chunked prefill (simulated)");
                return exit_ok;
            }
            if (*sim_decode) {
                const Schedule s = simulate_decode(sim_out_tokens, costs);
                emit_schedule(out, s, sim_decode_format, sim_decode_svg,
                              "decode (simulated)");
                return exit_ok;
            }
            if (*sim_timeline) {
                return cmd_timeline(out, timeline_args, costs, sim_timeline_format,
                                    sim_timeline_svg);
            }
        }
        if (*sweep_cmd) {
            const CostModel costs = load_costs(sweep_cal);
            if (*sweep_batch) {
                return cmd_sweep_batch(out, sweep_patches, sweep_batches,
                                       sweep_no_overlap, costs, sweep_batch_format,
                                       sweep_batch_svg);
            }
            return cmd_sweep_chunk(out, sweep_tokens, sweep_chunks, costs,
                                   sweep_chunk_format, sweep_chunk_svg);
        }
        if (*mem_cmd) return cmd_mem(out, mem_config, mem_format);
        if (*down_cmd) {
            return cmd_downsample(out, down_rows, down_cols, down_dim, down_out_dim,
                                  down_seed, down_format);
        }
        err << "dynres: usage error: no subcommand\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        err << "dynres: input error: " << e.what() << "\n";
        return exit_input;
    } catch (const ConfigError& e) {
        err << "dynres: input error: " << e.what() << "\n";
        return exit_input;
    } catch (const ManifestError& e) {
        err << "dynres: input error: " << e.what() << "\n";
        return exit_input;
    } catch (const nlohmann::json::exception& e) {
        err << "dynres: input error: " << e.what() << "\n";
        return exit_input;
    } catch (const std::exception& e) {
        err << "dynres: internal error: " << e.what() << "\n";
        return exit_internal;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(std::size_t(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace dynres::cli
