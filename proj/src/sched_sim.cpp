#include "dynres/sched_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dynres {

namespace {

int parse_batch_key(const std::string& suffix, const std::string& source,
                    const std::string& table) {
    if (suffix.empty() ||
        suffix.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(source + ": bad batch size \"" + suffix + "\" in " + table);
    }
    const int size = std::stoi(suffix);
    if (size < 1) {
        throw ConfigError(source + ": batch size must be >= 1 in " + table);
    }
    return size;
}

std::map<int, double> load_batch_table(const KeyValueConfig& config,
                                       const std::string& prefix) {
    std::map<int, double> table;
    for (const auto& [suffix, value] : config.with_prefix(prefix)) {
        const int size = parse_batch_key(suffix, config.source(), prefix);
        if (value < 0.0) {
            throw ConfigError(config.source() + ": negative latency for " + prefix +
                              suffix);
        }
        table[size] = value;
    }
    if (table.empty()) {
        throw ConfigError(config.source() + ": no entries under " + prefix);
    }
    return table;
}

void require_non_negative(double value, const char* what) {
    if (value < 0.0) {
        throw ConfigError(std::string(what) + " must be non-negative");
    }
}

const char* resource_name(Resource r) {
    switch (r) {
    case Resource::cpu: return "cpu";
    case Resource::npu: return "npu";
    case Resource::user: return "user";
    }
    return "?";
}

// Sum of each CPU event's overlap with the union of NPU busy intervals.
double compute_hidden_latency(const std::vector<ScheduleEvent>& events) {
    std::vector<std::pair<double, double>> npu;
    for (const ScheduleEvent& e : events) {
        if (e.resource == Resource::npu && e.end_ms > e.start_ms) {
            npu.emplace_back(e.start_ms, e.end_ms);
        }
    }
    std::sort(npu.begin(), npu.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& iv : npu) {
        if (!merged.empty() && iv.first <= merged.back().second) {
            merged.back().second = std::max(merged.back().second, iv.second);
        } else {
            merged.push_back(iv);
        }
    }

    double hidden = 0.0;
    for (const ScheduleEvent& e : events) {
        if (e.resource != Resource::cpu) continue;
        for (const auto& [lo, hi] : merged) {
            const double a = std::max(e.start_ms, lo);
            const double b = std::min(e.end_ms, hi);
            if (b > a) hidden += b - a;
        }
    }
    return hidden;
}

// Sort events, derive makespan and hidden latency.
void finalize(Schedule& schedule) {
    std::stable_sort(schedule.events.begin(), schedule.events.end(),
                     [](const ScheduleEvent& a, const ScheduleEvent& b) {
                         return a.start_ms < b.start_ms;
                     });
    schedule.makespan_ms = 0.0;
    for (const ScheduleEvent& e : schedule.events) {
        schedule.makespan_ms = std::max(schedule.makespan_ms, e.end_ms);
    }
    schedule.hidden_latency_ms = compute_hidden_latency(schedule.events);
}

} // namespace

CostModel CostModel::from_config(const KeyValueConfig& config) {
    CostModel costs;
    costs.conv2d_per_batch = load_batch_table(config, "encode.conv2d_ms.batch.");
    costs.vit_per_batch = load_batch_table(config, "encode.vit_ms.batch.");
    costs.prefill_fixed_overhead_ms = config.number("prefill.fixed_overhead_ms");
    costs.prefill_per_token_ms = config.number("prefill.per_token_ms");
    costs.prefill_quadratic_ms = config.number("prefill.quadratic_ms_per_token2");
    costs.decode_per_token_ms = config.number("decode.per_token_ms");
    costs.model_load_ms = config.number("timeline.model_load_ms");
    costs.kv_capacity_tokens = config.integer("kv.capacity_tokens");

    require_non_negative(costs.prefill_fixed_overhead_ms, "prefill.fixed_overhead_ms");
    require_non_negative(costs.prefill_per_token_ms, "prefill.per_token_ms");
    require_non_negative(costs.prefill_quadratic_ms, "prefill.quadratic_ms_per_token2");
    require_non_negative(costs.decode_per_token_ms, "decode.per_token_ms");
    require_non_negative(costs.model_load_ms, "timeline.model_load_ms");
    if (costs.kv_capacity_tokens < 1) {
        throw ConfigError(config.source() + ": kv.capacity_tokens must be >= 1");
    }
    return costs;
}

double CostModel::prefill_chunk_ms(std::int64_t chunk_tokens) const {
    const double c = double(chunk_tokens);
    return prefill_fixed_overhead_ms + prefill_per_token_ms * c +
           prefill_quadratic_ms * c * c;
}

double CostModel::conv2d_ms(int group_size) const {
    const auto it = conv2d_per_batch.find(group_size);
    if (it == conv2d_per_batch.end()) {
        throw ConfigError("no conv2d cost entry for batch size " +
                          std::to_string(group_size));
    }
    return it->second;
}

double CostModel::vit_ms(int group_size) const {
    const auto it = vit_per_batch.find(group_size);
    if (it == vit_per_batch.end()) {
        throw ConfigError("no vit cost entry for batch size " +
                          std::to_string(group_size));
    }
    return it->second;
}

std::vector<int> batch_groups(std::int64_t patch_count, int batch_size) {
    if (patch_count < 1) {
        throw std::invalid_argument("patch count must be >= 1");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("batch size must be >= 1");
    }
    std::vector<int> groups(std::size_t(patch_count / batch_size), batch_size);
    if (const int rest = int(patch_count % batch_size); rest != 0) {
        groups.push_back(rest);
    }
    return groups;
}

Schedule simulate_encode(const EncodeScenario& scenario, const CostModel& costs) {
    const std::vector<int> groups =
        batch_groups(scenario.patch_count, scenario.batch_size);

    Schedule schedule;
    double cpu_free = 0.0;
    double npu_free = 0.0;
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const double conv = costs.conv2d_ms(groups[k]);
        const double vit = costs.vit_ms(groups[k]);
        // Without overlap, the CPU stage waits for the previous NPU stage.
        const double conv_start = scenario.pipeline_overlap ? cpu_free : npu_free;
        const double conv_end = conv_start + conv;
        const double vit_start = std::max(conv_end, npu_free);
        const double vit_end = vit_start + vit;
        cpu_free = conv_end;
        npu_free = vit_end;

        const std::string tag = "_group" + std::to_string(k);
        schedule.events.push_back({"conv2d" + tag, Resource::cpu, conv_start, conv_end});
        schedule.events.push_back({"vit" + tag, Resource::npu, vit_start, vit_end});
    }
    finalize(schedule);
    return schedule;
}

std::vector<std::pair<int, double>> sweep_batch_size(std::int64_t patch_count,
                                                     const std::vector<int>& candidates,
                                                     const CostModel& costs,
                                                     bool pipeline_overlap) {
    if (candidates.empty()) {
        throw std::invalid_argument("no candidate batch sizes");
    }
    std::vector<std::pair<int, double>> ranked;
    for (int batch : candidates) {
        const Schedule s =
            simulate_encode({patch_count, batch, pipeline_overlap}, costs);
        ranked.emplace_back(batch, s.makespan_ms);
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second < b.second;
                  return a.first < b.first;
              });
    return ranked;
}

Schedule simulate_prefill(std::int64_t input_tokens, std::int64_t chunk_size,
                          const CostModel& costs) {
    if (input_tokens < 1) {
        throw std::invalid_argument("input tokens must be >= 1");
    }
    if (chunk_size < 1) {
        throw std::invalid_argument("chunk size must be >= 1");
    }
    if (input_tokens > costs.kv_capacity_tokens) {
        throw std::invalid_argument("input of " + std::to_string(input_tokens) +
                                    " tokens exceeds KV capacity of " +
                                    std::to_string(costs.kv_capacity_tokens));
    }

    Schedule schedule;
    double t = 0.0;
    std::int64_t remaining = input_tokens;
    for (int i = 0; remaining > 0; ++i) {
        const std::int64_t tokens = std::min<std::int64_t>(chunk_size, remaining);
        const double end = t + costs.prefill_chunk_ms(tokens);
        schedule.events.push_back(
            {"prefill_chunk" + std::to_string(i), Resource::npu, t, end});
        t = end;
        remaining -= tokens;
    }
    finalize(schedule);
    return schedule;
}

std::vector<std::pair<std::int64_t, double>> sweep_chunk_size(
    std::int64_t input_tokens, const std::vector<std::int64_t>& candidates,
    const CostModel& costs) {
    if (candidates.empty()) {
        throw std::invalid_argument("no candidate chunk sizes");
    }
    std::vector<std::pair<std::int64_t, double>> ranked;
    for (std::int64_t chunk : candidates) {
        const Schedule s = simulate_prefill(input_tokens, chunk, costs);
        ranked.emplace_back(chunk, s.makespan_ms);
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second < b.second;
                  return a.first < b.first;
              });
    return ranked;
}

Schedule simulate_decode(std::int64_t output_tokens, const CostModel& costs) {
    if (output_tokens < 1) {
        throw std::invalid_argument("output tokens must be >= 1");
    }
    Schedule schedule;
    double t = 0.0;
    for (std::int64_t i = 0; i < output_tokens; ++i) {
        const double end = t + costs.decode_per_token_ms;
        schedule.events.push_back(
            {"decode_token" + std::to_string(i), Resource::npu, t, end});
        t = end;
    }
    finalize(schedule);
    if (costs.decode_per_token_ms > 0.0) {
        schedule.throughput_tokens_per_s = 1000.0 / costs.decode_per_token_ms;
    }
    return schedule;
}

Schedule simulate_timeline(const ResolutionPlan& plan, const TimelineScenario& scenario,
                           const CostModel& costs) {
    if (scenario.instruction_entry_ms < 0.0) {
        throw std::invalid_argument("instruction entry time must be non-negative");
    }
    const std::int64_t patches =
        std::int64_t(plan.local_patches.size()) + (plan.thumbnail ? 1 : 0);

    Schedule schedule;
    const double load_end = costs.model_load_ms;
    schedule.events.push_back({"model_load", Resource::cpu, 0.0, load_end});

    const Schedule encode = simulate_encode(
        {patches, scenario.encode_batch_size, scenario.pipeline_overlap}, costs);
    for (ScheduleEvent e : encode.events) {
        e.start_ms += load_end;
        e.end_ms += load_end;
        schedule.events.push_back(std::move(e));
    }
    const double encode_end = load_end + encode.makespan_ms;
    // The image encoder is no longer needed once its patches are through;
    // the release itself is treated as free.
    schedule.events.push_back({"vit_unload", Resource::npu, encode_end, encode_end});

    double instruction_end = load_end;
    if (scenario.instruction_entry_ms > 0.0) {
        instruction_end = load_end + scenario.instruction_entry_ms;
        schedule.events.push_back(
            {"instruction_entry", Resource::user, load_end, instruction_end});
    }

    const double prefill_start = std::max(encode_end, instruction_end);
    const Schedule prefill =
        simulate_prefill(scenario.input_tokens, scenario.chunk_size, costs);
    for (ScheduleEvent e : prefill.events) {
        e.start_ms += prefill_start;
        e.end_ms += prefill_start;
        schedule.events.push_back(std::move(e));
    }
    const double prefill_end = prefill_start + prefill.makespan_ms;

    const Schedule decode = simulate_decode(scenario.output_tokens, costs);
    double first_token_end = prefill_end;
    for (std::size_t i = 0; i < decode.events.size(); ++i) {
        ScheduleEvent e = decode.events[i];
        e.start_ms += prefill_end;
        e.end_ms += prefill_end;
        if (i == 0) first_token_end = e.end_ms;
        schedule.events.push_back(std::move(e));
    }

    finalize(schedule);
    schedule.throughput_tokens_per_s = decode.throughput_tokens_per_s;
    schedule.time_to_first_token_ms = first_token_end;
    schedule.image_processing_span_ms = encode_end;
    return schedule;
}

double resource_busy_ms(const Schedule& schedule, Resource resource) {
    double busy = 0.0;
    for (const ScheduleEvent& e : schedule.events) {
        if (e.resource == resource) busy += e.end_ms - e.start_ms;
    }
    return busy;
}

nlohmann::json to_json(const Schedule& schedule) {
    nlohmann::json j;
    auto& events = j["events"] = nlohmann::json::array();
    for (const ScheduleEvent& e : schedule.events) {
        events.push_back({{"stage", e.stage},
                          {"resource", resource_name(e.resource)},
                          {"start_ms", e.start_ms},
                          {"end_ms", e.end_ms}});
    }
    j["makespan_ms"] = schedule.makespan_ms;
    j["hidden_latency_ms"] = schedule.hidden_latency_ms;
    if (schedule.throughput_tokens_per_s) {
        j["throughput_tokens_per_s"] = *schedule.throughput_tokens_per_s;
    }
    if (schedule.time_to_first_token_ms) {
        j["time_to_first_token_ms"] = *schedule.time_to_first_token_ms;
    }
    if (schedule.image_processing_span_ms) {
        j["image_processing_span_ms"] = *schedule.image_processing_span_ms;
    }
    return j;
}

std::string to_csv(const Schedule& schedule) {
    std::string csv = "stage,resource,start_ms,end_ms\n";
    char row[160];
    for (const ScheduleEvent& e : schedule.events) {
        std::snprintf(row, sizeof row, "%s,%s,%.6f,%.6f\n", e.stage.c_str(),
                      resource_name(e.resource), e.start_ms, e.end_ms);
        csv += row;
    }
    return csv;
}

} // namespace dynres
