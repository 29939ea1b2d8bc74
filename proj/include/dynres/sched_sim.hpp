#pragma once

#include "dynres/calibration.hpp"
#include "dynres/patch_planner.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dynres {

// Stage latencies for one device, normally loaded from a calibration file.
// Encode costs are per batch *group* (the whole group's cost at that size),
// keyed by group size. Prefill cost for a chunk of c tokens is
//   fixed_overhead_ms + per_token_ms * c + quadratic_ms * c^2.
struct CostModel {
    std::map<int, double> conv2d_per_batch; // CPU stage
    std::map<int, double> vit_per_batch;    // NPU stage
    double prefill_fixed_overhead_ms = 0.0;
    double prefill_per_token_ms = 0.0;
    double prefill_quadratic_ms = 0.0;
    double decode_per_token_ms = 0.0;
    double model_load_ms = 0.0;
    std::int64_t kv_capacity_tokens = 0;

    // Keys: encode.conv2d_ms.batch.<N>, encode.vit_ms.batch.<N>,
    // prefill.fixed_overhead_ms, prefill.per_token_ms,
    // prefill.quadratic_ms_per_token2, decode.per_token_ms,
    // timeline.model_load_ms, kv.capacity_tokens.
    static CostModel from_config(const KeyValueConfig& config);

    double prefill_chunk_ms(std::int64_t chunk_tokens) const;
    // Throws ConfigError when no entry exists for the group size.
    double conv2d_ms(int group_size) const;
    double vit_ms(int group_size) const;
};

struct EncodeScenario {
    std::int64_t patch_count = 0;
    int batch_size = 1;
    bool pipeline_overlap = true;
};

enum class Resource { cpu, npu, user };

struct ScheduleEvent {
    std::string stage;
    Resource resource = Resource::cpu;
    double start_ms = 0.0;
    double end_ms = 0.0;
    bool operator==(const ScheduleEvent&) const = default;
};

struct Schedule {
    std::vector<ScheduleEvent> events; // sorted by start time
    double makespan_ms = 0.0;
    // CPU work running entirely or partly under concurrent NPU work.
    double hidden_latency_ms = 0.0;
    std::optional<double> throughput_tokens_per_s; // decode stages only
    // Set by simulate_timeline.
    std::optional<double> time_to_first_token_ms;
    std::optional<double> image_processing_span_ms;
};

// End-to-end scenario around a plan: the user types while the image encodes.
struct TimelineScenario {
    double instruction_entry_ms = 0.0;
    std::int64_t input_tokens = 0;
    std::int64_t chunk_size = 128;
    std::int64_t output_tokens = 1;
    int encode_batch_size = 4;
    bool pipeline_overlap = true;
};

// Group patches into batch_size-sized groups, last group possibly smaller
// (9 patches at batch 4 -> {4, 4, 1}).
std::vector<int> batch_groups(std::int64_t patch_count, int batch_size);

// Two-stage pipeline: each group runs its CPU stage, then its NPU stage.
// With overlap, the next group's CPU stage may run under the current NPU
// stage; without it, groups are fully serialized.
Schedule simulate_encode(const EncodeScenario& scenario, const CostModel& costs);

// Rank candidate batch sizes by encode makespan (ascending; ties prefer the
// smaller batch).
std::vector<std::pair<int, double>> sweep_batch_size(std::int64_t patch_count,
                                                     const std::vector<int>& candidates,
                                                     const CostModel& costs,
                                                     bool pipeline_overlap = true);

// Sequential NPU chunks of chunk_size tokens (last chunk holds the
// remainder); ceil(input_tokens / chunk_size) events.
Schedule simulate_prefill(std::int64_t input_tokens, std::int64_t chunk_size,
                          const CostModel& costs);

std::vector<std::pair<std::int64_t, double>> sweep_chunk_size(
    std::int64_t input_tokens, const std::vector<std::int64_t>& candidates,
    const CostModel& costs);

// One NPU event per generated token; throughput = 1000 / decode_per_token.
Schedule simulate_decode(std::int64_t output_tokens, const CostModel& costs);

// Full pipeline: model load at t=0, patch encode right after, instruction
// entry concurrently on the user lane, prefill at max(encode end, entry end),
// then decode. Reports time-to-first-token (prefill end + one decode step)
// and the image processing span (load + encode).
Schedule simulate_timeline(const ResolutionPlan& plan, const TimelineScenario& scenario,
                           const CostModel& costs);

double resource_busy_ms(const Schedule& schedule, Resource resource);

nlohmann::json to_json(const Schedule& schedule);
// One `stage,resource,start_ms,end_ms` row per event.
std::string to_csv(const Schedule& schedule);

} // namespace dynres
