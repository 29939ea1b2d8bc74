#pragma once

#include "dynres/calibration.hpp"

#include <json.hpp>

#include <cstdint>

namespace dynres {

// One weight-bearing component of the deployed stack.
struct ComponentSpec {
    std::int64_t params = 0;
    int weight_bits = 0;     // storage precision of the weights
    int activation_bits = 0; // recorded for the breakdown; workspace is a
                             // flat configured byte count, not derived
};

// Deployed mixed-precision configuration. Weight bytes are ceil(params *
// bits / 8) per component; the KV cache is kv_tokens * kv_bytes_per_token
// (the per-token figure already reflects kv_bits); the activation workspace
// is a flat configured allowance. Defaults describe the shipped 3B phone
// configuration and land under the 2.2 GiB budget.
struct MemorySpec {
    ComponentSpec llm{2'700'000'000, 4, 16};
    ComponentSpec vit{400'000'000, 8, 16};
    ComponentSpec projector{25'000'000, 8, 16};
    int kv_bits = 8;
    std::int64_t kv_tokens = 2048;
    std::int64_t kv_bytes_per_token = 163'840; // at kv_bits precision
    std::int64_t activation_workspace_bytes = 104'857'600;
    std::int64_t budget_bytes = 2'362'232'013; // 2.2 * 2^30, rounded

    // Keys (all optional, defaults above): mem.llm_params, mem.vit_params,
    // mem.projector_params, mem.weight_bits.{llm,vit,projector},
    // mem.activation_bits.{llm,vit,projector}, mem.kv_bits, mem.kv_tokens,
    // mem.kv_bytes_per_token, mem.activation_workspace_bytes,
    // mem.budget_bytes.
    static MemorySpec from_config(const KeyValueConfig& config);
};

struct MemoryBreakdown {
    std::int64_t llm_weights_bytes = 0;
    std::int64_t vit_weights_bytes = 0;
    std::int64_t projector_weights_bytes = 0;
    std::int64_t weights_total_bytes = 0;
    std::int64_t kv_cache_bytes = 0;
    std::int64_t workspace_bytes = 0;
    std::int64_t total_bytes = 0; // peak, with the image encoder resident
    // Steady state after the image encoder's weights are released.
    std::int64_t total_after_vit_free_bytes = 0;
    std::int64_t budget_bytes = 0;
    bool within_budget = false;
};

// Exact integer arithmetic; throws std::invalid_argument on non-positive
// counts or precisions outside {4, 8, 16, 32}.
MemoryBreakdown estimate_peak(const MemorySpec& spec = {});

nlohmann::json to_json(const MemoryBreakdown& breakdown);

} // namespace dynres
