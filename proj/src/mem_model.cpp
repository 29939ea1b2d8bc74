#include "dynres/mem_model.hpp"

#include <stdexcept>
#include <string>

namespace dynres {

namespace {

void require_bits(int bits, const char* what) {
    if (bits != 4 && bits != 8 && bits != 16 && bits != 32) {
        throw std::invalid_argument(std::string(what) + " precision must be one of " +
                                    "4/8/16/32 bits, got " + std::to_string(bits));
    }
}

void require_component(const ComponentSpec& c, const char* name) {
    if (c.params <= 0) {
        throw std::invalid_argument(std::string(name) + " parameter count must be positive");
    }
    require_bits(c.weight_bits, name);
    require_bits(c.activation_bits, name);
}

std::int64_t weight_bytes(const ComponentSpec& c) {
    return (c.params * c.weight_bits + 7) / 8;
}

} // namespace

MemorySpec MemorySpec::from_config(const KeyValueConfig& config) {
    MemorySpec spec;
    spec.llm.params = config.integer_or("mem.llm_params", spec.llm.params);
    spec.vit.params = config.integer_or("mem.vit_params", spec.vit.params);
    spec.projector.params =
        config.integer_or("mem.projector_params", spec.projector.params);
    spec.llm.weight_bits =
        int(config.integer_or("mem.weight_bits.llm", spec.llm.weight_bits));
    spec.vit.weight_bits =
        int(config.integer_or("mem.weight_bits.vit", spec.vit.weight_bits));
    spec.projector.weight_bits =
        int(config.integer_or("mem.weight_bits.projector", spec.projector.weight_bits));
    spec.llm.activation_bits =
        int(config.integer_or("mem.activation_bits.llm", spec.llm.activation_bits));
    spec.vit.activation_bits =
        int(config.integer_or("mem.activation_bits.vit", spec.vit.activation_bits));
    spec.projector.activation_bits = int(
        config.integer_or("mem.activation_bits.projector", spec.projector.activation_bits));
    spec.kv_bits = int(config.integer_or("mem.kv_bits", spec.kv_bits));
    spec.kv_tokens = config.integer_or("mem.kv_tokens", spec.kv_tokens);
    spec.kv_bytes_per_token =
        config.integer_or("mem.kv_bytes_per_token", spec.kv_bytes_per_token);
    spec.activation_workspace_bytes = config.integer_or(
        "mem.activation_workspace_bytes", spec.activation_workspace_bytes);
    spec.budget_bytes = config.integer_or("mem.budget_bytes", spec.budget_bytes);
    return spec;
}

MemoryBreakdown estimate_peak(const MemorySpec& spec) {
    require_component(spec.llm, "llm");
    require_component(spec.vit, "vit");
    require_component(spec.projector, "projector");
    require_bits(spec.kv_bits, "kv");
    if (spec.kv_tokens < 0 || spec.kv_bytes_per_token < 0) {
        throw std::invalid_argument("KV cache sizes must be non-negative");
    }
    if (spec.activation_workspace_bytes < 0) {
        throw std::invalid_argument("workspace must be non-negative");
    }
    if (spec.budget_bytes <= 0) {
        throw std::invalid_argument("budget must be positive");
    }

    MemoryBreakdown b;
    b.llm_weights_bytes = weight_bytes(spec.llm);
    b.vit_weights_bytes = weight_bytes(spec.vit);
    b.projector_weights_bytes = weight_bytes(spec.projector);
    b.weights_total_bytes =
        b.llm_weights_bytes + b.vit_weights_bytes + b.projector_weights_bytes;
    b.kv_cache_bytes = spec.kv_tokens * spec.kv_bytes_per_token;
    b.workspace_bytes = spec.activation_workspace_bytes;
    b.total_bytes = b.weights_total_bytes + b.kv_cache_bytes + b.workspace_bytes;
    b.total_after_vit_free_bytes = b.total_bytes - b.vit_weights_bytes;
    b.budget_bytes = spec.budget_bytes;
    b.within_budget = b.total_bytes <= b.budget_bytes;
    return b;
}

nlohmann::json to_json(const MemoryBreakdown& b) {
    return {
        {"llm_weights_bytes", b.llm_weights_bytes},
        {"vit_weights_bytes", b.vit_weights_bytes},
        {"projector_weights_bytes", b.projector_weights_bytes},
        {"weights_total_bytes", b.weights_total_bytes},
        {"kv_cache_bytes", b.kv_cache_bytes},
        {"workspace_bytes", b.workspace_bytes},
        {"total_bytes", b.total_bytes},
        {"total_after_vit_free_bytes", b.total_after_vit_free_bytes},
        {"budget_bytes", b.budget_bytes},
        {"within_budget", b.within_budget},
    };
}

} // namespace dynres
