#include "scdrl.h"

#include <cstring>
#include <new>
#include <string>

#include "scdrl/harness.hpp"
#include "scdrl/ref_network.hpp"
#include "scdrl/sc_network.hpp"
#include "scdrl/sc_units.hpp"

struct scdrl_ctx {
    std::string last_error;
};

struct scdrl_network {
    scdrl::WeightFile file;
};

namespace {

// Wraps a call body so every entry point has uniform error capture.
template <typename Fn>
int guarded(scdrl_ctx* ctx, Fn&& fn) {
    if (!ctx) {
        return SCDRL_ERR_CONFIG;
    }
    ctx->last_error.clear();
    try {
        return fn();
    } catch (const scdrl::ConfigError& e) {
        ctx->last_error = e.what();
        return SCDRL_ERR_CONFIG;
    } catch (const std::exception& e) {
        ctx->last_error = e.what();
        return SCDRL_ERR_RUNTIME;
    }
}

}  // namespace

extern "C" {

scdrl_ctx* scdrl_ctx_new(void) { return new (std::nothrow) scdrl_ctx(); }

void scdrl_ctx_free(scdrl_ctx* ctx) { delete ctx; }

const char* scdrl_last_error(const scdrl_ctx* ctx) {
    return ctx ? ctx->last_error.c_str() : "null context";
}

int scdrl_run(scdrl_ctx* ctx, const char* command, const char* config_path,
              int64_t seed_override, const char* out_dir,
              int baseline_override) {
    return guarded(ctx, [&]() -> int {
        if (!command && !config_path) {
            throw scdrl::ConfigError("either command or config_path required");
        }
        nlohmann::json j;
        if (config_path) {
            j = scdrl::ExperimentConfig::load(config_path).raw;
        } else {
            j = {{"version", 1}};
        }
        if (command) {
            j["command"] = command;
        }
        scdrl::ExperimentConfig cfg = scdrl::ExperimentConfig::parse(j);
        if (seed_override >= 0) {
            cfg.seed = static_cast<std::uint64_t>(seed_override);
        }
        if (out_dir) {
            cfg.out_dir = out_dir;
        }
        if (baseline_override >= 0) {
            cfg.baseline = baseline_override != 0;
        }
        return scdrl::run_experiment(cfg);
    });
}

int scdrl_delay_ns(scdrl_ctx* ctx, uint32_t length, int pipelined,
                   double* delay_ns) {
    return guarded(ctx, [&]() -> int {
        if (!delay_ns) {
            throw scdrl::ConfigError("delay_ns is null");
        }
        if (length == 0) {
            throw scdrl::ConfigError("length must be positive");
        }
        if (pipelined != 0 && pipelined != 1) {
            throw scdrl::ConfigError("pipelined must be 0 or 1");
        }
        scdrl::PipelineConfig pc = pipelined
                                       ? scdrl::PipelineConfig::pipelined()
                                       : scdrl::PipelineConfig::non_pipelined();
        *delay_ns = scdrl::delay_ns(length, pc);
        return SCDRL_OK;
    });
}

int scdrl_apc_inaccuracy(scdrl_ctx* ctx, const char* variant, int n_inputs,
                         uint32_t length, uint32_t trials, uint64_t seed,
                         double* inaccuracy_pct) {
    return guarded(ctx, [&]() -> int {
        if (!variant || !inaccuracy_pct) {
            throw scdrl::ConfigError("variant/inaccuracy_pct is null");
        }
        scdrl::ApcDesign design;
        if (std::strcmp(variant, "original") == 0) {
            design = scdrl::ApcDesign::original(n_inputs);
        } else if (std::strcmp(variant, "improved") == 0) {
            design = scdrl::ApcDesign::improved(n_inputs);
        } else {
            throw scdrl::ConfigError(std::string("unknown variant: ") +
                                     variant);
        }
        scdrl::Rng rng(seed);
        *inaccuracy_pct =
            100.0 * scdrl::apc_inaccuracy(design, length, trials, rng);
        return SCDRL_OK;
    });
}

int scdrl_network_load(scdrl_ctx* ctx, const char* weight_path,
                       scdrl_network** out) {
    return guarded(ctx, [&]() -> int {
        if (!weight_path || !out) {
            throw scdrl::ConfigError("weight_path/out is null");
        }
        auto* net = new scdrl_network{scdrl::read_weight_file(weight_path)};
        *out = net;
        return SCDRL_OK;
    });
}

void scdrl_network_free(scdrl_network* net) { delete net; }

int scdrl_network_input_width(const scdrl_network* net) {
    return net ? net->file.spec.input_width() : -1;
}

int scdrl_network_forward(scdrl_ctx* ctx, const scdrl_network* net,
                          const double* input, size_t input_len,
                          double* q_out) {
    return guarded(ctx, [&]() -> int {
        if (!net || !input || !q_out) {
            throw scdrl::ConfigError("net/input/q_out is null");
        }
        if (input_len != static_cast<size_t>(net->file.spec.input_width())) {
            throw scdrl::ConfigError("input length mismatch");
        }
        scdrl::RefNetwork ref(net->file.spec, net->file.weights);
        *q_out = ref.forward(std::span<const double>(input, input_len));
        return SCDRL_OK;
    });
}

int scdrl_network_forward_sc(scdrl_ctx* ctx, const scdrl_network* net,
                             const double* input, size_t input_len,
                             uint32_t stream_length, uint64_t seed,
                             double* q_out) {
    return guarded(ctx, [&]() -> int {
        if (!net || !input || !q_out) {
            throw scdrl::ConfigError("net/input/q_out is null");
        }
        if (input_len != static_cast<size_t>(net->file.spec.input_width())) {
            throw scdrl::ConfigError("input length mismatch");
        }
        if (stream_length == 0) {
            throw scdrl::ConfigError("stream_length must be positive");
        }
        scdrl::ScNetwork sc(net->file.spec, net->file.weights, stream_length,
                            seed);
        *q_out = sc.forward(std::span<const double>(input, input_len)).q;
        return SCDRL_OK;
    });
}

}  // extern "C"
