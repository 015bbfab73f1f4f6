#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "scdrl.h"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic-computing DRL experiment harness"};
    app.require_subcommand(1);

    std::string config;
    std::int64_t seed = -1;
    std::string out_dir;
    bool baseline = false;

    const char* commands[] = {"bench-apc",  "bench-stanh", "bench-timing",
                              "compare-sc", "train",       "evaluate",
                              "gen-traces"};
    for (const char* name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "JSON experiment config");
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--baseline", baseline,
                      "run the scripted baseline policy instead of the agent");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    scdrl_ctx* ctx = scdrl_ctx_new();
    if (!ctx) {
        std::fprintf(stderr, "error: out of memory\n");
        return SCDRL_ERR_RUNTIME;
    }
    int rc = scdrl_run(ctx, command.c_str(),
                       config.empty() ? nullptr : config.c_str(), seed,
                       out_dir.empty() ? nullptr : out_dir.c_str(),
                       baseline ? 1 : -1);
    if (rc != SCDRL_OK) {
        std::fprintf(stderr, "error: %s\n", scdrl_last_error(ctx));
    }
    scdrl_ctx_free(ctx);
    return rc;
}
